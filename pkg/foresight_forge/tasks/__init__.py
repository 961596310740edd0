"""
Pipeline stages

Each stage is a keyword-only function taking paths and the run
configuration and returning a summary dictionary; failures are raised as
`StageError` subclasses carrying the process exit code.
"""
from .build import cmd_build  # noqa: F401
from .evaluate import cmd_eval  # noqa: F401
from .evaluate import EvalKind  # noqa: F401
from .ingest import cmd_ingest  # noqa: F401
from .validate import cmd_validate  # noqa: F401
