"""
Scoring of tracking, multiple-choice and yes/no polling outputs
"""
from ._common import EvaluationError  # noqa: F401
from ._common import read_jsonl  # noqa: F401
from .choice import *  # noqa: F401, F403
from .pope import *  # noqa: F401, F403
from .responses import score_response_file  # noqa: F401
from .sot import *  # noqa: F401, F403
