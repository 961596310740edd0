"""
Conversation records: FPT multi-task records, FIT trajectory
chain-of-thought records, negative samples and caption passthrough
"""
from .errors import NotQueryableError  # noqa: F401
from .errors import SkipRecord  # noqa: F401
from .observation import resolve_query  # noqa: F401
from .observation import select_observation  # noqa: F401
from .records import build_caption_record  # noqa: F401
from .records import build_fit_record  # noqa: F401
from .records import build_fpt_record  # noqa: F401
from .records import build_reasoning_record  # noqa: F401
from .records import build_referring_record  # noqa: F401
from .records import compose_future  # noqa: F401
from .records import FutureObservation  # noqa: F401
from .records import inject_negative  # noqa: F401
from .records import NEGATIVE_TASKS  # noqa: F401
from .templates import load_catalog  # noqa: F401
from .templates import TaskTemplate  # noqa: F401
from .templates import TemplateCatalog  # noqa: F401
from .textgen import Capability  # noqa: F401
from .textgen import HttpTextGenClient  # noqa: F401
from .textgen import make_textgen_client  # noqa: F401
from .textgen import TemplateTextGenClient  # noqa: F401
from .textgen import TextGenClient  # noqa: F401
from .textgen import TextGenError  # noqa: F401
