"""
Text grammar for boxes and trajectories in conversation answers
"""
from .parse import ANSWER_GRAMMAR  # noqa: F401
from .parse import parse_norm_box  # noqa: F401
from .parse import parse_response  # noqa: F401
from .parse import split_trajectory_prefix  # noqa: F401
from .serialize import check_category  # noqa: F401
from .serialize import encode_trajectory  # noqa: F401
from .serialize import IMAGE_TOKEN  # noqa: F401
from .serialize import render_frame_markers  # noqa: F401
from .serialize import serialize_detection  # noqa: F401
from .serialize import serialize_trajectory  # noqa: F401
from .types import *  # noqa: F401, F403
