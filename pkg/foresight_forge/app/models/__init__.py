"""
Canonical domain types shared by every stage of the pipeline
"""
from .clip import *  # noqa: F403
from .conversation import *  # noqa: F403
from .geometry import *  # noqa: F403
from .report import *  # noqa: F403
