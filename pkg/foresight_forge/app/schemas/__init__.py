from .corpus import *  # noqa: F403
from .evaluation import *  # noqa: F403
from .manifest import *  # noqa: F403
from .store import *  # noqa: F403


__all__ = (
    corpus.__all__  # noqa: F405
    + evaluation.__all__  # noqa: F405
    + manifest.__all__  # noqa: F405
    + store.__all__  # noqa: F405
)
