"""
Executor backends for the per-record work of the pipeline stages

Work units are submitted in batches of `RUNNER_BATCH_SIZE` and results come
back in submission order, so the output of a stage does not depend on the
backend or on the number of workers.
"""
import logging
from concurrent.futures import Executor
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures import ThreadPoolExecutor
from itertools import islice
from typing import Callable
from typing import Dict
from typing import Iterable
from typing import Iterator
from typing import Optional
from typing import Type
from typing import TypeVar

from ...config_runner import settings
from .common import close_job_logger  # noqa: F401
from .common import set_job_logger  # noqa: F401
from .common import StageEmptyResult  # noqa: F401
from .common import StageError  # noqa: F401
from .common import StageInputError  # noqa: F401
from .common import StageValidationError  # noqa: F401
from .shards import ShardWriter  # noqa: F401

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

_backends: Dict[str, Type[Executor]] = {}
_backends["thread"] = ThreadPoolExecutor
_backends["process"] = ProcessPoolExecutor


def _batches(units: Iterable[T], size: int) -> Iterator[list]:
    iterator = iter(units)
    while True:
        batch = list(islice(iterator, size))
        if not batch:
            return
        yield batch


def map_units(
    func: Callable[[T], R],
    units: Iterable[T],
    *,
    workers: Optional[int] = None,
    backend: Optional[str] = None,
    batch_size: Optional[int] = None,
) -> Iterator[R]:
    """
    Apply `func` to every unit, yielding results in input order

    With a single worker everything runs in the calling thread. The
    `process` backend needs `func` and the units to be picklable.
    """
    workers = workers or settings.RUNNER_WORKERS
    backend = backend or settings.RUNNER_BACKEND
    batch_size = batch_size or settings.RUNNER_BATCH_SIZE
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if workers == 1:
        yield from map(func, units)
        return
    try:
        executor_class = _backends[backend]
    except KeyError:
        raise NotImplementedError(
            f"Runner backend {backend} not implemented, choose one of "
            f"{sorted(_backends)}"
        )
    logger.debug(f"{backend} backend with {workers} workers")
    with executor_class(max_workers=workers) as executor:
        for batch in _batches(units, batch_size):
            yield from executor.map(func, batch)
