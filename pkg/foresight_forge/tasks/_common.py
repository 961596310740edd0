import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator
from typing import List
from typing import Tuple
from typing import Union

from pydantic import ValidationError

from .. import __VERSION__
from ..app.models import ReferringRecord
from ..app.models import SourceSequence
from ..app.runner import close_job_logger
from ..app.runner import set_job_logger
from ..app.runner import StageInputError
from ..app.schemas import RunManifest
from ..app.schemas import ShardKind
from ..config import settings

MANIFEST = "manifest.json"
LOG_FORMAT = "%(asctime)s; %(levelname)s; %(message)s"


@contextmanager
def stage_logger(
    stage: str, directory: Path, config_digest: str = ""
) -> Iterator[logging.Logger]:
    """
    Dedicated logger of one stage, writing to `<directory>/<stage>.log`
    """
    directory.mkdir(parents=True, exist_ok=True)
    logger = set_job_logger(
        logger_name=f"forge.{stage}",
        log_file_path=directory / f"{stage}.log",
        level=logging.getLevelName(settings.FORGE_LOG_LEVEL.upper()),
        formatter=logging.Formatter(LOG_FORMAT),
    )
    logger.info(f"foresight_forge.__VERSION__: {__VERSION__}")
    if config_digest:
        logger.info(f"config digest: {config_digest}")
    logger.info(f"START {stage}")
    try:
        yield logger
    finally:
        logger.info(f"END {stage}")
        close_job_logger(logger)


def write_manifest(directory: Path, manifest: RunManifest) -> Path:
    path = directory / MANIFEST
    path.write_text(manifest.json(indent=2) + "\n")
    return path


def read_manifest(directory: Path) -> RunManifest:
    path = directory / MANIFEST
    try:
        return RunManifest.parse_file(path)
    except FileNotFoundError:
        raise StageInputError(f"No manifest at {path}")
    except ValidationError as e:
        raise StageInputError(f"Invalid manifest {path}\n{e}")


def load_store(
    directory: Union[str, Path]
) -> Tuple[List[SourceSequence], List[ReferringRecord]]:
    """
    Read every shard of a canonical store, in manifest order
    """
    directory = Path(directory)
    manifest = read_manifest(directory)
    sequences: List[SourceSequence] = []
    referring: List[ReferringRecord] = []
    for shard in manifest.shards:
        path = directory / shard.path
        try:
            lines = path.read_text().splitlines()
        except OSError as e:
            raise StageInputError(f"Cannot read store shard {path}: {e}")
        for lineno, line in enumerate(lines, start=1):
            try:
                if shard.kind == ShardKind.REFERRING:
                    referring.append(ReferringRecord.parse_raw(line))
                else:
                    sequences.append(SourceSequence.parse_raw(line))
            except ValidationError as e:
                raise StageInputError(f"{path}:{lineno}: invalid row\n{e}")
    return sequences, referring
