import logging
from pathlib import Path
from typing import Optional


class StageError(RuntimeError):
    """
    Failure of a pipeline stage, carrying the process exit code
    """

    exit_code = 1


class StageValidationError(StageError):
    exit_code = 1


class StageInputError(StageError):
    exit_code = 2


class StageEmptyResult(StageError):
    exit_code = 3


def set_job_logger(
    *,
    logger_name: str,
    log_file_path: Path,
    level: int = logging.WARNING,
    formatter: Optional[logging.Formatter] = None,
) -> logging.Logger:
    """
    Return a dedicated per-stage logger writing to `log_file_path`
    """
    logger = logging.getLogger(logger_name)
    logger.setLevel(level)
    file_handler = logging.FileHandler(log_file_path, mode="a")
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)
    return logger


def close_job_logger(logger: logging.Logger) -> None:
    """
    Close and detach all FileHandlers of `logger`
    """
    for handle in list(logger.handlers):
        if isinstance(handle, logging.FileHandler):
            handle.close()
            logger.removeHandler(handle)
