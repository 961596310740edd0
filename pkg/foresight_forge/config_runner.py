from os import getenv

from pydantic import BaseSettings


class Settings(BaseSettings):
    RUNNER_BACKEND: str = getenv("FORGE_RUNNER_BACKEND", "thread")
    RUNNER_WORKERS: int = int(getenv("FORGE_RUNNER_WORKERS", 1))

    # Work units handed to the executor at once; bounds memory on large
    # corpora without changing the output order.
    RUNNER_BATCH_SIZE: int = int(getenv("FORGE_RUNNER_BATCH_SIZE", 2000))


settings = Settings()
