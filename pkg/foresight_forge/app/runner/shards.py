from pathlib import Path
from typing import IO
from typing import List
from typing import Optional

from ...utils import digest_file
from ..schemas import ShardKind
from ..schemas import StoreShard


class ShardWriter:
    """
    Single-writer JSONL output rolling over to a new file every
    `shard_size` lines

    Files are named `shard-00000.jsonl`, `shard-00001.jsonl`, ... and
    written with `\\n` line endings only.

    Use as a context manager; `shards` lists what was written once the
    writer is closed.
    """

    def __init__(
        self,
        directory: Path,
        *,
        shard_size: int,
        kind: ShardKind = ShardKind.CONVERSATION,
        prefix: str = "shard",
    ):
        if shard_size < 1:
            raise ValueError(f"shard_size must be >= 1, got {shard_size}")
        self.directory = Path(directory)
        self.shard_size = shard_size
        self.kind = kind
        self.prefix = prefix
        self.shards: List[StoreShard] = []
        self._fout: Optional[IO[str]] = None
        self._path: Optional[Path] = None
        self._count = 0

    def __enter__(self) -> "ShardWriter":
        self.directory.mkdir(parents=True, exist_ok=True)
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _roll(self) -> None:
        self._finish()
        self._path = (
            self.directory / f"{self.prefix}-{len(self.shards):05d}.jsonl"
        )
        self._fout = self._path.open("w", newline="\n")
        self._count = 0

    def _finish(self) -> None:
        if self._fout is None or self._path is None:
            return
        self._fout.close()
        self.shards.append(
            StoreShard(
                path=self._path.name,
                kind=self.kind,
                records=self._count,
                digest=digest_file(self._path),
            )
        )
        self._fout = None

    def write(self, line: str) -> None:
        if self._fout is None or self._count >= self.shard_size:
            self._roll()
        assert self._fout is not None
        self._fout.write(line + "\n")
        self._count += 1

    def close(self) -> None:
        self._finish()

    @property
    def total(self) -> int:
        return sum(s.records for s in self.shards) + (
            self._count if self._fout is not None else 0
        )
