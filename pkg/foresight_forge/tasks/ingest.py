import time
from pathlib import Path
from typing import Any
from typing import Dict
from typing import Optional

from .. import __VERSION__
from ..app.ingest import ingest_source
from ..app.ingest import IngestStats
from ..app.runner import StageInputError
from ..app.schemas import RunManifest
from ..app.schemas import ShardKind
from ..app.schemas import StageCounters
from ..app.schemas import StageReport
from ..app.schemas import StoreShard
from ..config import ForgeConfig
from ..config import SourceFormat
from ..utils import digest_file
from ..utils import slugify
from ._common import stage_logger
from ._common import write_manifest


def default_store(config: ForgeConfig) -> Path:
    return config.output.directory / "store"


def cmd_ingest(
    *,
    config: ForgeConfig,
    out: Optional[Path] = None,
) -> Dict[str, Any]:
    """
    Convert every configured source into one canonical store shard

    Shards are named `NNN_<dataset>.jsonl` after the position of the source
    in the configuration; `manifest.json` lists them with their digests and
    the per-source box accounting.

    Arguments
    ---------
    config (ForgeConfig):
        run configuration; only `sources` is used
    out (Path):
        store directory, `<output.directory>/store` by default

    Return
    ------
    summary (Dict):
        store directory, manifest path and number of rows written
    """
    if not config.sources:
        raise StageInputError("No sources configured")
    out = Path(out) if out is not None else default_store(config)
    digest = config.digest()
    manifest = RunManifest(tool_version=__VERSION__, config_digest=digest)

    with stage_logger("ingest", out, digest) as logger:
        for position, source in enumerate(config.sources):
            start = time.perf_counter()
            stats = IngestStats(path=str(source.path))
            try:
                rows = ingest_source(source, stats=stats)
            except FileNotFoundError as e:
                logger.error(str(e))
                raise StageInputError(
                    f"{source.dataset}: missing input {e.filename or e}"
                )
            except (ValueError, OSError) as e:
                logger.error(str(e))
                raise StageInputError(f"{source.dataset}: {e}")

            name = f"{position:03d}_{slugify(source.dataset)}.jsonl"
            shard_path = out / name
            with shard_path.open("w", newline="\n") as fout:
                for row in rows:
                    fout.write(row.json() + "\n")
            kind = (
                ShardKind.REFERRING
                if source.format == SourceFormat.REFERRING
                else ShardKind.SEQUENCE
            )
            manifest.shards.append(
                StoreShard(
                    path=name,
                    dataset=source.dataset,
                    kind=kind,
                    records=len(rows),
                    digest=digest_file(shard_path),
                )
            )
            manifest.input_digests[str(source.path)] = digest_file(
                source.path
            )
            manifest.stages.append(
                StageReport(
                    name=f"ingest:{source.dataset}",
                    counters=StageCounters(
                        attempted=stats.attempted,
                        emitted=stats.emitted,
                        dropped=stats.dropped,
                    ),
                    seconds=time.perf_counter() - start,
                )
            )
            logger.info(
                f"{source.dataset} ({source.format.value}): {len(rows)} rows, "
                f"{stats.emitted}/{stats.attempted} units kept -> {name}"
            )
            if not rows:
                warning = f"{source.dataset}: no rows ingested"
                logger.warning(warning)
                manifest.warnings.append(warning)

        manifest_path = write_manifest(out, manifest)

    return dict(
        store=str(out),
        manifest=str(manifest_path),
        shards=[s.path for s in manifest.shards],
        rows=sum(s.records for s in manifest.shards),
    )
