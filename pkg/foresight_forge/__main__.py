import argparse as ap
import json
import logging
import sys
from pathlib import Path
from sys import argv
from typing import Optional

from pydantic import ValidationError

from .app.grammar import ParseMode
from .app.runner import StageError
from .app.runner import StageInputError
from .config import ForgeConfig
from .config import load_config
from .config import settings
from .tasks import cmd_build
from .tasks import cmd_eval
from .tasks import cmd_ingest
from .tasks import cmd_validate
from .tasks import EvalKind

common = ap.ArgumentParser(add_help=False)
common.add_argument("--config", type=Path, help="TOML or JSON run config")
common.add_argument("--seed", type=int, help="run seed")
common.add_argument("--workers", type=int, help="executor workers")
common.add_argument("--out", type=Path, help="output directory")
mode = common.add_mutually_exclusive_group()
mode.add_argument(
    "--strict", dest="mode", action="store_const", const=ParseMode.STRICT
)
mode.add_argument(
    "--lenient", dest="mode", action="store_const", const=ParseMode.LENIENT
)

parser = ap.ArgumentParser(prog="foresight-forge")
subparsers = parser.add_subparsers(dest="cmd", required=True)

subparsers.add_parser(
    "ingest", parents=[common], help="build the canonical store"
)

build = subparsers.add_parser(
    "build", parents=[common], help="build the conversation corpus"
)
build.add_argument("--store", type=Path, help="canonical store directory")

validate = subparsers.add_parser(
    "validate", parents=[common], help="re-check a corpus"
)
validate.add_argument("corpus", type=Path)

evaluate = subparsers.add_parser(
    "eval", parents=[common], help="score model outputs"
)
evaluate.add_argument("kind", choices=[k.value for k in EvalKind])
evaluate.add_argument("pred", type=Path, help="prediction file")
evaluate.add_argument(
    "--gt", type=Path, nargs="+", help="SOT ground-truth store shards"
)


def _config(path: Optional[Path], required: bool) -> Optional[ForgeConfig]:
    if path is None:
        if required:
            raise StageInputError("--config is required")
        return None
    try:
        return load_config(path)
    except FileNotFoundError:
        raise StageInputError(f"No configuration file at {path}")
    except ValidationError as e:
        raise StageInputError(f"Invalid configuration {path}\n{e}")
    except ValueError as e:
        raise StageInputError(f"Cannot read configuration {path}: {e}")


def main(args: ap.Namespace) -> None:
    if args.cmd == "ingest":
        config = _config(args.config, required=True)
        summary = cmd_ingest(config=config, out=args.out)
    elif args.cmd == "build":
        config = _config(args.config, required=True)
        summary = cmd_build(
            config=config,
            seed=args.seed,
            workers=args.workers,
            store=args.store,
            out=args.out,
        )
    elif args.cmd == "validate":
        summary = cmd_validate(
            corpus=args.corpus,
            config=_config(args.config, required=False),
            mode=args.mode or ParseMode.STRICT,
            out=args.out,
        )
    else:
        summary = cmd_eval(
            kind=EvalKind(args.kind),
            pred=args.pred,
            gt=args.gt,
            config=_config(args.config, required=False),
            mode=args.mode or ParseMode.LENIENT,
            out=args.out,
        )
        print("\n".join(summary["headline"]))
        return
    print(json.dumps(summary, indent=2))


def run():
    args = parser.parse_args(argv[1:])
    logging.basicConfig(level=settings.FORGE_LOG_LEVEL.upper())
    try:
        main(args)
    except StageError as e:
        print(f"foresight-forge {args.cmd}: {e}", file=sys.stderr)
        sys.exit(e.exit_code)


if __name__ == "__main__":
    run()
