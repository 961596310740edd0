import json
from pathlib import Path
from typing import Any
from typing import Dict
from typing import Iterator
from typing import Tuple
from typing import Union


class EvaluationError(ValueError):
    pass


def read_jsonl(path: Union[str, Path]) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """
    Yield `(line number, object)` for every nonblank line of a JSONL file

    Unreadable files, malformed lines and non-object rows raise
    EvaluationError naming the path and line.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise EvaluationError(f"Cannot read {path}: {e}")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as e:
            raise EvaluationError(f"{path}:{lineno}: invalid JSON ({e.msg})")
        if not isinstance(row, dict):
            raise EvaluationError(f"{path}:{lineno}: expected a JSON object")
        yield lineno, row
