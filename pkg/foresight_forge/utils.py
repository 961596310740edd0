import hashlib
import random
import re
from pathlib import Path
from typing import Union


def slugify(value: str):
    return re.sub(r"[^a-z0-9.-]+", "_", value.lower()).strip("_")


def derive_seed(seed: int, record_index: int, salt: str = "") -> int:
    """
    Derive a 64-bit seed from the run seed and a record index

    Every random draw of a record goes through a generator seeded with this
    value, so results do not depend on the order in which records are
    processed.
    """
    payload = f"{seed}:{record_index}:{salt}".encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def record_rng(seed: int, record_index: int, salt: str = "") -> random.Random:
    return random.Random(derive_seed(seed, record_index, salt))


def digest_bytes(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def digest_file(path: Union[str, Path]) -> str:
    sha = hashlib.sha256()
    with Path(path).open("rb") as fin:
        for chunk in iter(lambda: fin.read(1 << 20), b""):
            sha.update(chunk)
    return sha.hexdigest()
