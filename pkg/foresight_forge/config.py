import hashlib
import json
from enum import Enum
from os import getenv
from pathlib import Path
from typing import Dict
from typing import List
from typing import Optional
from typing import Union

from dotenv import load_dotenv
from pydantic import BaseModel
from pydantic import BaseSettings
from pydantic import Field
from pydantic import validator

import foresight_forge
from .app.models.conversation import TaskType
from .app.sampler import SamplerConfig

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib  # type: ignore


def fail_getenv(key):
    value = getenv(key, None)
    if value is None:
        raise ValueError(f"Must provide environment variable {key}")
    return value


load_dotenv(".foresight_forge.env")


class Settings(BaseSettings):
    PROJECT_NAME: str = "foresight-forge"
    PROJECT_VERSION: str = foresight_forge.__VERSION__

    ###########################################################################
    # TEXT GENERATION
    ###########################################################################
    FORGE_TEXTGEN_URL: Optional[str] = getenv("FORGE_TEXTGEN_URL", None)
    FORGE_TEXTGEN_TOKEN: Optional[str] = getenv("FORGE_TEXTGEN_TOKEN", None)

    ###########################################################################
    # LOGGING
    ###########################################################################
    FORGE_LOG_LEVEL: str = getenv("FORGE_LOG_LEVEL", "INFO")


settings = Settings()


DEFAULT_DISTRACTORS = (
    "person",
    "bicycle",
    "car",
    "motorcycle",
    "airplane",
    "bus",
    "train",
    "truck",
    "boat",
    "traffic light",
    "bench",
    "bird",
    "cat",
    "dog",
    "horse",
    "sheep",
    "cow",
    "elephant",
    "bear",
    "zebra",
    "giraffe",
    "backpack",
    "umbrella",
    "handbag",
    "suitcase",
    "frisbee",
    "skis",
    "kite",
    "skateboard",
    "surfboard",
    "bottle",
    "cup",
    "chair",
    "couch",
    "potted plant",
    "bed",
    "laptop",
    "cell phone",
    "book",
    "clock",
    "panda",
    "ball",
)


class SourceFormat(str, Enum):
    COCO = "coco"
    MOT = "mot"
    SOT = "sot"
    REFERRING = "referring"
    CAPTION = "caption"


class SourceConfig(BaseModel):
    """
    One annotation source

    Attributes
    ----------
    dataset: str
        free tag propagated to every record built from this source
    format: SourceFormat
        on-disk layout of `path`
    path: Path
        annotation file (COCO json, MOT gt.txt, SOT groundtruth.txt, JSONL)
    seqinfo, attributes, image_dir, category:
        optional sidecars and overrides for the sequence formats
    """

    dataset: str
    format: SourceFormat
    path: Path
    seqinfo: Optional[Path] = None
    attributes: Optional[Path] = None
    image_dir: Optional[Path] = None
    category: Optional[str] = None
    width: Optional[int] = None
    height: Optional[int] = None

    @validator("dataset")
    def not_empty(cls, value):
        if not value.strip():
            raise ValueError("dataset tag must be nonempty")
        return value

    @validator("path")
    def path_not_empty(cls, value):
        if not str(value).strip():
            raise ValueError("source path must be nonempty")
        return value


class TextGenKind(str, Enum):
    TEMPLATE = "template"
    HTTP = "http"


class TextGenConfig(BaseModel):
    kind: TextGenKind = TextGenKind.TEMPLATE
    base_url: Optional[str] = None
    timeout: float = 30.0
    max_retries: int = Field(default=3, ge=0)


class BuilderConfig(BaseModel):
    negative_ratio: float = Field(default=0.1, ge=0.0, le=1.0)
    template_catalog: Optional[Path] = None
    distractors: List[str] = Field(
        default_factory=lambda: list(DEFAULT_DISTRACTORS)
    )
    category_prefix: bool = True
    task_weights: Dict[TaskType, float] = Field(
        default_factory=lambda: {task: 1.0 for task in TaskType}
    )
    textgen: TextGenConfig = Field(default_factory=TextGenConfig)

    @validator("task_weights")
    def valid_weights(cls, value):
        if any(weight < 0 for weight in value.values()):
            raise ValueError("task weights must be nonnegative")
        if sum(value.values()) <= 0:
            raise ValueError("task weights must sum to a positive value")
        return value

    def weight(self, task: TaskType) -> float:
        return self.task_weights.get(task, 0.0)


class OutputConfig(BaseModel):
    directory: Path = Path("forge-out")
    shard_size: int = Field(default=10_000, ge=1)


class EvalConfig(BaseModel):
    ground_truth: List[Path] = Field(default_factory=list)


class ForgeConfig(BaseModel):
    sources: List[SourceConfig] = Field(default_factory=list)
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)
    builder: BuilderConfig = Field(default_factory=BuilderConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)

    def digest(self) -> str:
        canonical = json.dumps(
            json.loads(self.json()), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode()).hexdigest()


def load_config(path: Union[str, Path]) -> ForgeConfig:
    """
    Load a run configuration from a TOML or JSON document

    Relative source paths are resolved against the directory holding the
    configuration file.
    """
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix == ".toml":
        data = tomllib.loads(raw.decode())
    elif path.suffix == ".json":
        data = json.loads(raw)
    else:
        raise ValueError(
            f"Unsupported configuration format `{path.suffix}` ({path})"
        )
    config = ForgeConfig(**data)

    base = path.parent
    for source in config.sources:
        for attr in ("path", "seqinfo", "attributes", "image_dir"):
            value = getattr(source, attr)
            if value is not None and not value.is_absolute():
                setattr(source, attr, base / value)
    if (
        config.builder.template_catalog is not None
        and not config.builder.template_catalog.is_absolute()
    ):
        config.builder.template_catalog = (
            base / config.builder.template_catalog
        )
    config.eval.ground_truth = [
        p if p.is_absolute() else base / p for p in config.eval.ground_truth
    ]
    return config
