"""
Text-generation clients used to compose future observations
"""
import hashlib
import logging
import re
import time
from enum import Enum
from typing import Optional
from typing import Protocol

import httpx

from ...config import fail_getenv
from ...config import settings
from ...config import TextGenConfig
from ...config import TextGenKind

logger = logging.getLogger(__name__)

_ACTION_LINE = re.compile(r"^- (?P<label>[^:\n]+): (?P<action>.+)$", re.M)

_OPENERS = (
    "Judging from the trajectories,",
    "Given how the subjects move across the frames,",
    "Following the observed motion,",
)


class Capability(str, Enum):
    DETERMINISTIC = "deterministic"
    EXTERNAL = "external"


class TextGenError(RuntimeError):
    """
    Failure of a text-generation call

    Attributes
    ----------
    prompt_hash: str
        short SHA-256 of the prompt, to find the record again in the logs
    retriable: bool
        the same call may succeed later (transport error, 5xx, rate limit)
    """

    def __init__(self, message: str, *, prompt_hash: str, retriable: bool):
        self.prompt_hash = prompt_hash
        self.retriable = retriable
        super().__init__(f"[prompt {prompt_hash}] {message}")


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode()).hexdigest()[:12]


class TextGenClient(Protocol):
    capability: Capability

    def generate(self, prompt: str) -> str:
        ...

    def close(self) -> None:
        ...


class TemplateTextGenClient:
    """
    Offline client: turns the `- label: action` lines of the prompt into a
    templated prediction containing every action verbatim
    """

    capability = Capability.DETERMINISTIC

    def generate(self, prompt: str) -> str:
        actions = [
            (m.group("label").strip(), m.group("action").strip())
            for m in _ACTION_LINE.finditer(prompt)
        ]
        if not actions:
            raise TextGenError(
                "No action lines in prompt",
                prompt_hash=prompt_hash(prompt),
                retriable=False,
            )
        opener = _OPENERS[
            int(hashlib.sha256(prompt.encode()).hexdigest(), 16)
            % len(_OPENERS)
        ]
        clauses = [
            f"{label} will most likely keep {action}"
            for label, action in actions
        ]
        if len(clauses) == 1:
            body = clauses[0]
        else:
            body = ", ".join(clauses[:-1]) + " and " + clauses[-1]
        return f"{opener} {body}."

    def close(self) -> None:
        pass


class HttpTextGenClient:
    """
    Client of an external completion endpoint

    POSTs `{"prompt": ...}` to `base_url` with a bearer token and reads the
    `completion` field of the JSON response. Transport errors, 429 and 5xx
    responses are retried up to `max_retries` times with exponential
    backoff.
    """

    capability = Capability.EXTERNAL

    def __init__(
        self,
        base_url: str,
        token: str,
        *,
        timeout: float = 30.0,
        max_retries: int = 3,
        backoff: float = 1.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.base_url = base_url
        self.token = token
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.transport = transport
        self._client = self._open()

    def _open(self) -> httpx.Client:
        return httpx.Client(
            timeout=self.timeout,
            transport=self.transport,
            headers={"Authorization": f"Bearer {self.token}"},
        )

    # process workers receive a pickled copy and open their own connection
    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_client"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._client = self._open()

    @property
    def closed(self) -> bool:
        return self._client.is_closed

    def close(self) -> None:
        self._client.close()

    def generate(self, prompt: str) -> str:
        digest = prompt_hash(prompt)
        last_error = ""
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = self._client.post(
                    self.base_url, json={"prompt": prompt}
                )
            except httpx.TransportError as e:
                last_error = f"{type(e).__name__}: {e}"
                logger.warning(
                    f"[prompt {digest}] attempt {attempt + 1} failed: "
                    f"{last_error}"
                )
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                logger.warning(
                    f"[prompt {digest}] attempt {attempt + 1} failed: "
                    f"{last_error}"
                )
                continue
            if response.status_code != 200:
                raise TextGenError(
                    f"HTTP {response.status_code}: {response.text[:200]}",
                    prompt_hash=digest,
                    retriable=False,
                )
            try:
                completion = str(response.json()["completion"])
            except (ValueError, KeyError, TypeError):
                raise TextGenError(
                    "Response has no `completion` field",
                    prompt_hash=digest,
                    retriable=False,
                )
            if not completion.strip():
                raise TextGenError(
                    "Empty completion", prompt_hash=digest, retriable=False
                )
            return completion.strip()
        raise TextGenError(
            f"Giving up after {self.max_retries + 1} attempts ({last_error})",
            prompt_hash=digest,
            retriable=True,
        )


def make_textgen_client(cfg: TextGenConfig) -> TextGenClient:
    if cfg.kind == TextGenKind.TEMPLATE:
        return TemplateTextGenClient()
    base_url = cfg.base_url or settings.FORGE_TEXTGEN_URL
    if not base_url:
        raise ValueError(
            "The http text-generation client needs `builder.textgen.base_url`"
            " or FORGE_TEXTGEN_URL"
        )
    return HttpTextGenClient(
        base_url,
        fail_getenv("FORGE_TEXTGEN_TOKEN"),
        timeout=cfg.timeout,
        max_retries=cfg.max_retries,
    )
