import json
import pickle

import httpx
import pytest
from devtools import debug

from foresight_forge.app.builder import Capability
from foresight_forge.app.builder import HttpTextGenClient
from foresight_forge.app.builder import make_textgen_client
from foresight_forge.app.builder import TemplateTextGenClient
from foresight_forge.app.builder import TextGenError
from foresight_forge.config import TextGenConfig

PROMPT = "Actions observed:\n- the player (Id 1): running toward the goal"


@pytest.fixture
def no_sleep(mocker):
    return mocker.patch("foresight_forge.app.builder.textgen.time.sleep")


def _client(handler, **kwargs):
    return HttpTextGenClient(
        "http://textgen.local/complete",
        "token",
        transport=httpx.MockTransport(handler),
        **kwargs,
    )


def test_template_client():
    client = TemplateTextGenClient()
    assert client.capability == Capability.DETERMINISTIC
    text = client.generate(PROMPT)
    debug(text)
    assert "the player (Id 1) will most likely keep running toward" in text
    assert text == client.generate(PROMPT)
    with pytest.raises(TextGenError):
        client.generate("no action lines here")


def test_http_client(no_sleep):
    seen = []

    def handler(request: httpx.Request) -> httpx.Response:
        seen.append(request)
        return httpx.Response(200, json=dict(completion=" He scores. "))

    client = _client(handler)
    assert client.capability == Capability.EXTERNAL
    assert client.generate(PROMPT) == "He scores."
    (request,) = seen
    assert request.headers["Authorization"] == "Bearer token"
    assert json.loads(request.content) == dict(prompt=PROMPT)
    no_sleep.assert_not_called()


def test_http_client_retries(no_sleep):
    """
    GIVEN an endpoint failing twice with 503 before answering
    WHEN generating
    THEN the client backs off exponentially and returns the completion
    """
    responses = iter(
        [
            httpx.Response(503),
            httpx.Response(429),
            httpx.Response(200, json=dict(completion="It falls.")),
        ]
    )
    client = _client(lambda request: next(responses), backoff=0.5)
    assert client.generate(PROMPT) == "It falls."
    assert [c.args[0] for c in no_sleep.call_args_list] == [0.5, 1.0]


def test_http_client_gives_up(no_sleep):
    def handler(request):
        raise httpx.ConnectError("connection refused", request=request)

    client = _client(handler, max_retries=2)
    with pytest.raises(TextGenError) as e:
        client.generate(PROMPT)
    debug(str(e.value))
    assert e.value.retriable
    assert e.value.prompt_hash in str(e.value)
    assert no_sleep.call_count == 2


@pytest.mark.parametrize(
    "response",
    [
        httpx.Response(400, text="bad request"),
        httpx.Response(200, json=dict(text="wrong field")),
        httpx.Response(200, json=dict(completion="  ")),
    ],
)
def test_http_client_permanent_errors(no_sleep, response):
    client = _client(lambda request: response)
    with pytest.raises(TextGenError) as e:
        client.generate(PROMPT)
    assert not e.value.retriable
    no_sleep.assert_not_called()


def test_make_textgen_client(monkeypatch):
    assert isinstance(
        make_textgen_client(TextGenConfig()), TemplateTextGenClient
    )
    with pytest.raises(ValueError, match="base_url"):
        make_textgen_client(TextGenConfig(kind="http"))

    cfg = TextGenConfig(kind="http", base_url="http://textgen.local")
    with pytest.raises(ValueError, match="FORGE_TEXTGEN_TOKEN"):
        make_textgen_client(cfg)
    monkeypatch.setenv("FORGE_TEXTGEN_TOKEN", "secret")
    client = make_textgen_client(cfg)
    assert isinstance(client, HttpTextGenClient)
    assert client.token == "secret"


def test_http_client_close():
    """
    GIVEN an http client and a pickled copy of it, as sent to a process
          worker
    WHEN closing the original
    THEN its connection pool is closed and the copy keeps its own
    """
    client = HttpTextGenClient("http://textgen.local/complete", "token")
    assert not client.closed
    copy = pickle.loads(pickle.dumps(client))
    client.close()
    assert client.closed
    assert not copy.closed
    assert copy.token == "token"
    copy.close()

    TemplateTextGenClient().close()
