"""Shared test backends and text generators."""

import random
import threading
import time

import pytest

from ramblekit.backends import GenerationRequest, OfflineBackend
from ramblekit.engine import GistEngine
from ramblekit.errors import BackendError

_WORDS = (
    "garden tomato harvest sunlight water compost seedling bloom trellis "
    "soil pruning beetle mulch basil carrot radish fence sparrow morning "
    "shade rain bucket glove spade row leaf root stem crop yield"
).split()


def make_text(sentences=6, seed=0, words_per_sentence=(5, 14)):
    """Deterministic multi-sentence prose for property tests."""
    rng = random.Random(seed)
    out = []
    for _ in range(sentences):
        n = rng.randint(*words_per_sentence)
        picked = [rng.choice(_WORDS) for _ in range(n)]
        out.append(" ".join(picked).capitalize() + ".")
    return " ".join(out)


class CountingBackend:
    """Delegates to an inner backend, counting generate() calls by kind."""

    def __init__(self, inner=None):
        self.inner = inner or OfflineBackend()
        self.calls = []
        self._lock = threading.Lock()

    def count(self, kind=None):
        with self._lock:
            if kind is None:
                return len(self.calls)
            return sum(1 for k in self.calls if k is kind)

    def reset(self):
        with self._lock:
            self.calls.clear()

    def generate(self, request: GenerationRequest):
        # count on call, not on first iteration
        with self._lock:
            self.calls.append(request.kind)
        return self.inner.generate(request)


class SlowBackend:
    """Delegates with a pause between chunks, to widen race windows."""

    def __init__(self, inner=None, delay=0.01):
        self.inner = inner or OfflineBackend()
        self.delay = delay

    def generate(self, request: GenerationRequest):
        for chunk in self.inner.generate(request):
            time.sleep(self.delay)
            yield chunk


class FlakyBackend:
    """Fails the first ``failures`` calls, then delegates."""

    def __init__(self, failures=1, inner=None):
        self.inner = inner or OfflineBackend()
        self.remaining = failures
        self._lock = threading.Lock()

    def generate(self, request: GenerationRequest):
        with self._lock:
            if self.remaining > 0:
                self.remaining -= 1
                raise BackendError("simulated backend outage")
        return self.inner.generate(request)


class ScriptedBackend:
    """Returns canned responses in order, whatever the request."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.requests = []

    def generate(self, request: GenerationRequest):
        self.requests.append(request)
        if not self.responses:
            raise BackendError("script exhausted")
        response = self.responses.pop(0)
        if isinstance(response, Exception):
            raise response
        yield response


@pytest.fixture
def counting_backend():
    return CountingBackend()


@pytest.fixture
def engine(counting_backend):
    return GistEngine(counting_backend)
