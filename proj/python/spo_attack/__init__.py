"""Black-box adversarial text attacks with SPO / SPOF search."""

import json

from ._core import (
    Engine as _Engine,
    FormatError,
    ProtocolError,
    TransportError,
    methods,
    softmax,
    tokenize,
    use_score,
)

__all__ = [
    "Attacker",
    "FormatError",
    "ProtocolError",
    "TransportError",
    "methods",
    "softmax",
    "tokenize",
    "use_score",
]


class Attacker:
    """Attacks texts against one victim with a fixed configuration.

    `victim` is "builtin:linear:PATH" or "http://host:port"; `encoder` is
    "static:PATH" or "http://host:port". Resource arguments are file paths.
    """

    def __init__(self, victim, **options):
        self._engine = _Engine(victim, **options)

    def attack(self, text, label=None):
        """Returns the per-document record as a dict."""
        return json.loads(self._engine.attack_json(text, label))

    def evaluate(self, dataset, jobs=1, limit=None):
        """Runs the attack over a JSON-lines dataset; returns the report dict."""
        return json.loads(self._engine.evaluate_json(dataset, jobs, limit))

    def classify(self, texts):
        return self._engine.classify(list(texts))

    @property
    def num_labels(self):
        return self._engine.num_labels

    @property
    def query_count(self):
        return self._engine.query_count
