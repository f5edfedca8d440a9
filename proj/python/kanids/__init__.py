"""Python access to the kanids C++ core."""

import json

from ._kanids import KanidsError, Model as _Model, basis, metrics, model_kinds
from ._kanids import train as _train

__all__ = ["KanidsError", "Model", "basis", "metrics", "model_kinds", "train"]


class Model(_Model):
    def __init__(self, kind="MLP2", **spec):
        super().__init__(json.dumps({"kind": kind, **spec}))

    @property
    def spec(self):
        return json.loads(self.spec_json)


def train(model, x, y, x_test=None, y_test=None, **config):
    """Trains `model` in place on (x, y); returns the run report as a dict."""
    return json.loads(_train(model, x, y, json.dumps(config), x_test, y_test))
