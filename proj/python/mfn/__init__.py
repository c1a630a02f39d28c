# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The MFN Authors.
"""Memory Fusion Network: multi-view sequence models with attention over
LSTM memories and a gated cross-view memory.

Configs, reports and histories are plain dicts; datasets and models are
handles to the C++ core.
"""

from __future__ import annotations

import json
from typing import Any, Sequence

from . import _mfn
from ._mfn import (
    AlignmentError,
    ConfigError,
    Dataset,
    DimensionError,
    DomainError,
    Error,
    NumericError,
    ParseError,
    SchemaError,
    StateError,
)

__all__ = [
    "AlignmentError",
    "ConfigError",
    "Dataset",
    "DimensionError",
    "DomainError",
    "Error",
    "Model",
    "NumericError",
    "ParseError",
    "SchemaError",
    "StateError",
    "ablation_variants",
    "config_for",
    "default_config",
    "param_count",
    "split",
    "synth",
    "tiny_config",
    "with_variant",
]

Config = dict[str, Any]


def default_config() -> Config:
    """Language / visual / acoustic views with input widths 300, 35, 74."""
    return json.loads(_mfn.default_config())


def tiny_config() -> Config:
    """Three views, d_x = 3, d_c = 4, d_mem = 5."""
    return json.loads(_mfn.tiny_config())


def config_for(
    data: Dataset, hidden_dim: int, memory_dim: int, task: str = "auto", variant: str = "full"
) -> Config:
    """Model config whose views follow the dataset schema."""
    return json.loads(_mfn.config_for(data, hidden_dim, memory_dim, task, variant))


def with_variant(config: Config, variant: str) -> Config:
    return json.loads(_mfn.with_variant(json.dumps(config), variant))


def ablation_variants(config: Config) -> list[str]:
    return _mfn.ablation_variants(json.dumps(config))


def param_count(config: Config) -> dict[str, int]:
    return json.loads(_mfn.param_count(json.dumps(config)))


def synth(**config: Any) -> tuple[Dataset, list[dict[str, Any]]]:
    """Cross-view parity dataset and its latent bits, one record per sequence."""
    data, latents = _mfn.synth(json.dumps(config))
    return data, [json.loads(line) for line in latents.splitlines() if line]


def split(data: Dataset, ratios: Sequence[float] = (0.7, 0.15, 0.15), seed: int = 0) -> dict[str, list[str]]:
    """Group-disjoint train / valid / test id lists."""
    return json.loads(_mfn.split(data, list(ratios), seed))


class Model:
    """Config plus parameters."""

    def __init__(self, config: Config, seed: int = 0, *, _handle: _mfn.Model | None = None) -> None:
        self._m = _handle if _handle is not None else _mfn.Model(json.dumps(config), seed)

    @classmethod
    def load(cls, path: str) -> "Model":
        return cls({}, _handle=_mfn.Model.load(str(path)))

    def save(self, path: str) -> None:
        self._m.save(str(path))

    @property
    def config(self) -> Config:
        return json.loads(self._m.config_json())

    @property
    def seed(self) -> int:
        return self._m.seed

    def parameter_count(self) -> int:
        return self._m.parameter_count()

    def features(self, data: Dataset) -> list[list[float]]:
        return self._m.features(data)

    def predict(self, data: Dataset, threads: int = 1) -> list[list[float]]:
        return self._m.predict(data, threads)

    def evaluate(self, data: Dataset, threads: int = 1) -> dict[str, Any]:
        return json.loads(self._m.evaluate(data, threads))

    def train(self, train_set: Dataset, valid_set: Dataset, **train_config: Any) -> dict[str, Any]:
        """Trains in place, keeping the parameters with the best validation loss."""
        return json.loads(self._m.train(train_set, valid_set, json.dumps(train_config)))

    def grad_check(self, data: Dataset, index: int = 0, eps: float = 1e-5) -> dict[str, Any]:
        return json.loads(self._m.grad_check(data, index, eps))

    def bench(self, data: Dataset, repeats: int = 3, threads: int = 1) -> dict[str, Any]:
        return json.loads(self._m.bench(data, repeats, threads))
