"""Scenario configuration files.

A scenario document is JSON with three keys:

    model:  a registered model name (with optional "model_params"), or an
            inline table {"table": [{"theta": [...], "state": [[[re, im],
            ...], ...]}, ...]} defining states at explicit nodes only;
    prior:  {"nodes": [{"theta": [...], "weight": w}, ...]} or a density
            spec {"density": {...}, "box": [[lo, hi], ...],
            "rule": "gauss_legendre"|"trapezoid", "points": int};
    weight: {"constant": [[...]]} or {"varying": [W, ...]} with one SPD
            matrix per prior node (nodes-based priors only).

Matrices are read as IEEE-754 doubles with no rounding.  Densities:
{"kind": "uniform"} or {"kind": "gaussian", "mean": [...], "sigma": [...]}.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InvalidInput
from .models import (ConstantWeight, ModelSpec, PriorNodeSet, Scenario, VaryingWeight,
                     coin_model, displacement_model, qutrit_die_model, zrotation_model)

MODEL_REGISTRY: dict[str, Callable[..., ModelSpec]] = {
    "qubit_zrotation": zrotation_model,
    "qubit_xy_displacement": displacement_model,
    "coin": coin_model,
    "qutrit_die": qutrit_die_model,
}


def config_hash(document: dict) -> str:
    """Content digest of the canonical JSON form of a config document."""
    canon = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _parse_complex_matrix(entries, what: str) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        raise InvalidInput(f"{what} must be a d x d grid of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _table_model(table: list[dict]) -> tuple[ModelSpec, list[np.ndarray]]:
    if not table:
        raise InvalidInput("inline model table is empty")
    states: dict[tuple, np.ndarray] = {}
    thetas = []
    for row in table:
        theta = np.atleast_1d(np.asarray(row["theta"], dtype=float))
        states[tuple(theta)] = _parse_complex_matrix(row["state"], "inline state")
        thetas.append(theta)
    n = len(thetas[0])
    d = next(iter(states.values())).shape[0]

    def state_fn(theta: np.ndarray) -> np.ndarray:
        key = tuple(theta)
        if key not in states:
            raise InvalidInput(f"inline model has no state at theta={theta}")
        return states[key]

    return ModelSpec("inline_table", n, d, state_fn), thetas


def _build_model(doc: dict) -> tuple[ModelSpec, list[np.ndarray] | None]:
    spec = doc["model"]
    if isinstance(spec, str):
        try:
            factory = MODEL_REGISTRY[spec]
        except KeyError:
            raise InvalidInput(f"unknown model {spec!r}; "
                               f"registered: {sorted(MODEL_REGISTRY)}") from None
        return factory(**doc.get("model_params", {})), None
    if isinstance(spec, dict) and "table" in spec:
        return _table_model(spec["table"])
    raise InvalidInput("model must be a registered name or an inline {'table': ...}")


def _density_fn(spec: dict) -> Callable[[np.ndarray], float]:
    kind = spec.get("kind")
    if kind == "uniform":
        return lambda theta: 1.0
    if kind == "gaussian":
        mean = np.atleast_1d(np.asarray(spec["mean"], dtype=float))
        sigma = np.atleast_1d(np.asarray(spec["sigma"], dtype=float))
        if np.any(sigma <= 0):
            raise InvalidInput("gaussian density requires positive sigma")
        return lambda theta: float(np.exp(-0.5 * np.sum(((theta - mean) / sigma) ** 2)))
    raise InvalidInput(f"unknown density kind {kind!r}")


def _build_prior(doc: dict, table_thetas) -> PriorNodeSet:
    spec = doc["prior"]
    if "nodes" in spec:
        thetas = [np.atleast_1d(np.asarray(node["theta"], dtype=float)) for node in spec["nodes"]]
        weights = [float(node["weight"]) for node in spec["nodes"]]
        return PriorNodeSet(thetas, weights)
    if table_thetas is not None:
        raise InvalidInput("inline-table models require a nodes-based prior")
    from .models import quadrature_discretize

    return quadrature_discretize(_density_fn(spec["density"]), spec["box"],
                                 spec.get("rule", "gauss_legendre"), int(spec["points"]))


def _build_weight(doc: dict, prior: PriorNodeSet) -> ConstantWeight | VaryingWeight:
    spec = doc["weight"]
    if "constant" in spec:
        return ConstantWeight(np.asarray(spec["constant"], dtype=float))
    if "varying" in spec:
        mats = [np.asarray(m, dtype=float) for m in spec["varying"]]
        if len(mats) != prior.n_nodes:
            raise InvalidInput(f"varying weight table has {len(mats)} entries "
                               f"for {prior.n_nodes} prior nodes")
        lookup = {tuple(t): m for t, m in zip(prior.thetas, mats)}

        def weight_fn(theta: np.ndarray) -> np.ndarray:
            key = tuple(theta)
            if key not in lookup:
                raise InvalidInput(f"varying weight table has no entry at theta={theta}")
            return lookup[key]

        return VaryingWeight(weight_fn, prior.n_params)
    raise InvalidInput("weight must contain 'constant' or 'varying'")


def scenario_from_config(document: dict, name: str | None = None) -> Scenario:
    for key in ("model", "prior", "weight"):
        if key not in document:
            raise InvalidInput(f"config document is missing the {key!r} key")
    model, table_thetas = _build_model(document)
    prior = _build_prior(document, table_thetas)
    if table_thetas is not None:
        known = {tuple(t) for t in table_thetas}
        for t in prior.thetas:
            if tuple(t) not in known:
                raise InvalidInput(f"prior node theta={t} is absent from the model table")
    weight = _build_weight(document, prior)
    return Scenario(
        name=name or document.get("name", "config_scenario"),
        model=model, prior=prior, weight=weight,
        description=document.get("description", "loaded from config"),
    )


def load_scenario(path) -> tuple[Scenario, str]:
    """Load a scenario JSON file; returns (scenario, config digest)."""
    document = json.loads(Path(path).read_text())
    return scenario_from_config(document), config_hash(document)
