"""HMM parameter container and the uniform exit-probability transition matrix.

All state labels visible to callers are 1-based (state space ``1..m``).
Probabilities are stored as natural logs; a zero probability is stored as
``-inf`` and never replaced by a finite sentinel.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

STOCHASTIC_TOL = 1e-9


class ModelError(ValueError):
    """Invalid model parameters."""


def gaussian_log_pdf(y, means, sigma: float) -> np.ndarray:
    """(m, n) matrix of ``log phi((y_k - means_i) / sigma) - log sigma``."""
    y = np.asarray(y, dtype=float)
    mu = np.asarray(means, dtype=float)[:, None]
    s2 = sigma * sigma
    return -0.5 * math.log(2.0 * math.pi * s2) - (y[None, :] - mu) ** 2 / (2.0 * s2)


@runtime_checkable
class EmissionProvider(Protocol):
    """Anything that maps observations to an (m, n) matrix of log-densities."""

    m: int

    def log_densities(self, y: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class GaussianEmission:
    """Normal emissions: state ``i`` has mean ``means[i-1]`` and common std ``sigma``."""

    means: tuple[float, ...]
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(float(v) for v in self.means))
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise ModelError(f"sigma must be a positive finite number, got {self.sigma}")
        if len(self.means) < 1:
            raise ModelError("at least one mean is required")

    @property
    def m(self) -> int:
        return len(self.means)

    def log_densities(self, y) -> np.ndarray:
        return gaussian_log_pdf(y, self.means, self.sigma)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HmmModel:
    m: int
    log_pi: np.ndarray
    log_trans: np.ndarray
    emission: EmissionProvider = field(repr=False)

    @property
    def pi(self) -> np.ndarray:
        return np.exp(self.log_pi)

    @property
    def trans(self) -> np.ndarray:
        return np.exp(self.log_trans)

    def log_densities(self, y) -> np.ndarray:
        """The (m, n) matrix ``g[i-1, k-1] = log f_i(y_k)``."""
        g = np.asarray(self.emission.log_densities(np.asarray(y)), dtype=float)
        if g.ndim != 2 or g.shape[0] != self.m:
            raise ModelError(f"emission returned shape {g.shape}, expected ({self.m}, n)")
        return g


def _log(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(a)


def build_model(pi: Sequence[float], trans, emission: EmissionProvider) -> HmmModel:
    """Validate probabilities and return a model holding their componentwise logs.

    Rows must sum to one within ``1e-9``; the stored logs are the exact logs of
    the inputs (no renormalisation).
    """
    pi = np.asarray(pi, dtype=float)
    trans = np.asarray(trans, dtype=float)
    if pi.ndim != 1:
        raise ModelError("pi must be a vector")
    m = pi.shape[0]
    if m < 2:
        raise ModelError(f"need at least 2 states, got m={m}")
    if trans.shape != (m, m):
        raise ModelError(f"trans has shape {trans.shape}, expected ({m}, {m})")
    em_m = getattr(emission, "m", m)
    if em_m != m:
        raise ModelError(f"emission provides {em_m} states, model has {m}")
    for name, a in (("pi", pi), ("trans", trans)):
        if not np.all(np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
            raise ModelError(f"{name} entries must lie in [0, 1]")
    if abs(pi.sum() - 1.0) > STOCHASTIC_TOL:
        raise ModelError(f"pi sums to {pi.sum()!r}, not 1")
    rows = trans.sum(axis=1)
    bad = np.flatnonzero(np.abs(rows - 1.0) > STOCHASTIC_TOL)
    if bad.size:
        raise ModelError(f"trans row {bad[0] + 1} sums to {rows[bad[0]]!r}, not 1")
    return HmmModel(m=m, log_pi=_frozen(_log(pi)), log_trans=_frozen(_log(trans)), emission=emission)


def exit_probability(n: int, s: int) -> float:
    """Per-step probability of leaving the current state so that ``s`` segments are expected."""
    if n < 2:
        raise ModelError(f"n must be >= 2, got {n}")
    if not 1 <= s <= n:
        raise ModelError("s exceeds n" if s > n else f"s must be >= 1, got {s}")
    return (s - 1) / (n - 1)


def uniform_transition(m: int, n: int, s: int) -> np.ndarray:
    """Transition matrix with diagonal ``1 - p`` and off-diagonal ``p / (m - 1)``, ``p = (s-1)/(n-1)``."""
    if m < 2:
        raise ModelError(f"m must be >= 2, got {m}")
    p = exit_probability(n, s)
    trans = np.full((m, m), p / (m - 1))
    # diagonal written last so every row is exactly 1 - p + (m-1) * p/(m-1)
    np.fill_diagonal(trans, 1.0 - p)
    return trans


def expected_segments(n: int, p: float) -> float:
    return 1.0 + (n - 1) * p


def benchmark_model(m: int, n: int, s: int, sigma: float) -> HmmModel:
    """Uniform initial law, uniform exit-probability chain, N(i, sigma^2) emissions."""
    return build_model(
        np.full(m, 1.0 / m),
        uniform_transition(m, n, s),
        GaussianEmission(means=tuple(range(1, m + 1)), sigma=sigma),
    )


# --- JSON model files ---------------------------------------------------------

def model_to_dict(model: HmmModel) -> dict:
    em = model.emission
    if not isinstance(em, GaussianEmission):
        raise ModelError("only gaussian emissions can be serialised")
    return {
        "m": model.m,
        "pi": model.pi.tolist(),
        "trans": model.trans.tolist(),
        "emission": {"type": "gaussian", "means": list(em.means), "sigma": em.sigma},
    }


def model_from_dict(d: dict) -> HmmModel:
    try:
        em = d["emission"]
        if em.get("type") != "gaussian":
            raise ModelError(f"unsupported emission type {em.get('type')!r}")
        model = build_model(d["pi"], d["trans"], GaussianEmission(means=em["means"], sigma=float(em["sigma"])))
        m = int(d["m"])
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model description: {exc}") from exc
    if m != model.m:
        raise ModelError(f"field m={m} disagrees with pi of length {model.m}")
    return model


def load_model(path) -> HmmModel:
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(d)


def save_model(model: HmmModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")
