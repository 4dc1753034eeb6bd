"""Independent reference computations used by the tests.

Nothing here touches the cumulative matrix: local likelihoods are summed
element by element from the raw log-densities, maximisations enumerate every
state tuple, and local maxima come from full scans.
"""
from __future__ import annotations

import math
from itertools import product

import numpy as np

from qats.model import GaussianEmission, build_model


def direct_local_loglik(model, g, l, r, path, x0=None):
    """Log local likelihood of ``path`` (states for positions l..r) given ``x0``.

    Entry term is ``log pi`` when ``l == 1`` and ``q[x0, x_l]`` otherwise.
    """
    q = model.log_trans
    assert len(path) == r - l + 1
    first = path[0] - 1
    total = model.log_pi[first] if l == 1 else q[x0 - 1, first]
    total += g[first, l - 1]
    for offset in range(1, len(path)):
        a, b = path[offset - 1] - 1, path[offset] - 1
        total += q[a, b] + g[b, l - 1 + offset]
    return float(total)


def piecewise(l, r, splits, states):
    """Expand states over l..r with pieces starting at each split."""
    bounds = [l, *splits, r + 1]
    out = []
    for (a, b), z in zip(zip(bounds, bounds[1:]), states):
        out.extend([z] * (b - a))
    return out


def exhaustive_h(model, g, l, r, splits, x0=None):
    """Best score over adjacent-distinct state tuples for fixed split positions."""
    m = model.m
    c = len(splits) + 1
    best, arg = -math.inf, None
    for states in product(range(1, m + 1), repeat=c):
        if any(a == b for a, b in zip(states, states[1:])):
            continue
        v = direct_local_loglik(model, g, l, r, piecewise(l, r, splits, states), x0)
        if arg is None or v > best:
            best, arg = v, states
    return arg, best


def prefix_sums(g):
    m, n = g.shape
    G = np.zeros((m, n))
    for i in range(m):
        acc = 0.0
        for k in range(n):
            acc += g[i, k]
            G[i, k] = acc
    return G


def local_maxima(values, lo):
    """Indices (offset by ``lo``) whose value is >= both in-range neighbours."""
    out = []
    n = len(values)
    for j, v in enumerate(values):
        if (j == 0 or v >= values[j - 1]) and (j == n - 1 or v >= values[j + 1]):
            out.append(lo + j)
    return out


def random_model(rng, m, sigma=1.0, zero_frac=0.0, spread=1.0):
    """Dirichlet rows; with ``zero_frac`` some off-diagonal and initial entries are zeroed."""
    trans = rng.dirichlet(np.ones(m), size=m)
    pi = rng.dirichlet(np.ones(m))
    if zero_frac:
        mask = rng.random((m, m)) < zero_frac
        np.fill_diagonal(mask, False)
        trans = np.where(mask, 0.0, trans)
        trans[np.arange(m), np.arange(m)] += 0.05
        trans /= trans.sum(axis=1, keepdims=True)
        pi_mask = rng.random(m) < zero_frac
        pi_mask[rng.integers(m)] = False
        pi = np.where(pi_mask, 0.0, pi)
        pi /= pi.sum()
    means = tuple(spread * np.arange(1, m + 1))
    return build_model(pi, trans, GaussianEmission(means=means, sigma=sigma))


def two_state_ideal(x_true, eps, sigma, rng):
    """Two states, uniform start, symmetric flip probability ``eps``, y = x + small noise."""
    model = build_model([0.5, 0.5], [[1 - eps, eps], [eps, 1 - eps]],
                        GaussianEmission(means=(1.0, 2.0), sigma=sigma))
    y = np.asarray(x_true, dtype=float) + sigma * rng.standard_normal(len(x_true))
    return model, y


def path_from_changes(n, changes, first=1):
    """Alternating two-state path of length n switching at each 1-based index in ``changes``."""
    x = np.empty(n, dtype=np.int64)
    state, prev = first, 1
    for c in [*changes, n + 1]:
        x[prev - 1:c - 1] = state
        state = 3 - state
        prev = c
    return x
