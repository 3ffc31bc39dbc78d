"""Lexicase parent selection over an objective matrix (maximization)."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .errors import InvalidInput, OracleTooLarge
from .evo import as_generator
from .kernels import impl as _k

ORACLE_MAX_OBJECTIVES = 6
ORACLE_MAX_CANDIDATES = 8


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise InvalidInput(f"objective matrix must be non-empty 2-D, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise InvalidInput("objective matrix contains non-finite values")
    return np.ascontiguousarray(m)


def lexicase_select_parents(m, count: int, rng, epsilon: float = 0.0) -> np.ndarray:
    """Indices of ``count`` independent lexicase selections (with replacement).

    Each selection gets its own Fisher-Yates shuffle of the objectives and a
    uniform draw that picks among candidates still tied once the objectives
    run out. ``epsilon`` > 0 keeps candidates within epsilon of the pool's
    best; the default 0 is exact lexicase.
    """
    m = _as_matrix(m)
    if count < 1:
        raise InvalidInput(f"count must be >= 1, got {count}")
    gen = as_generator(rng)
    n = m.shape[1]
    perms = gen.permuted(np.tile(np.arange(n, dtype=np.int64), (count, 1)), axis=1)
    u = gen.random(count)
    return _k.lexicase_select(m, perms, u, float(epsilon))


def lexicase_select_one(m, rng, epsilon: float = 0.0) -> int:
    return int(lexicase_select_parents(m, 1, rng, epsilon)[0])


def selection_probability_oracle(m) -> np.ndarray:
    """Exact selection probabilities by enumerating every objective order.

    Accumulated as fractions, so symmetric cases come out exactly.
    """
    m = _as_matrix(m)
    p, n = m.shape
    if n > ORACLE_MAX_OBJECTIVES or p > ORACLE_MAX_CANDIDATES:
        raise OracleTooLarge(f"oracle limited to n <= {ORACLE_MAX_OBJECTIVES}, "
                             f"p <= {ORACLE_MAX_CANDIDATES}; got n={n}, p={p}")
    probs = [Fraction(0)] * p
    weight = Fraction(1, math.factorial(n))
    for order in itertools.permutations(range(n)):
        pool = list(range(p))
        for obj in order:
            best = max(m[c, obj] for c in pool)
            pool = [c for c in pool if m[c, obj] == best]
            if len(pool) == 1:
                break
        for c in pool:
            probs[c] += weight / len(pool)
    return np.array([float(q) for q in probs])
