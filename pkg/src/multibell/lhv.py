"""Exact local-hidden-variable analysis by exhaustive deterministic enumeration."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import format_rational
from .bell import BellFunction, integer_weights, setting_bits

DEFAULT_BUDGET = 10**8
_CHUNK = 1 << 16


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class LhvReport:
    bound: Fraction
    spectrum: tuple[Fraction, ...]
    argmax_count: int
    strategies: int = 0
    argmax: tuple[tuple[int, int], ...] = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "bound": format_rational(self.bound),
            "spectrum": [format_rational(x) for x in self.spectrum],
            "argmax_count": self.argmax_count,
        }


def strategy_from_index(index: int, n: int, d: int) -> np.ndarray:
    """Odometer decoding: digits (A0, A1, B0, B1, ...), last digit fastest."""
    digits = []
    for _ in range(2 * n):
        digits.append(index % d)
        index //= d
    return np.array(digits[::-1], dtype=np.int64).reshape(n, 2)


def _selector(n: int) -> np.ndarray:
    """M[s, 2p + b] = 1 iff party p uses setting b in tuple s."""
    M = np.zeros((2**n, 2 * n), dtype=np.int64)
    for s in range(2**n):
        for p, b in enumerate(setting_bits(s, n)):
            M[s, 2 * p + b] = 1
    return M


def enumerate_values(W: np.ndarray, n: int, d: int, budget: int = DEFAULT_BUDGET):
    """Yield (start, values) chunks of integer strategy values sum_s W[s, t_s].

    W is an integer (2^n, d) weight table; chunks follow odometer order.
    """
    total = d ** (2 * n)
    if total > budget:
        raise BudgetExceeded(f"{total} strategies exceed the budget of {budget}")
    M = _selector(n)
    place = d ** np.arange(2 * n - 1, -1, -1, dtype=np.int64)
    rows = np.arange(2**n)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        digits = (idx[:, None] // place[None, :]) % d
        t = (digits @ M.T) % d
        yield start, W[rows[None, :], t].sum(axis=1)


def lhv_bound(f: BellFunction, budget: int = DEFAULT_BUDGET) -> LhvReport:
    W, den = integer_weights(f)
    best = None
    count = 0
    first_arg = None
    seen: set[int] = set()
    for start, vals in enumerate_values(W, f.n, f.d, budget):
        seen.update(np.unique(vals).tolist())
        m = int(vals.max())
        hits = np.flatnonzero(vals == m)
        if best is None or m > best:
            best, count, first_arg = m, len(hits), start + int(hits[0])
        elif m == best:
            count += len(hits)
    spectrum = tuple(sorted(Fraction(v, den) for v in seen))
    argmax = tuple(map(tuple, strategy_from_index(first_arg, f.n, f.d).tolist()))
    return LhvReport(Fraction(best, den), spectrum, count, f.d ** (2 * f.n), argmax)


def spectrum_matches(f: BellFunction, target, budget: int = DEFAULT_BUDGET) -> bool:
    target = sorted(set(Fraction(t) for t in target))
    if not target:
        return False
    return list(lhv_bound(f, budget).spectrum) == target


__all__ = [
    "BudgetExceeded",
    "DEFAULT_BUDGET",
    "LhvReport",
    "enumerate_values",
    "lhv_bound",
    "spectrum_matches",
    "strategy_from_index",
]
