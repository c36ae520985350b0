"""Orbit search for the most robust iterated Bell functions.

Fix an (n-1)-party seed as I^{0,0}, run I^{0,1} over the equivalence orbit
of a source function, build iterate(seed, g) for every orbit element and
score each candidate by its critical visibility on the noisy GHZ state.

Every candidate is optimized with a small restart budget.  Those within a
screening window of the provisional minimum get a second, larger pass
before the final tie threshold is applied.
"""

from __future__ import annotations

import logging
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import catalog
from .algebra import format_rational, is_prime
from .bell import BellFunction, integer_weights, iterate
from .lhv import DEFAULT_BUDGET as LHV_BUDGET
from .lhv import BudgetExceeded, _selector, lhv_bound
from .quantum import critical_visibility, maximize_value, white_noise_value
from .symmetry import DEFAULT_BUDGET as ORBIT_BUDGET
from .symmetry import orbit_members

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchConfig:
    seed00: str | BellFunction
    orbit_source: str | BellFunction
    d: int
    restarts: int = 16
    refine_restarts: int = 64
    tol: float = 1e-9
    seed: int = 0
    vc_tie_tolerance: float = 1e-6
    # candidates this close to the provisional minimum are re-optimized
    screen_window: float = 5e-3
    workers: int = 1
    corrected: bool = True
    orbit_budget: int = ORBIT_BUDGET
    lhv_budget: int = LHV_BUDGET

    def __post_init__(self):
        if not is_prime(self.d):
            raise ValueError(f"d must be prime, got {self.d}")
        if not self.vc_tie_tolerance > 0:
            raise ValueError("tie tolerance must be positive")
        if self.restarts < 1 or self.refine_restarts < 0:
            raise ValueError("restart counts must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class Candidate:
    index: int
    function: BellFunction
    vc: float
    lhv: Fraction
    nl_psi: float
    nl_mix: float
    refined: bool = False

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "vc": self.vc,
            "lhv": format_rational(self.lhv),
            "lhv_decimal": float(self.lhv),
            "nl_psi": self.nl_psi,
            "nl_mix": self.nl_mix,
            "refined": self.refined,
            "function": self.function.to_json(),
        }


@dataclass
class SearchResult:
    candidates_evaluated: int
    min_vc: float
    winners: list[Candidate]
    raw_winner_count: int
    histogram: dict[str, int]
    refined: int
    wall_time: float = field(default=0.0, compare=False)
    partial: bool = False

    @property
    def winner_count(self) -> int:
        return len(self.winners)

    def to_json(self, with_functions: bool = True) -> dict:
        out = {
            "candidates_evaluated": self.candidates_evaluated,
            "min_vc": self.min_vc,
            "winners_raw": self.raw_winner_count,
            "winners_dedup": self.winner_count,
            "refined": self.refined,
            "histogram": self.histogram,
            "partial": self.partial,
            "wall_time": round(self.wall_time, 3),
        }
        if with_functions:
            out["winners"] = [w.to_json() for w in self.winners]
        else:
            out["winners"] = [{k: v for k, v in w.to_json().items() if k != "function"}
                              for w in self.winners]
        return out


# ---------------------------------------------------------------- fast exact LHV


class StrategyTable:
    """Precomputed residues t[strategy, s] for batched exact LHV bounds.

    Holding the full table costs d^(2n) * 2^n bytes, which is fine up to
    (5, 3) and (3, 5).  The bound of any function with the same (n, d) is
    then a single gather and row sum.
    """

    def __init__(self, n: int, d: int, budget: int = LHV_BUDGET):
        total = d ** (2 * n)
        if total > budget:
            raise BudgetExceeded(f"{total} strategies exceed the budget of {budget}")
        self.n, self.d = n, d
        place = d ** np.arange(2 * n - 1, -1, -1, dtype=np.int64)
        digits = (np.arange(total, dtype=np.int64)[:, None] // place[None, :]) % d
        t = (digits @ _selector(n).T) % d
        # flat index into W.ravel()
        self.flat = (t + d * np.arange(2**n)[None, :]).astype(np.int32)

    def values(self, f: BellFunction) -> tuple[np.ndarray, int]:
        W, den = integer_weights(f)
        return W.ravel()[self.flat].sum(axis=1), den

    def bound(self, f: BellFunction) -> Fraction:
        vals, den = self.values(f)
        return Fraction(int(vals.max()), den)

    def spectrum(self, f: BellFunction) -> tuple[Fraction, ...]:
        vals, den = self.values(f)
        return tuple(sorted(Fraction(int(v), den) for v in np.unique(vals)))


# ---------------------------------------------------------------- scoring


def _resolve(ref, corrected: bool) -> BellFunction:
    if isinstance(ref, BellFunction):
        return ref
    return catalog.function(ref, corrected=corrected)


def score(f: BellFunction, L: Fraction, restarts: int, tol: float, seed: int):
    """(vc, nl_psi, nl_mix, converged restarts) for a candidate with known L."""
    best, _, _, conv = maximize_value(f, restarts=restarts, tol=tol, seed=seed)
    mix = white_noise_value(f)
    vc, _ = critical_visibility(L, best, mix)
    return vc, best, mix, conv


_WORKER: dict = {}


def _init_worker(n: int, d: int, budget: int) -> None:
    _WORKER["table"] = StrategyTable(n, d, budget)


def _evaluate(job):
    index, f, restarts, tol, seed = job
    table = _WORKER.get("table")
    if table is None or (table.n, table.d) != (f.n, f.d):
        table = _WORKER["table"] = StrategyTable(f.n, f.d)
    L = table.bound(f)
    vc, nl, mix, conv = score(f, L, restarts, tol, seed)
    return index, vc, L, nl, mix, conv


def _candidate_seed(base: int, index: int, refine: bool) -> int:
    return base * 1_000_003 + 2 * index + int(refine)


def _map(jobs, cfg: SearchConfig, n: int):
    if cfg.workers == 1 or len(jobs) < 2:
        _init_worker(n, cfg.d, cfg.lhv_budget)
        return [_evaluate(j) for j in jobs]
    with ProcessPoolExecutor(cfg.workers, initializer=_init_worker,
                             initargs=(n, cfg.d, cfg.lhv_budget)) as ex:
        return list(ex.map(_evaluate, jobs, chunksize=max(1, len(jobs) // (8 * cfg.workers))))


def vc_histogram(vcs, decimals: int = 4) -> dict[str, int]:
    counts = Counter(f"{v:.{decimals}f}" for v in vcs)
    return dict(sorted(counts.items()))


def run_search(cfg: SearchConfig, progress: bool = False) -> SearchResult:
    t0 = time.perf_counter()
    f00 = _resolve(cfg.seed00, cfg.corrected)
    src = _resolve(cfg.orbit_source, cfg.corrected)
    if f00.d != cfg.d or src.d != cfg.d:
        raise ValueError(f"seed functions have d={f00.d},{src.d}, config says d={cfg.d}")
    if f00.n != src.n:
        raise ValueError("seed00 and orbit source must have the same number of parties")

    members = orbit_members(src, cfg.orbit_budget)
    cands = [iterate(f00, g) for g in members]
    n = f00.n + 1
    log.info("searching %d candidates for (%d,2,%d)", len(cands), n, cfg.d)

    jobs = [(i, f, cfg.restarts, cfg.tol, _candidate_seed(cfg.seed, i, False))
            for i, f in enumerate(cands)]
    rows = {r[0]: r for r in _map(jobs, cfg, n)}
    refined = set()

    if cfg.refine_restarts:
        provisional = min(r[1] for r in rows.values())
        pool = sorted(i for i, r in rows.items() if r[1] <= provisional + cfg.screen_window)
        jobs = [(i, cands[i], cfg.refine_restarts, cfg.tol, _candidate_seed(cfg.seed, i, True))
                for i in pool]
        for r in _map(jobs, cfg, n):
            i = r[0]
            refined.add(i)
            # keep the larger GHZ value of the two passes
            if r[3] > rows[i][3]:
                rows[i] = r

    ordered = [rows[i] for i in range(len(cands))]
    min_vc = min(r[1] for r in ordered)
    raw = [r for r in ordered if r[1] <= min_vc + cfg.vc_tie_tolerance]
    winners, seen = [], set()
    for i, vc, L, nl, mix, _ in raw:
        f = cands[i]
        if f.coeffs in seen:
            continue
        seen.add(f.coeffs)
        winners.append(Candidate(i, f, vc, L, nl, mix, i in refined))
    partial = any(r[5] == 0 for r in ordered)
    return SearchResult(
        candidates_evaluated=len(cands),
        min_vc=min_vc,
        winners=winners,
        raw_winner_count=len(raw),
        histogram=vc_histogram(r[1] for r in ordered),
        refined=len(refined),
        wall_time=time.perf_counter() - t0,
        partial=partial,
    )


# ---------------------------------------------------------------- candidate verification


@dataclass
class CandidateReport:
    spectrum: tuple[Fraction, ...]
    expected_spectrum: tuple[Fraction, ...]
    spectrum_ok: bool
    lhv: Fraction
    vc: float
    expected_vc: float
    vc_ok: bool
    nl_psi: float

    @property
    def ok(self) -> bool:
        return self.spectrum_ok and self.vc_ok

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "spectrum": [format_rational(x) for x in self.spectrum],
            "expected_spectrum": [format_rational(x) for x in self.expected_spectrum],
            "spectrum_ok": self.spectrum_ok,
            "lhv": format_rational(self.lhv),
            "lhv_decimal": float(self.lhv),
            "vc": self.vc,
            "expected_vc": self.expected_vc,
            "vc_ok": self.vc_ok,
            "nl_psi": self.nl_psi,
        }


def verify_candidate(
    f: BellFunction,
    expected_spectrum,
    expected_vc: float,
    tol: float = 1e-4,
    restarts: int = 32,
    seed: int = 0,
    budget: int = LHV_BUDGET,
) -> CandidateReport:
    """Exact spectrum comparison plus optimized vc within tol.

    Pass expected_spectrum=None to skip the spectrum comparison and only
    require the maximum to be the LHV bound used for vc.
    """
    rep = lhv_bound(f, budget)
    if expected_spectrum is None:
        target = rep.spectrum
    else:
        target = tuple(sorted(set(Fraction(x) for x in expected_spectrum)))
    vc, nl, _, _ = score(f, rep.bound, restarts, 1e-9, seed)
    return CandidateReport(
        spectrum=rep.spectrum,
        expected_spectrum=target,
        spectrum_ok=rep.spectrum == target,
        lhv=rep.bound,
        vc=vc,
        expected_vc=float(expected_vc),
        vc_ok=abs(vc - float(expected_vc)) <= tol,
        nl_psi=nl,
    )


def default_workers() -> int:
    return os.cpu_count() or 1


__all__ = [
    "Candidate",
    "CandidateReport",
    "SearchConfig",
    "SearchResult",
    "StrategyTable",
    "default_workers",
    "run_search",
    "score",
    "verify_candidate",
    "vc_histogram",
]
