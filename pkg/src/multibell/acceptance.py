"""The thirteen acceptance criteria as library calls.

Used by ``multibell repro`` and by tests/test_acceptance.py.  Each check
returns a :class:`Criterion` with a one-line detail string; nothing here
is loosened to make a known erratum pass.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import catalog
from .algebra import Coefficient, coeff_convolve, coeff_shift, outcome_vector
from .bell import (
    BellFunction,
    closed_form_restriction,
    forms_equivalent,
    iterate,
    mabk_function,
    parse_probability_form,
    restrict,
    to_probability_form,
)
from .lhv import lhv_bound
from .quantum import (
    coincidence_table,
    ghz_state,
    optimize_phases,
    oracle_coincidence,
    verify_projector_identity,
)
from .search import SearchConfig, run_search, verify_candidate
from .symmetry import canonical_form, invariant_certificate, orbit

CGLMP_VC3 = 0.6962  # independent optimization, tolerance 2e-3
I25_SPECTRUM = (Fraction(-3, 2), Fraction(-1, 4), Fraction(1))
I27_SPECTRUM = (Fraction(-4, 3), Fraction(-1, 6), Fraction(1))


@dataclass
class Criterion:
    number: int
    title: str
    ok: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] criterion {self.number:>2} {self.title}: {self.detail}"

    def to_json(self) -> dict:
        return {"number": self.number, "title": self.title, "ok": self.ok,
                "detail": self.detail, "seconds": round(self.seconds, 2)}


def _timed(number: int, title: str):
    def wrap(fn):
        def run(*args, **kw) -> Criterion:
            t0 = time.perf_counter()
            ok, detail = fn(*args, **kw)
            return Criterion(number, title, bool(ok), detail, time.perf_counter() - t0)
        run.__name__ = fn.__name__
        run.number = number
        return run
    return wrap


def _random_coefficient(rng, d: int, span: int = 6) -> Coefficient:
    return Coefficient.from_alpha(
        [Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, span + 1))) for _ in range(d)]
    )


def _random_function(rng, n: int, d: int) -> BellFunction:
    return BellFunction(n, d, tuple(_random_coefficient(rng, d) for _ in range(2**n)))


# ---------------------------------------------------------------- 1-3


@_timed(1, "outcome algebra")
def criterion_1(trials: int = 60, seed: int = 0):
    rng = np.random.default_rng(seed)
    bad = []
    for d in range(2, 12):
        V = np.array([outcome_vector(k, d).components for k in range(d)])
        G = V @ V.T
        want = np.full((d, d), -1 / (d - 1))
        np.fill_diagonal(want, 1.0)
        if np.abs(G - want).max() > 1e-12 or np.abs(V.sum(axis=0)).max() > 1e-12:
            bad.append(f"simplex d={d}")
        for a, b in itertools.product(range(d), repeat=2):
            if coeff_convolve(Coefficient.basis(a, d), Coefficient.basis(b, d)) != Coefficient.basis((a + b) % d, d):
                bad.append(f"composition d={d}")
                break
        one = Coefficient.basis(0, d)
        for _ in range(trials):
            x, y, z = (_random_coefficient(rng, d) for _ in range(3))
            c = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 6)))
            checks = (
                x * y == y * x,
                (x * y) * z == x * (y * z),
                x * (y + z) == x * y + x * z,
                x * one == x,
                Coefficient.from_alpha([a + c for a in x.alpha]) == x,
                sum(x.alpha, Fraction(0)) == 0,
                np.allclose((x + y).to_vector(), x.to_vector() + y.to_vector(), atol=1e-12),
                coeff_shift(x, 1) == x * Coefficient.basis(1, d),
            )
            if not all(checks):
                bad.append(f"ring d={d}")
                break
    return not bad, "ring axioms, gauge and simplex geometry for d=2..11" + (f"; failed {bad}" if bad else "")


@_timed(2, "iteration and restriction")
def criterion_2(samples: int = 100, seed: int = 0):
    rng = np.random.default_rng(seed)
    bad = 0
    for d in (3, 5, 7):
        for _ in range(samples):
            n = int(rng.integers(1, 3))
            f00, f01 = _random_function(rng, n, d), _random_function(rng, n, d)
            g = iterate(f00, f01)
            ok = restrict(g, 0, 0) == f00 and restrict(g, 0, 1) == f01
            ok &= all(closed_form_restriction(f00, f01, l) == restrict(g, 0, l) for l in range(d))
            ok &= iterate(restrict(g, 0, 0), restrict(g, 0, 1)) == g
            bad += not ok
    return bad == 0, f"{3 * samples} random seeds, d in (3,5,7), {bad} mismatches"


@_timed(3, "MABK recovery")
def criterion_3(restarts: int = 32):
    parts, ok = [], True
    for n in (3, 4):
        f = mabk_function(n)
        same = f == catalog.function(f"MABK_{n}")
        L = lhv_bound(f).bound
        ok &= same and L == catalog.get(f"MABK_{n}").expected_lhv
        parts.append(f"n={n} L={L}")
    rep = optimize_phases(mabk_function(3), restarts=restarts)
    ok &= abs(rep.vc - 0.5) <= 1e-4
    parts.append(f"vc(n=3)={rep.vc:.6f}")
    return ok, ", ".join(parts)


# ---------------------------------------------------------------- 4-8


def b2d_display(d: int) -> str:
    """The printed two-party coincidence inequality for general d, with its +1."""
    inner = "+".join(
        f"{k}*(P(A0+B0={k})+P(A0+B1={-k}))" for k in range(1, d)
    )
    second = "+".join(
        f"{k}*(P(A1+B0={-k})-P(A1+B1={-k}))" for k in range(1, d)
    )
    return f"-1/{d - 1}*({inner}) - 1/{d - 1}*({second}) + 1"


@_timed(4, "two-party family")
def criterion_4(restarts: int = 64):
    f = catalog.function("I_2_3")
    printed = parse_probability_form(b2d_display(3), 2, 3)
    pf = to_probability_form(f)
    form_ok = forms_equivalent(pf, printed) == 1 and pf.canonical().constant == printed.canonical().constant
    L = lhv_bound(f).bound
    ok = form_ok and L == 1
    parts = [f"form match={form_ok}", f"L={L}"]
    for d, target, tol in ((3, CGLMP_VC3, 2e-3), (5, 0.687157, 1e-4), (7, 0.683256, 1e-4)):
        vc = optimize_phases(catalog.function(f"I_2_{d}"), restarts=restarts).vc
        ok &= abs(vc - target) <= tol
        parts.append(f"vc(d={d})={vc:.6f}")
    return ok, ", ".join(parts)


@_timed(5, "(3,2,3) robust function")
def criterion_5(restarts: int = 64):
    f = catalog.function("I_3_3_1")
    L = lhv_bound(f).bound
    rep = optimize_phases(f, restarts=restarts)
    num_ok = L == 1 and abs(rep.nl_psi - 5 / 3) <= 1e-6 and abs(rep.vc - 0.6) <= 1e-4
    form = catalog.check_printed_form("I_3_3_5")
    detail = f"L={L}, NL={rep.nl_psi:.9f}, vc={rep.vc:.6f}, printed form of I_3_3_5: {form.detail}"
    return num_ok and form.ok, detail


@_timed(6, "(4,2,3) robust functions and search")
def criterion_6(restarts: int = 64, search: bool = True, workers: int = 1):
    ok, parts = True, []
    # bound and vc checks use the corrected coefficients of suspect entries
    fs = [catalog.function(f"I_4_3_{k}", corrected=True) for k in range(1, 5)]
    for k, f in enumerate(fs, 1):
        L = lhv_bound(f).bound
        rep = optimize_phases(f, restarts=restarts, L=L)
        good = L == 1 and abs(rep.nl_psi - 2) <= 1e-6 and abs(rep.vc - 0.5) <= 1e-4
        ok &= good
        parts.append(f"I_4_3_{k}: L={L} vc={rep.vc:.6f}")
    canon = [canonical_form(f).coeffs for f in fs]
    distinct = len(set(canon)) == 4
    ok &= distinct
    parts.append(f"pairwise inequivalent={distinct}")
    if search:
        res = run_search(SearchConfig("I_3_3_3", "I_3_3_3", 3, workers=workers))
        good = res.winner_count == 16 and abs(res.min_vc - 0.5) <= 1e-4
        ok &= good
        parts.append(f"search over {res.candidates_evaluated}: {res.winner_count} winners at vc={res.min_vc:.6f}")
    return ok, "; ".join(parts)


@_timed(7, "(5,2,3) spot check")
def criterion_7(restarts: int = 16, table_row: bool = False, workers: int = 1):
    ok, parts = True, []
    fs = {}
    for k in (1, 2):
        f = fs[k] = catalog.function(f"I_5_3_{k}", corrected=True)
        rep = verify_candidate(f, None, 0.488756, 2e-4, restarts=restarts)
        good = rep.lhv == 1 and rep.vc_ok
        ok &= good
        parts.append(f"I_5_3_{k}: L={rep.lhv} vc={rep.vc:.6f}")
    distinct = invariant_certificate(fs[1]) != invariant_certificate(fs[2])
    ok &= distinct
    parts.append(f"certificates differ={distinct}")
    if table_row:
        res = run_search(SearchConfig("I_4_3_1", "I_4_3_1", 3, workers=workers))
        good = res.winner_count == 12 and abs(res.min_vc - 0.488756) <= 2e-4
        ok &= good
        parts.append(f"I_4_3_1 x I_4_3_1 search: {res.winner_count} winners (raw {res.raw_winner_count}) at vc={res.min_vc:.6f}")
    return ok, "; ".join(parts)


@_timed(8, "(3,2,5) robust function")
def criterion_8(restarts: int = 64):
    f = catalog.function("I_3_5_1")
    rep = optimize_phases(f, restarts=restarts)
    vc_ok = abs(rep.vc - 0.595047) <= 1e-4
    form = catalog.check_printed_form("I_3_5_1")
    recipes = [catalog.check_recipe(t, r) for t in ("I_3_5_2", "I_3_5_3") for r in catalog.get(t).recipes]
    rec_ok = all(c.ok for c in recipes)
    failed = [c.target for c in recipes if not c.ok]
    detail = f"vc={rep.vc:.6f}, printed form match={form.ok}, recipes verified={rec_ok}"
    if failed:
        detail += f" (failing: {', '.join(failed)})"
    return vc_ok and form.ok and rec_ok, detail


# ---------------------------------------------------------------- 9-13


@_timed(9, "orbit sizes")
def criterion_9():
    sizes = {k: orbit(catalog.function(k)).size for k in ("I_2_3", "I_3_3_1", "I_3_5_1")}
    want = {"I_2_3": 54, "I_3_3_1": 648, "I_3_5_1": 1250}
    return sizes == want, ", ".join(f"{k}={v}" for k, v in sizes.items())


@_timed(10, "spectra")
def criterion_10(restarts: int = 32):
    ok, parts = True, []
    for key, spec in (("I_2_5", I25_SPECTRUM), ("I_2_7", I27_SPECTRUM)):
        got = lhv_bound(catalog.function(key)).spectrum
        ok &= got == spec
        parts.append(f"{key} {'ok' if got == spec else [str(x) for x in got]}")
    for key, spec, vc in (("I_2_5_2", I25_SPECTRUM, 0.687157), ("I_2_7_2", I27_SPECTRUM, 0.683256),
                          ("I_2_7_3", I27_SPECTRUM, 0.683256), ("I_2_7_4", I27_SPECTRUM, 0.683256)):
        rep = verify_candidate(catalog.function(key), spec, vc, 1e-4, restarts=restarts)
        ok &= rep.ok
        parts.append(f"{key} {'ok' if rep.ok else 'FAIL'} vc={rep.vc:.6f}")
    return ok, ", ".join(parts)


@_timed(11, "quantum closed form vs state vector")
def criterion_11(configs: int = 1000, seed: int = 0):
    rng = np.random.default_rng(seed)
    worst, norm = 0.0, 0.0
    for n, d in ((2, 3), (3, 3), (2, 5), (3, 5), (2, 7)):
        psi = ghz_state(n, d)
        for _ in range(configs):
            ph = rng.uniform(0, 2 * np.pi, size=(n, 2, d))
            s = int(rng.integers(2**n))
            closed = coincidence_table(ph)[s]
            worst = max(worst, float(np.abs(closed - oracle_coincidence(psi, ph, s)).max()))
            norm = max(norm, abs(closed.sum() - 1))
    return worst <= 1e-10 and norm <= 1e-12, f"max deviation {worst:.2e}, normalization error {norm:.2e}"


@_timed(12, "projector identity")
def criterion_12():
    res = {d: verify_projector_identity(d, trials=50, seed=d) for d in (2, 3, 5, 7)}
    return all(res.values()), ", ".join(f"d={d}:{'ok' if v else 'FAIL'}" for d, v in res.items())


@_timed(13, "catalog recipes")
def criterion_13():
    # suspect entries are excluded from exact-match acceptance but still listed
    checks = catalog.verify_recipes(corrected=False)
    failed = [c for c in checks if not c.ok]
    hard = [c.target for c in failed if not c.suspect]
    soft = [c.target for c in failed if c.suspect]
    listed = sorted(e.id for e in catalog.suspects())
    detail = (f"{len(checks) - len(failed)}/{len(checks)} printed recipes verify; "
              f"failing with a suspect entry involved: {', '.join(soft) or 'none'}; "
              f"failing otherwise: {', '.join(hard) or 'none'}; suspects listed: {', '.join(listed)}")
    return not hard, detail


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13)


def run_all(slow: bool = False, workers: int = 1, echo=None) -> list[Criterion]:
    out = []
    for fn in CRITERIA:
        if fn is criterion_6:
            r = fn(workers=workers)
        elif fn is criterion_7:
            r = fn(table_row=slow, workers=workers)
        else:
            r = fn()
        if echo:
            echo(r.line())
        out.append(r)
    return out


__all__ = ["CRITERIA", "Criterion", "b2d_display", "run_all"] + [f.__name__ for f in CRITERIA]
