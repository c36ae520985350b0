"""Archive of the printed Bell functions and the recipes that link them.

Entries live in ``data/catalog.json``.  Coefficients are stored exactly as
printed.  Where the printed data are internally inconsistent the entry is
flagged transcription-suspect, and a corrected function is stored next to it
together with the checks that pin the correction down.  Nothing is patched in
place, so every verification can be run against either version.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .algebra import Coefficient, format_rational, parse_rational
from .bell import (
    BellFunction,
    ProbabilityForm,
    forms_equivalent,
    iterate,
    parse_probability_form,
    restrict,
    setting_key,
    to_probability_form,
)
from .lhv import DEFAULT_BUDGET, lhv_bound
from .symmetry import apply, parse_recipe


@dataclass(frozen=True)
class Recipe:
    source: str
    rule: str
    erratum: dict | None = None  # {"source", "rule", "reason"} that does verify

    def to_json(self) -> dict:
        out = {"source": self.source, "rule": self.rule}
        if self.erratum:
            out["erratum"] = dict(self.erratum)
        return out


@dataclass(frozen=True)
class PrintedForm:
    text: str
    bound: Fraction
    notes: tuple[str, ...] = ()
    suspect: str | None = None

    def parse(self, n: int, d: int) -> ProbabilityForm:
        return parse_probability_form(self.text, n, d)


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    function: BellFunction
    provenance: str
    expected_lhv: Fraction | None = None
    expected_vc: float | None = None
    expected_nl_psi: Fraction | None = None
    expected_spectrum: tuple[Fraction, ...] | None = None
    expected_orbit_size: int | None = None
    recipes: tuple[Recipe, ...] = ()
    construction: dict | None = None
    restrictions: dict = field(default_factory=dict)
    printed_form: PrintedForm | None = None
    suspect: str | None = None
    corrected: BellFunction | None = None
    aliases: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.function.n

    @property
    def d(self) -> int:
        return self.function.d

    @property
    def best(self) -> BellFunction:
        """The corrected function when one exists, otherwise the printed one."""
        return self.corrected if self.corrected is not None else self.function

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "n": self.n,
            "d": self.d,
            "coeffs": _coeff_strings(self.function),
            "provenance": self.provenance,
        }
        exp = {}
        if self.expected_lhv is not None:
            exp["lhv"] = format_rational(self.expected_lhv)
        if self.expected_vc is not None:
            exp["vc"] = self.expected_vc
        if self.expected_nl_psi is not None:
            exp["nl_psi"] = format_rational(self.expected_nl_psi)
        if self.expected_spectrum is not None:
            exp["spectrum"] = [format_rational(x) for x in self.expected_spectrum]
        if self.expected_orbit_size is not None:
            exp["orbit_size"] = self.expected_orbit_size
        if exp:
            out["expected"] = exp
        if self.recipes:
            out["recipes"] = [r.to_json() for r in self.recipes]
        if self.construction:
            out["construction"] = dict(self.construction)
        if self.restrictions:
            out["restrictions"] = dict(self.restrictions)
        if self.printed_form is not None:
            pf = {"text": self.printed_form.text, "bound": format_rational(self.printed_form.bound)}
            if self.printed_form.notes:
                pf["notes"] = list(self.printed_form.notes)
            if self.printed_form.suspect:
                pf["suspect"] = self.printed_form.suspect
            out["printed_form"] = pf
        if self.suspect:
            out["suspect"] = {"reason": self.suspect}
            if self.corrected is not None:
                out["suspect"]["corrected_coeffs"] = _coeff_strings(self.corrected)
        if self.aliases:
            out["aliases"] = list(self.aliases)
        return out


def _coeff_strings(f: BellFunction) -> dict:
    return {setting_key(i, f.n): str(c) for i, c in enumerate(f.coeffs)}


def _entry_from_json(raw: dict) -> CatalogEntry:
    n, d = int(raw["n"]), int(raw["d"])
    f = BellFunction.from_mapping(n, d, raw["coeffs"])
    exp = raw.get("expected", {})
    pf = None
    if "printed_form" in raw:
        p = raw["printed_form"]
        pf = PrintedForm(p["text"], parse_rational(p["bound"]), tuple(p.get("notes", ())), p.get("suspect"))
    corrected = None
    suspect = None
    if "suspect" in raw:
        suspect = raw["suspect"]["reason"]
        if "corrected_coeffs" in raw["suspect"]:
            corrected = BellFunction.from_mapping(n, d, raw["suspect"]["corrected_coeffs"])
    return CatalogEntry(
        id=raw["id"],
        function=f,
        provenance=raw.get("provenance", ""),
        expected_lhv=parse_rational(exp["lhv"]) if "lhv" in exp else None,
        expected_vc=float(exp["vc"]) if "vc" in exp else None,
        expected_nl_psi=parse_rational(exp["nl_psi"]) if "nl_psi" in exp else None,
        expected_spectrum=tuple(parse_rational(x) for x in exp["spectrum"]) if "spectrum" in exp else None,
        expected_orbit_size=exp.get("orbit_size"),
        recipes=tuple(Recipe(r["source"], r["rule"], r.get("erratum")) for r in raw.get("recipes", ())),
        construction=raw.get("construction"),
        restrictions=dict(raw.get("restrictions", {})),
        printed_form=pf,
        suspect=suspect,
        corrected=corrected,
        aliases=tuple(raw.get("aliases", ())),
    )


@lru_cache(maxsize=1)
def _load() -> tuple[CatalogEntry, ...]:
    text = resources.files("multibell").joinpath("data/catalog.json").read_text()
    data = json.loads(text)
    entries = tuple(_entry_from_json(e) for e in data["entries"])
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate catalog ids")
    return entries


def load_catalog() -> list[CatalogEntry]:
    return list(_load())


def ids() -> list[str]:
    return [e.id for e in _load()]


def get(entry_id: str) -> CatalogEntry:
    for e in _load():
        if e.id == entry_id or entry_id in e.aliases:
            return e
    raise KeyError(f"unknown catalog id {entry_id!r}")


def function(entry_id: str, corrected: bool = False) -> BellFunction:
    e = get(entry_id)
    return e.best if corrected else e.function


def suspects() -> list[CatalogEntry]:
    return [e for e in _load() if e.suspect]


def catalog_json() -> dict:
    return {"version": 1, "entries": [e.to_json() for e in _load()]}


# ---------------------------------------------------------------- checks


@dataclass(frozen=True)
class Check:
    kind: str
    target: str
    ok: bool
    detail: str = ""
    suspect: bool = False  # a transcription-suspect entry is involved

    def to_json(self) -> dict:
        return {"kind": self.kind, "target": self.target, "ok": self.ok,
                "suspect": self.suspect, "detail": self.detail}


def _fn(entry_id: str, corrected: bool) -> BellFunction:
    return function(entry_id, corrected)


def check_recipe(target: str, recipe: Recipe, corrected: bool = False) -> Check:
    e = get(target)
    src = get(recipe.source)
    g = parse_recipe(recipe.rule, e.n, e.d)
    ok = apply(g, _fn(recipe.source, corrected)) == _fn(target, corrected)
    involved = bool(e.suspect or src.suspect)
    return Check("recipe", target, ok, f"{recipe.source} /. {recipe.rule}", involved)


def check_erratum(target: str, recipe: Recipe, corrected: bool = True) -> Check | None:
    if not recipe.erratum:
        return None
    alt = Recipe(recipe.erratum.get("source", recipe.source), recipe.erratum.get("rule", recipe.rule))
    c = check_recipe(target, alt, corrected)
    return Check("erratum", target, c.ok, c.detail + " | " + recipe.erratum.get("reason", ""), True)


def verify_recipes(corrected: bool = False) -> list[Check]:
    """Apply every stored recipe to its source and compare with the target exactly."""
    return [check_recipe(e.id, r, corrected) for e in _load() for r in e.recipes]


def verify_constructions(corrected: bool = False) -> list[Check]:
    out = []
    for e in _load():
        c = e.construction
        if not c or c.get("op") != "iterate":
            continue
        built = iterate(_fn(c["f00"], corrected), _fn(c["f01"], corrected))
        involved = any(get(x).suspect for x in (e.id, c["f00"], c["f01"]))
        out.append(Check("iterate", e.id, built == _fn(e.id, corrected),
                         f"iterate({c['f00']}, {c['f01']})", involved))
    return out


def verify_restrictions(corrected: bool = False) -> list[Check]:
    out = []
    for e in _load():
        for key, tgt in e.restrictions.items():
            k0, k1 = (int(x) for x in key.split(","))
            ok = restrict(_fn(e.id, corrected), k0, k1) == _fn(tgt, corrected)
            involved = bool(e.suspect or get(tgt).suspect)
            out.append(Check("restrict", e.id, ok, f"restrict({e.id}, {k0}, {k1}) == {tgt}", involved))
    return out


def form_function(form: ProbabilityForm) -> tuple[BellFunction, Fraction]:
    """Invert the first-component rule: a function g and constant c with form == g + c."""
    q = form.canonical()
    n, d = q.n, q.d
    scale = Fraction(d - 1, d)
    coeffs = {
        setting_key(s, n): Coefficient.from_alpha([scale * q.weights[s][(-m) % d] for m in range(d)])
        for s in range(2**n)
    }
    return BellFunction.from_mapping(n, d, coeffs), q.constant


def printed_form_bound(form: ProbabilityForm, budget: int = DEFAULT_BUDGET) -> Fraction:
    """Exact LHV maximum of a printed coincidence expression, constant included."""
    g, c = form_function(form)
    return lhv_bound(g, budget).bound + c


def check_printed_form(entry_id: str, corrected: bool = False) -> Check | None:
    """Printed display vs the stored function: proportional linear parts and a consistent bound."""
    e = get(entry_id)
    if e.printed_form is None:
        return None
    p = e.printed_form.parse(e.n, e.d)
    ratio = forms_equivalent(p, to_probability_form(_fn(entry_id, corrected)))
    bound = printed_form_bound(p)
    ok = ratio is not None and bound == e.printed_form.bound
    detail = f"ratio={ratio} printed-bound={e.printed_form.bound} computed-bound={bound}"
    return Check("form", entry_id, ok, detail, bool(e.suspect or e.printed_form.suspect))


def verify_printed_forms(corrected: bool = False) -> list[Check]:
    out = []
    for e in _load():
        c = check_printed_form(e.id, corrected)
        if c is not None:
            out.append(c)
    return out


def verify_bounds(corrected: bool = True, budget: int = DEFAULT_BUDGET) -> list[Check]:
    out = []
    for e in _load():
        if e.expected_lhv is None or e.d ** (2 * e.n) > budget:
            continue
        got = lhv_bound(_fn(e.id, corrected), budget)
        ok = got.bound == e.expected_lhv
        if e.expected_spectrum is not None:
            ok = ok and tuple(got.spectrum) == tuple(e.expected_spectrum)
        out.append(Check("lhv", e.id, ok, f"L={got.bound} expected={e.expected_lhv}", bool(e.suspect)))
    return out


def verify_all(corrected: bool = False) -> list[Check]:
    checks = []
    checks += verify_recipes(corrected)
    checks += verify_constructions(corrected)
    checks += verify_restrictions(corrected)
    checks += verify_printed_forms(corrected)
    checks += verify_bounds(corrected)
    if corrected:
        for e in _load():
            for r in e.recipes:
                c = check_erratum(e.id, r)
                if c is not None:
                    checks.append(c)
    return checks


__all__ = [
    "CatalogEntry",
    "Check",
    "PrintedForm",
    "Recipe",
    "catalog_json",
    "check_erratum",
    "check_printed_form",
    "check_recipe",
    "form_function",
    "function",
    "get",
    "ids",
    "load_catalog",
    "printed_form_bound",
    "suspects",
    "verify_all",
    "verify_bounds",
    "verify_constructions",
    "verify_printed_forms",
    "verify_recipes",
    "verify_restrictions",
]
