"""Bundled example models and their expected-term tables."""

import json
from dataclasses import dataclass
from importlib import resources

from .contraction import OutputSignature, in_span, reduce_basis_mixed
from .modelfile import parse_model
from .notation import Expression
from .pipeline import enumerate_component

FIXTURES = ("vectorkg4", "scalargrad4", "vectorkg4-tensorxi")


def _read(name):
    return resources.files("wickgen").joinpath("fixtures", name).read_text(encoding="utf-8")


def fixture_model(name):
    return parse_model(_read(name + ".model"), name + ".model")


def fixture_model_path(name):
    return resources.files("wickgen").joinpath("fixtures", name + ".model")


def expected_terms(name):
    return json.loads(_read(name + ".expected.json"))


@dataclass
class FixtureCheck:
    name: str
    passed: bool
    detail: str


def expressions(m, comp, entries=None):
    sig = OutputSignature.for_component(m, tuple(comp["Q"]))
    rows = comp["terms"] if entries is None else entries
    return [Expression(r["notation"], m, comp["output_letters"], sig, r.get("label", "")) for r in rows]


def _has_background_derivative(t):
    return any(b.kind == "background" and b.nderiv > 0 for b in t.monomial.all_blocks)


def check_component(m, comp, samples=5, seed=0, marginal_cap=None):
    """Compare one enumerated component with its expected table; returns a list of checks."""
    q = tuple(comp["Q"])
    tag = "Q=(%s)" % ",".join(map(str, q))
    cap = marginal_cap if marginal_cap is not None else comp.get("marginal_cap", "auto")
    res = enumerate_component(m, q, cap, samples, seed)
    marginal = bool(m.marginal_backgrounds)
    exprs = expressions(m, comp)
    inside = in_span(res.terms, exprs, marginal_mode=marginal, samples=samples, seed=seed)
    missing = [e.label for e, ok in zip(exprs, inside) if not ok]
    out = []
    if comp["comparison"] == "exact":
        n = comp["expected_count"]
        out.append(FixtureCheck("%s basis size" % tag, len(res.terms) == n,
                                "enumerated %d, expected %d" % (len(res.terms), n)))
        piv = reduce_basis_mixed(exprs, marginal_mode=marginal, samples=samples, seed=seed)
        out.append(FixtureCheck("%s listed terms independent" % tag, len(piv) == len(exprs),
                                "rank %d of %d" % (len(piv), len(exprs))))
    out.append(FixtureCheck("%s listed terms in span" % tag, not missing,
                            "missing: %s" % ", ".join(missing) if missing else "%d contained" % len(exprs)))
    if "constant_background" in comp:
        labels = set(comp["constant_background"])
        sub = [e for e in exprs if e.label in labels]
        const = [t for t in res.terms if not _has_background_derivative(t)]
        ok = len(const) == len(sub) and all(in_span(const, sub, samples=samples, seed=seed))
        out.append(FixtureCheck("%s constant-background truncation" % tag, ok,
                                "%d terms without background derivatives: %s"
                                % (len(const), "; ".join(t.display for t in const))))
    if "rejected_in_marginal_mode" in comp:
        w = expressions(m, comp, comp["rejected_in_marginal_mode"])
        mod = in_span(res.terms, w, marginal_mode=True, samples=samples, seed=seed)
        lin = in_span(res.terms, w, marginal_mode=False, samples=samples, seed=seed)
        ok = all(mod) and not any(lin)
        out.append(FixtureCheck("%s invariant multiples rejected" % tag, ok,
                                "module span %s, linear span %s" % (mod, lin)))
    return res, out


def check_fixture(name, samples=5, seed=0, marginal_cap=None):
    m = fixture_model(name)
    exp = expected_terms(name)
    checks = []
    for comp in exp["components"]:
        _, c = check_component(m, comp, samples, seed, marginal_cap)
        checks.extend(FixtureCheck("%s %s" % (name, x.name), x.passed, x.detail) for x in c)
    return checks
