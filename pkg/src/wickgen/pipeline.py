"""End-to-end enumeration of one coefficient component and its report form."""

import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .contraction import OutputSignature, enumerate_schemes, module_redundant, reduce_basis
from .generators import enumerate_monomials
from .scaling import physical_degree, target_weight

REPORT_VERSION = "1"


@dataclass
class ComponentResult:
    q: tuple
    weight: Fraction
    degree: Fraction
    monomials: int = 0
    candidates: int = 0
    terms: list = field(default_factory=list)
    witness: dict = field(default_factory=dict)
    marginal_cap: int = 0
    saturated: bool = True
    ceiling_hit: bool = False
    depths: list = field(default_factory=list)
    elapsed: float = 0.0


def components_of_order(m, k):
    """All multi-indices Q with |Q| = k, in lexicographic order (largest first)."""
    qs = [q for q in product(range(k + 1), repeat=len(m.multiplet)) if sum(q) == k]
    return sorted(qs, reverse=True)


def _candidates(m, q, sig, cap):
    monos = enumerate_monomials(m, q, cap)
    terms = []
    for mono in monos:
        for t in enumerate_schemes(mono, sig, m.oriented, m.dim):
            if not (mono.marginal_blocks and module_redundant(t)):
                terms.append(t)
    return monos, terms


def enumerate_component(m, q, marginal_cap="auto", samples=5, seed=0):
    """Reduced basis of the coefficient component Q.

    ``marginal_cap`` is an integer or ``"auto"``. Auto mode deepens the cap
    until two consecutive depths leave the basis size unchanged, stopping
    at the dimension; ``ceiling_hit`` records a stop before stabilization.
    """
    start = time.perf_counter()
    q = tuple(int(x) for x in q)
    w = target_weight(m, q)
    res = ComponentResult(q, w, physical_degree(m, q))
    if w < 0:
        res.elapsed = time.perf_counter() - start
        return res
    sig = OutputSignature.for_component(m, q)
    marginal = bool(m.marginal_backgrounds)

    def reduce(terms):
        return reduce_basis(terms, marginal_mode=marginal, samples=samples, seed=seed)

    if marginal_cap != "auto":
        cap = int(marginal_cap)
        if cap < 0:
            raise ValueError("marginal cap must be non-negative")
        monos, terms = _candidates(m, q, sig, cap)
        basis = reduce(terms)
        res.depths = [{"cap": cap, "candidates": len(terms), "kept": len(basis)}]
    else:
        cap, stable = 0, 0
        monos, terms = _candidates(m, q, sig, 0)
        basis = reduce(terms)
        res.depths = [{"cap": 0, "candidates": len(terms), "kept": len(basis)}]
        while marginal and stable < 2 and cap < m.dim:
            cap += 1
            nm, nt = _candidates(m, q, sig, cap)
            # a depth whose monomials are all pruned adds no candidates
            nb = reduce(nt) if len(nt) > len(terms) else basis
            res.depths.append({"cap": cap, "candidates": len(nt), "kept": len(nb)})
            stable = stable + 1 if len(nb) == len(basis) else 0
            monos, terms, basis = nm, nt, nb
        res.saturated = stable >= 2 or not marginal
        res.ceiling_hit = not res.saturated
    res.marginal_cap = cap
    res.monomials = len(monos)
    res.candidates = len(terms)
    res.terms = list(basis.terms)
    res.witness = basis.witness
    res.elapsed = time.perf_counter() - start
    return res


# ---------------------------------------------------------------------------
# serialization


def model_digest(m):
    from .modelfile import model_to_dict

    canon = json.dumps(model_to_dict(m), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    return x


def component_dict(res, timing=False):
    d = {
        "Q": list(res.q),
        "W": str(res.weight),
        "physical_degree": str(res.degree),
        "empty": not res.terms,
        "monomial_count": res.monomials,
        "candidate_count": res.candidates,
        "marginal_cap": res.marginal_cap,
        "saturated": res.saturated,
        "ceiling_hit": res.ceiling_hit,
        "depths": res.depths,
        "terms": [dict(t.describe(), index=i + 1) for i, t in enumerate(res.terms)],
        "witness": _jsonable(res.witness),
    }
    if timing:
        d["elapsed_seconds"] = round(res.elapsed, 3)
    return d


def basis_report(m, components, seed, samples, marginal_cap):
    """Assemble a report from component dicts (see :func:`component_dict`), sorted by Q."""
    from .modelfile import model_to_dict

    return {
        "schema_version": REPORT_VERSION,
        "kind": "basis_report",
        "model_digest": model_digest(m),
        "model": model_to_dict(m),
        "seed": seed,
        "samples": samples,
        "marginal_cap": marginal_cap,
        "components": sorted(components, key=lambda c: c["Q"], reverse=True),
    }


def dumps(report):
    """Canonical JSON text of a report (stable key order, trailing newline)."""
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text):
    return json.loads(text)


def basis_report_text(report):
    lines = ["model %s  seed %s  samples %s  marginal-cap %s"
             % (report["model_digest"], report["seed"], report["samples"], report["marginal_cap"])]
    for c in report["components"]:
        head = "Q=(%s)  W=%s  degree=%s  monomials=%d  candidates=%d  basis=%d  cap=%d" % (
            ",".join(map(str, c["Q"])), c["W"], c["physical_degree"], c["monomial_count"],
            c["candidate_count"], len(c["terms"]), c["marginal_cap"])
        if c["ceiling_hit"]:
            head += "  [ceiling reached before saturation]"
        lines.append(head)
        if c["empty"]:
            lines.append("  (empty)")
        for t in c["terms"]:
            lines.append("  %3d  %s" % (t["index"], t["display"]))
        if "elapsed_seconds" in c:
            lines.append("  time %.3fs" % c["elapsed_seconds"])
    return "\n".join(lines) + "\n"
