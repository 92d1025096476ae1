"""Coefficient and test-field files for ``wickgen expand``.

Coefficients::

    {"schema_version": "1",
     "coefficients": [{"R": [2], "tensor": [[...], ...]}, ...]}

Each entry gives the spacetime tensor of the component ``C^R`` (covariant,
rank ``Σ r_i k_i``, symmetric under exchange of copies of the same field).
Order-1 entries are rejected since ``C_1`` vanishes.

Fields::

    {"schema_version": "1", "fields": {"A": [1, 0, "1/2", 0]}}

Values are integers or exact rational strings.
"""

from fractions import Fraction

import numpy as np

from .expansion import ExpansionError
from .jsondoc import DocumentError, parse_document
from .tensor import CONTRA, DenseTensor, TensorError


class ExpandInputError(DocumentError):
    pass


def _rational(loc, path, x):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        loc.fail(path, "entries must be integers or rational strings, got %r" % (x,))
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        loc.fail(path, "not an exact rational: %r" % (x,))


def _tensor(loc, path, data, dim, rank):
    """Nested list of shape (dim,)*rank; errors point at the offending entry."""
    def walk(x, p, depth):
        if depth == rank:
            return _rational(loc, p, x)
        if not isinstance(x, list) or len(x) != dim:
            loc.fail(p, "expected a list of length %d at depth %d (tensor rank %d, dim %d)" % (dim, depth, rank, dim))
        return [walk(v, p + (i,), depth + 1) for i, v in enumerate(x)]

    vals = walk(data, path, 0)
    if rank == 0:
        return DenseTensor.scalar(vals, dim)
    return DenseTensor.from_values(vals)


def _check_keys(loc, obj, path, allowed):
    if not isinstance(obj, dict):
        loc.fail(path, "expected an object")
    for k in obj:
        if k not in allowed:
            loc.fail(path + (k,), "unknown key %r" % k)


def parse_fields(text, model, source="<fields>"):
    doc, loc = parse_document(text, source, ExpandInputError)
    _check_keys(loc, doc, (), {"schema_version", "fields"})
    fields = doc.get("fields")
    if not isinstance(fields, dict):
        loc.fail(("fields",), "'fields' must map field names to component arrays")
    names = [f.name for f in model.multiplet]
    for k in fields:
        if k not in names:
            loc.fail(("fields", k), "unknown field %r (model has %s)" % (k, ", ".join(names)))
    out = []
    for f in model.multiplet:
        if f.name not in fields:
            loc.fail(("fields",), "missing values for field %r" % f.name)
        t = _tensor(loc, ("fields", f.name), fields[f.name], model.dim, f.rank)
        if f.rank:
            t = DenseTensor(t.num, t.den, model.dim, (CONTRA,) * f.rank)
        out.append(t)
    return out


def parse_coefficients(text, table, source="<coefficients>"):
    """Fill ``table`` (a :class:`CoefficientTable`) from a coefficient document."""
    doc, loc = parse_document(text, source, ExpandInputError)
    _check_keys(loc, doc, (), {"schema_version", "coefficients"})
    entries = doc.get("coefficients")
    if not isinstance(entries, list):
        loc.fail(("coefficients",), "'coefficients' must be a list")
    space = table.space
    for i, e in enumerate(entries):
        path = ("coefficients", i)
        _check_keys(loc, e, path, {"R", "tensor"})
        r = e.get("R")
        if (not isinstance(r, list) or len(r) != len(space.ranks)
                or any(isinstance(x, bool) or not isinstance(x, int) or x < 0 for x in r)):
            loc.fail(path + ("R",), "R must be a list of %d non-negative integers" % len(space.ranks))
        if sum(r) < 2:
            loc.fail(path + ("R",), "only orders |R| >= 2 are allowed (C_1 vanishes)")
        rank = sum(ri * k for ri, k in zip(r, space.ranks))
        if "tensor" not in e:
            loc.fail(path, "missing key 'tensor'")
        t = _tensor(loc, path + ("tensor",), e["tensor"], space.dim, rank)
        try:
            table.set_component(r, t)
        except (ExpansionError, TensorError) as err:
            loc.fail(path + ("tensor",), str(err))
    return table


def tensor_to_json(t):
    """Nested lists of exact rational strings (integers stay integers)."""
    fr = t.to_fractions()

    def conv(x):
        x = Fraction(x)
        return int(x) if x.denominator == 1 else str(x)

    if t.rank == 0:
        return conv(fr if not isinstance(fr, np.ndarray) else fr[()])
    return np.vectorize(conv, otypes=[object])(fr).tolist()
