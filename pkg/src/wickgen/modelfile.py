"""JSON model files and their line-anchored diagnostics.

A model file looks like::

    {
      "schema_version": "1",
      "dim": 4,
      "oriented": true,
      "fields": [{"name": "A", "rank": 1, "degree": "0"}],
      "backgrounds": [
        {"name": "m2", "rank": 0, "degree": "2", "display": "m²"},
        {"name": "xi", "rank": 2, "degree": "-2", "symmetry": "symmetric"}
      ]
    }

Degrees are exact rationals written as strings (``"p/q"``) or integers.
Every semantic error is reported with the line and column of the value
that caused it.
"""

from .jsondoc import DocumentError, parse_document
from .scaling import BackgroundField, Field, FieldMultiplet, ModelSpec, ScalingError, as_fraction

SCHEMA_VERSION = "1"
_TOP_KEYS = {"schema_version", "name", "description", "dim", "oriented", "fields", "backgrounds", "notes"}
_FIELD_KEYS = {"name", "rank", "degree", "display"}
_BACKGROUND_KEYS = {"name", "rank", "degree", "symmetry", "display"}


class ModelFileError(DocumentError):
    pass


def _require(ctx, obj, key, path, kind):
    if key not in obj:
        ctx.fail(path, "missing key %r" % key)
    v = obj[key]
    ok = {
        "int": isinstance(v, int) and not isinstance(v, bool),
        "bool": isinstance(v, bool),
        "str": isinstance(v, str),
        "list": isinstance(v, list),
    }[kind]
    if not ok:
        ctx.fail(path + (key,), "%r must be of type %s" % (key, kind))
    return v


def _degree(ctx, obj, path):
    if "degree" not in obj:
        ctx.fail(path, "missing key 'degree'")
    try:
        return as_fraction(obj["degree"])
    except ScalingError as e:
        ctx.fail(path + ("degree",), str(e))


def _build(ctx, path, cls, *args, **kw):
    try:
        return cls(*args, **kw)
    except (ScalingError, ValueError) as e:
        ctx.fail(path, str(e))


def parse_model(text, source="<model>", allow_inadmissible=False, max_weight=None):
    """Parse and validate a model document into a :class:`ModelSpec`."""
    doc, ctx = parse_document(text, source, ModelFileError)
    if not isinstance(doc, dict):
        ctx.fail((), "model must be a JSON object")
    for k in doc:
        if k not in _TOP_KEYS:
            ctx.fail((k,), "unknown key %r" % k)
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        ctx.fail(("schema_version",), "unsupported schema_version %r" % (version,))
    dim = _require(ctx, doc, "dim", (), "int")
    if dim < 2:
        ctx.fail(("dim",), "dim must be at least 2")
    oriented = _require(ctx, doc, "oriented", (), "bool")
    seen = {}
    fields = []
    for i, f in enumerate(_require(ctx, doc, "fields", (), "list")):
        path = ("fields", i)
        if not isinstance(f, dict):
            ctx.fail(path, "field entries must be objects")
        for k in f:
            if k not in _FIELD_KEYS:
                ctx.fail(path + (k,), "unknown key %r" % k)
        name = _require(ctx, f, "name", path, "str")
        rank = _require(ctx, f, "rank", path, "int")
        if rank < 0:
            ctx.fail(path + ("rank",), "rank must be non-negative")
        if name in seen:
            ctx.fail(path + ("name",), "duplicate name %r (first used at %s)" % (name, seen[name]))
        seen[name] = "fields[%d]" % i
        fields.append(_build(ctx, path, Field, name, rank, _degree(ctx, f, path)))
    if not fields:
        ctx.fail(("fields",), "at least one field is required")
    backgrounds = []
    for i, b in enumerate(_require(ctx, doc, "backgrounds", (), "list")):
        path = ("backgrounds", i)
        if not isinstance(b, dict):
            ctx.fail(path, "background entries must be objects")
        for k in b:
            if k not in _BACKGROUND_KEYS:
                ctx.fail(path + (k,), "unknown key %r" % k)
        name = _require(ctx, b, "name", path, "str")
        rank = _require(ctx, b, "rank", path, "int")
        if rank < 0:
            ctx.fail(path + ("rank",), "rank must be non-negative")
        if name in seen:
            ctx.fail(path + ("name",), "duplicate name %r (first used at %s)" % (name, seen[name]))
        seen[name] = "backgrounds[%d]" % i
        sym = b.get("symmetry", "general")
        if sym not in ("general", "symmetric"):
            ctx.fail(path + ("symmetry",), "symmetry must be 'general' or 'symmetric'")
        display = b.get("display", "")
        if not isinstance(display, str):
            ctx.fail(path + ("display",), "display must be a string")
        bg = _build(ctx, path, BackgroundField, name, rank, _degree(ctx, b, path), sym, display)
        if bg.rank + bg.degree < 0 and not (allow_inadmissible and max_weight is not None):
            ctx.fail(path, "background %r is inadmissible (rank + degree = %s < 0); "
                           "it needs both --allow-inadmissible and --max-weight" % (name, bg.rank + bg.degree))
        backgrounds.append(bg)
    meta = {k: doc[k] for k in ("name", "description", "notes") if k in doc}
    if max_weight is not None:
        max_weight = as_fraction(max_weight)
    return _build(ctx, (), ModelSpec, dim, oriented, FieldMultiplet(tuple(fields)), tuple(backgrounds),
                  max_weight=max_weight, metadata=meta)


def load_model(path, allow_inadmissible=False, max_weight=None):
    """Read a model file; I/O errors propagate as ``OSError``."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_model(text, str(path), allow_inadmissible, max_weight)


def model_to_dict(m):
    """Plain-data form of a model (inverse of :func:`parse_model`)."""
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": m.dim,
        "oriented": m.oriented,
        "fields": [{"name": f.name, "rank": f.rank, "degree": str(f.degree)} for f in m.multiplet],
        "backgrounds": [
            dict({"name": b.name, "rank": b.rank, "degree": str(b.degree), "symmetry": b.symmetry},
                 **({"display": b.display} if b.display else {}))
            for b in m.backgrounds
        ],
    }
