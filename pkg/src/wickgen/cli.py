"""Command-line interface: ``wickgen enumerate | invariants | check | expand``.

Exit codes: 0 success, 1 property or fixture failure, 2 input error.
"""

import os
import sys
from concurrent.futures import ProcessPoolExecutor

import click

from . import pipeline
from .jsondoc import DocumentError
from .modelfile import load_model
from .scaling import ScalingError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


def _default_seed():
    raw = os.environ.get("WICKGEN_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError("WICKGEN_SEED must be an integer, got %r" % raw) from None


def _load(path, allow_inadmissible=False, max_weight=None):
    try:
        return load_model(path, allow_inadmissible, max_weight)
    except OSError as e:
        raise InputError("cannot read model %s: %s" % (path, e.strerror or e)) from None
    except (DocumentError, ScalingError) as e:
        raise InputError(str(e)) from None


def _parse_multi_index(text, length):
    body = text.strip().strip("()[]")
    try:
        q = tuple(int(x) for x in body.split(",") if x.strip() != "")
    except ValueError:
        raise InputError("component must be comma-separated integers, got %r" % text) from None
    if len(q) != length or any(x < 0 for x in q):
        raise InputError("component %r needs %d non-negative entries" % (text, length))
    return q


def _parse_cap(text):
    if text == "auto":
        return "auto"
    try:
        cap = int(text)
    except ValueError:
        raise InputError("--marginal-cap must be 'auto' or a non-negative integer") from None
    if cap < 0:
        raise InputError("--marginal-cap must be non-negative")
    return cap


def _emit(text, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _component_worker(args):
    model, q, cap, samples, seed, timing = args
    res = pipeline.enumerate_component(model, q, cap, samples, seed)
    return pipeline.component_dict(res, timing)


format_option = click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text",
                             show_default=True, help="Report format.")
seed_option = click.option("--seed", type=int, default=None,
                           help="Base seed (default: $WICKGEN_SEED or 0).")
samples_option = click.option("--samples", type=click.IntRange(min=1), default=5, show_default=True,
                              help="Sample points per batch and frozen marginal values.")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Enumerate counterterm bases for Wick powers of tensor fields."""


@main.command("enumerate")
@click.argument("model_path", metavar="MODEL", type=click.Path(dir_okay=False))
@click.option("--order", "-k", type=click.IntRange(min=0), help="All components Q with |Q| = k.")
@click.option("--component", "-Q", "component", help="A single component, e.g. 1,1.")
@click.option("--marginal-cap", default="auto", show_default=True,
              help="Marginal blocks per monomial: 'auto' (deepen to saturation, ceiling n) or an integer.")
@samples_option
@seed_option
@click.option("--jobs", "-j", type=click.IntRange(min=1), default=None,
              help="Worker processes for independent components (default: one per component, up to CPU count).")
@click.option("--timing", is_flag=True, help="Add wall-clock times (the report is then not reproducible).")
@click.option("--allow-inadmissible", is_flag=True, help="Accept inadmissible backgrounds (needs --max-weight).")
@click.option("--max-weight", default=None, help="Explicit weight cap for inadmissible backgrounds.")
@format_option
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write the report to a file.")
def enumerate_cmd(model_path, order, component, marginal_cap, samples, seed, jobs, timing,
                  allow_inadmissible, max_weight, fmt, output):
    """Enumerate and reduce the basis of one or all components of a given order."""
    m = _load(model_path, allow_inadmissible, max_weight)
    if (order is None) == (component is None):
        raise InputError("give exactly one of --order or --component")
    seed = _default_seed() if seed is None else seed
    cap = _parse_cap(marginal_cap)
    qs = (pipeline.components_of_order(m, order) if order is not None
          else [_parse_multi_index(component, len(m.multiplet))])
    tasks = [(m, q, cap, samples, seed, timing) for q in qs]
    workers = min(jobs or os.cpu_count() or 1, len(tasks))
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                comps = list(pool.map(_component_worker, tasks))
        else:
            comps = [_component_worker(t) for t in tasks]
    except (ScalingError, ValueError) as e:
        raise InputError(str(e)) from None
    report = pipeline.basis_report(m, comps, seed, samples, cap)
    _emit(pipeline.dumps(report) if fmt == "json" else pipeline.basis_report_text(report), output)


@main.command("invariants")
@click.argument("model_path", metavar="MODEL", type=click.Path(dir_okay=False))
@click.option("--field", "field_name", required=True, help="Name of a marginal background.")
@click.option("--max-degree", type=click.IntRange(min=0), default=None,
              help="Highest polynomial degree (default: the dimension).")
@samples_option
@seed_option
@format_option
def invariants_cmd(model_path, field_name, max_degree, samples, seed, fmt):
    """Scalar polynomial invariants of a marginal background."""
    from .invariants import discriminant_shape, scalar_invariant_basis, trace_relation

    m = _load(model_path)
    seed = _default_seed() if seed is None else seed
    try:
        bg = m.background(field_name)
    except KeyError:
        raise InputError("model has no background named %r" % field_name) from None
    if not bg.marginal:
        raise InputError("background %r is not marginal (rank + degree = %s); invariants are built "
                         "from marginal fields only" % (field_name, bg.rank + bg.degree))
    d = m.dim if max_degree is None else max_degree
    basis = scalar_invariant_basis(m, [bg], d, samples, seed)
    report = {
        "schema_version": pipeline.REPORT_VERSION,
        "kind": "invariant_report",
        "model_digest": pipeline.model_digest(m),
        "field": field_name,
        "max_degree": d,
        "seed": seed,
        "samples": samples,
        "terms": [t.display for t in basis.terms],
        "generators": [t.display for t in basis.generators],
        "decomposable": [t.display for t in basis.decomposable],
    }
    if bg.rank == 2 and bg.symmetry == "symmetric":
        n = m.dim
        shape = discriminant_shape(n)
        report["discriminant"] = dict(shape, formula="det(tr ξ^(i+j-2)), i,j = 1..%d" % n)
        report["trace_relations"] = {str(p): str(trace_relation(p, n)[0]) for p in range(n + 1, min(d, 2 * n) + 1)}
    if fmt == "json":
        click.echo(pipeline.dumps(report), nl=False)
        return
    lines = ["invariants of %s up to degree %d (model %s)" % (field_name, d, report["model_digest"]),
             "generators: %s" % ", ".join(report["generators"]),
             "basis (%d): %s" % (len(report["terms"]), ", ".join(report["terms"]))]
    if "discriminant" in report:
        lines.append("discriminant: %s, a %dx%d Hankel matrix, polynomial degree %d" % (
            report["discriminant"]["formula"], *report["discriminant"]["matrix"],
            report["discriminant"]["polynomial_degree"]))
        for p, rel in report["trace_relations"].items():
            lines.append("tr ξ^%s = %s" % (p, rel))
    click.echo("\n".join(lines))


@main.command("check")
@click.option("--suite", type=click.Choice(["core", "scaling", "equivariance", "fixtures", "all"]),
              default="core", show_default=True)
@samples_option
@seed_option
@format_option
def check_cmd(suite, samples, seed, fmt):
    """Run the property suites; exits 1 on any failure.

    Scaling, equivariance and fixture suites run on the bundled example
    models.
    """
    from .suites import run_suite

    seed = _default_seed() if seed is None else seed
    results = run_suite(suite, seed, samples)
    ok = all(r.ok for r in results)
    if fmt == "json":
        click.echo(pipeline.dumps({
            "schema_version": pipeline.REPORT_VERSION, "kind": "check_report", "suite": suite, "seed": seed,
            "samples": samples, "passed": ok,
            "results": [{"name": r.name, "passed": r.passed, "total": r.total, "failed": r.failed} for r in results],
        }), nl=False)
    else:
        for r in results:
            click.echo("%-24s %4d/%-4d %s" % (r.name, r.passed, r.total, "ok" if r.ok else "FAIL"))
            for f in r.failed:
                click.echo("    failed: %s" % f)
        click.echo("all passed" if ok else "FAILURES")
    sys.exit(EXIT_OK if ok else EXIT_FAIL)


@main.command("expand")
@click.argument("model_path", metavar="MODEL", type=click.Path(dir_okay=False))
@click.option("--P", "p_text", required=True, help="Component P of the Wick power, e.g. 2 or 1,1.")
@click.option("--coeffs", "coeff_path", required=True, type=click.Path(dir_okay=False),
              help="Coefficient file (components C^R).")
@click.option("--f", "field_path", required=True, type=click.Path(dir_okay=False), help="Test-field values.")
@format_option
def expand_cmd(model_path, p_text, coeff_path, field_path, fmt):
    """Expand one Wick component under a change of renormalization."""
    from .expandfile import parse_coefficients, parse_fields
    from .expansion import CoefficientTable, ExpansionError, MultipletSpace, expansion_report

    m = _load(model_path)
    p = _parse_multi_index(p_text, len(m.multiplet))
    space = MultipletSpace(m.multiplet.ranks, m.dim)
    try:
        with open(coeff_path, encoding="utf-8") as fh:
            table = parse_coefficients(fh.read(), CoefficientTable(space), coeff_path)
        with open(field_path, encoding="utf-8") as fh:
            fields = parse_fields(fh.read(), m, field_path)
        body = expansion_report(p, table, fields)
    except OSError as e:
        raise InputError("cannot read %s: %s" % (e.filename, e.strerror)) from None
    except (DocumentError, ExpansionError) as e:
        raise InputError(str(e)) from None
    report = dict(body, schema_version=pipeline.REPORT_VERSION, kind="expansion_report",
                  model_digest=pipeline.model_digest(m))
    if fmt == "json":
        click.echo(pipeline.dumps(report), nl=False)
        return
    click.echo("P=(%s)  ranks=%s  dim=%d" % (",".join(map(str, p)), report["ranks"], report["dim"]))
    for row in report["terms"]:
        tag = "leading" if row["leading"] else "binom %d x scalar %s" % (row["binomial"], row["scalar"])
        click.echo("  Q=(%s)  coefficient %s  [%s]" % (",".join(map(str, row["Q"])), row["coefficient"], tag))


if __name__ == "__main__":
    main()
