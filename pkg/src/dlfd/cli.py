"""``dlfd`` command-line front end.

Exit codes: 0 positive result / satisfied, 1 negative / violated / nothing
found, 2 usage or input error, 3 resource limit.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import finder, tiling
from .interp import (
    InterpretationError,
    UnknownNameError,
    check_terminology,
    complete_concepts,
    eval_concept,
    load_interpretation,
    to_dot,
)
from .parser import (
    DLFDSyntaxError,
    parse_axiom,
    parse_concept,
    parse_rhs,
    parse_terminology,
    render_axiom,
    render_concept,
    render_terminology,
)
from .syntax import Terminology

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3


class InputError(click.ClickException):
    exit_code = EXIT_USAGE


def _fail(msg):
    raise InputError(msg)


def _read_terminology(path) -> Terminology:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_terminology(fh.read())
    except OSError as exc:
        _fail(f"{path}: {exc.strerror}")
    except DLFDSyntaxError as exc:
        _fail(f"{path}:{exc}")


def _read_model(path):
    try:
        return load_interpretation(path)
    except OSError as exc:
        _fail(f"{path}: {exc.strerror}")
    except (ValueError, InterpretationError) as exc:
        _fail(f"{path}: {exc}")


def _read_problem(path):
    try:
        return tiling.load_problem(path)
    except OSError as exc:
        _fail(f"{path}: {exc.strerror}")
    except (ValueError, tiling.TilingError) as exc:
        _fail(f"{path}: {exc}")


def _parse(parser, text, what):
    try:
        return parser(text)
    except DLFDSyntaxError as exc:
        _fail(f"{what}: {exc}")


def _emit(data, as_json: bool, text: str) -> None:
    if as_json:
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _write(path, content: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
    except OSError as exc:
        _fail(f"{path}: {exc.strerror}")


def _bounds(min_size, max_size):
    try:
        return finder.SearchBounds.from_env(min_size, max_size)
    except ValueError as exc:
        _fail(str(exc))


def _search_exit(outcome) -> int:
    if isinstance(outcome, finder.ModelFound):
        return EXIT_OK
    if isinstance(outcome, finder.ResourceLimit):
        return EXIT_LIMIT
    return EXIT_NEGATIVE


def _search_text(outcome, out_path) -> str:
    if isinstance(outcome, finder.ModelFound):
        where = f"; written to {out_path}" if out_path else ""
        return f"model found at size {outcome.size}{where}\n" + (
            "" if out_path else outcome.model.to_json())
    if isinstance(outcome, finder.ResourceLimit):
        return f"resource limit reached at size {outcome.size}"
    return f"no model up to size {outcome.max_size}: {finder.BOUNDED_NOTE}"


@click.group()
def main():
    """Finite-model reasoning for DLFD terminologies."""


@main.command()
@click.argument("terminology")
@click.argument("model")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
@click.option("--default-empty-concepts", is_flag=True,
              help="Give concepts missing from the model the empty extent.")
def check(terminology, model, as_json, default_empty_concepts):
    """Check MODEL against every axiom of TERMINOLOGY."""
    t = _read_terminology(terminology)
    i = _read_model(model)
    try:
        report = check_terminology(i, t, default_empty_concepts)
    except UnknownNameError as exc:
        _fail(str(exc))
    lines = []
    for k, status in enumerate(report.statuses):
        head = f"[{k}] {render_axiom(t[k])}"
        lines.append(f"{head}  ok" if status is None else f"{head}  VIOLATED: {status.describe()}")
    lines.append("satisfied" if report.ok else "violated")
    _emit(report.to_dict(), as_json, "\n".join(lines))
    sys.exit(EXIT_OK if report.ok else EXIT_NEGATIVE)


@main.command("eval")
@click.argument("model")
@click.argument("concept")
@click.option("--json", "as_json", is_flag=True)
@click.option("--default-empty-concepts", is_flag=True)
def eval_cmd(model, concept, as_json, default_empty_concepts):
    """Print the extension of CONCEPT (PFDs allowed) in MODEL."""
    i = _read_model(model)
    e = _parse(parse_rhs, concept, "concept")
    try:
        i = complete_concepts(i, e, default_empty_concepts)
        ext = sorted(eval_concept(i, e))
    except UnknownNameError as exc:
        _fail(str(exc))
    _emit({"extension": ext}, as_json, "{" + ", ".join(map(str, ext)) + "}")
    sys.exit(EXIT_OK if ext else EXIT_NEGATIVE)


@main.command("find-model")
@click.argument("terminology")
@click.argument("goal")
@click.option("--min", "min_size", default=1, show_default=True, type=int)
@click.option("--max", "max_size", default=12, show_default=True, type=int)
@click.option("-o", "out", type=click.Path(dir_okay=False), help="Write the model here (.dlfdmodel).")
@click.option("--json", "as_json", is_flag=True)
@click.option("--timings", is_flag=True, help="Include wall time in the JSON report.")
def find_model_cmd(terminology, goal, min_size, max_size, out, as_json, timings):
    """Search for a model of TERMINOLOGY in which GOAL is nonempty."""
    t = _read_terminology(terminology)
    g = _parse(parse_concept, goal, "goal")
    outcome = finder.find_model_iter(t, g, _bounds(min_size, max_size))
    _finish_search(outcome, out, as_json, timings)


@main.command()
@click.argument("terminology")
@click.argument("axiom")
@click.option("--min", "min_size", default=1, show_default=True, type=int)
@click.option("--max", "max_size", default=12, show_default=True, type=int)
@click.option("-o", "out", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@click.option("--timings", is_flag=True)
def refute(terminology, axiom, min_size, max_size, out, as_json, timings):
    """Search for a finite countermodel to TERMINOLOGY |= AXIOM."""
    t = _read_terminology(terminology)
    a = _parse(parse_axiom, axiom, "axiom")
    outcome = finder.refute_bounded(t, a, _bounds(min_size, max_size))
    _finish_search(outcome, out, as_json, timings)


def _finish_search(outcome, out, as_json, timings):
    if isinstance(outcome, finder.ModelFound) and out:
        _write(out, outcome.model.to_json())
    data = outcome.to_dict(timings)
    if isinstance(outcome, finder.ModelFound) and not out:
        data["model"] = outcome.model.to_dict()
    _emit(data, as_json, _search_text(outcome, out))
    sys.exit(_search_exit(outcome))


@main.command()
@click.argument("tiles")
@click.option("--mode", type=click.Choice(tiling.MODES), default=tiling.DIRECT, show_default=True)
@click.option("-o", "out", type=click.Path(dir_okay=False))
def reduce(tiles, mode, out):
    """Write the terminology of a tiling problem, with the goal as a trailing comment."""
    u, t0 = _read_problem(tiles)
    t, goal = tiling.reduce_to_terminology(u, t0, mode)
    text = render_terminology(t) + f"# goal: {render_concept(goal)}\n"
    if out:
        _write(out, text)
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("tiles")
@click.option("--max-dim", default=4, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True)
def tile(tiles, max_dim, as_json):
    """Find the least torus tiling with sides up to --max-dim."""
    u, t0 = _read_problem(tiles)
    s = tiling.solve_torus_upto(u, t0, max_dim)
    if s is None:
        _emit({"tiling": None, "max_dim": max_dim}, as_json,
              f"no torus tiling with sides up to {max_dim} (bounded evidence only)")
        sys.exit(EXIT_NEGATIVE)
    text = "\n".join(" ".join(map(str, s.rows[j])) for j in reversed(range(s.height)))
    _emit({"tiling": s.to_dict(), "max_dim": max_dim}, as_json, f"{s.width}x{s.height}\n{text}")
    sys.exit(EXIT_OK)


@main.command()
@click.argument("tiles")
@click.option("--max-dim", default=4, show_default=True, type=int)
@click.option("--mode", type=click.Choice(tiling.MODES), default=tiling.DIRECT, show_default=True)
@click.option("-o", "out", type=click.Path(dir_okay=False))
def witness(tiles, max_dim, mode, out):
    """Build the torus model of the reduction from the least tiling."""
    u, t0 = _read_problem(tiles)
    s = tiling.solve_torus_upto(u, t0, max_dim)
    if s is None:
        click.echo(f"no torus tiling with sides up to {max_dim} (bounded evidence only)", err=True)
        sys.exit(EXIT_NEGATIVE)
    if s.width % 2 or s.height % 2:
        s = tiling.double_tiling(s)
    m = tiling.build_torus_witness(u, s, mode)
    if out:
        _write(out, m.to_json())
        click.echo(f"{m.n}-element witness for a {s.width}x{s.height} torus written to {out}")
    else:
        click.echo(m.to_json(), nl=False)


@main.command()
@click.argument("tiles")
@click.option("--max-dim", default=4, show_default=True, type=int)
@click.option("--min", "min_size", default=1, show_default=True, type=int)
@click.option("--max-size", default=12, show_default=True, type=int)
@click.option("-o", "out", type=click.Path(dir_okay=False),
              help="Where to write the witness [default: TILES with suffix .witness.dlfdmodel].")
@click.option("--json", "as_json", is_flag=True)
@click.option("--timings", is_flag=True)
def verify(tiles, max_dim, min_size, max_size, out, as_json, timings):
    """Run the tiler and the model finder on a tiling problem and report both."""
    u, t0 = _read_problem(tiles)
    report = tiling.verify_reduction_instance(u, t0, max_dim, _bounds(min_size, max_size))
    data = report.to_dict(timings)
    if report.branch == "positive":
        ok = all(report.witness_checks.values()) and report.goal_nonempty
        out = out or str(Path(tiles).with_suffix(".witness.dlfdmodel"))
        _write(out, report.witness.to_json())
        data["witness_path"] = out
        s = report.tiling
        text = (f"positive: {s.width}x{s.height} tiling, {report.witness.n}-element witness, "
                f"checks {report.witness_checks}, goal nonempty: {report.goal_nonempty}\n"
                f"witness written to {out}")
        _emit(data, as_json, text)
        sys.exit(EXIT_OK if ok else EXIT_NEGATIVE)
    outcome = report.search
    text = (f"tiler: no torus tiling with sides up to {max_dim} (bounded evidence only)\n"
            f"finder: {_search_text(outcome, None).rstrip()}")
    _emit(data, as_json, text)
    sys.exit(_search_exit(outcome))


@main.command("export-dot")
@click.argument("model")
@click.option("--hide-selfloops", is_flag=True, help="Omit edges from an element to itself.")
@click.option("-o", "out", type=click.Path(dir_okay=False))
def export_dot(model, hide_selfloops, out):
    """Render MODEL as a Graphviz digraph."""
    text = to_dot(_read_model(model), hide_selfloops)
    if out:
        _write(out, text)
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
