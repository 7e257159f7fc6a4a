"""Command-line front end.

Subcommands: validate, fill, curvature, gauss-bonnet, nu-local, renorm,
perturb, cartan, variation, nu, report.  Models are selected with --model
(s3-standard, heisenberg, su2-torsion, ch2-ball) or --structure-file; grids
with --r "1..8", "2..12:0.5" or "1,2,4".  Outputs are deterministic: repeated
runs with the same configuration produce byte-identical files.

Exit codes: 0 success, 1 validation failure, 2 numerical failure, 3 I/O or
schema error.  ACHE_LAB_THREADS > 1 evaluates r-grids in a thread pool with
an ordered merge.
"""

from __future__ import annotations

import dataclasses
import importlib.resources
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import jsonschema
import numpy as np

from . import invariants as inv
from . import renorm
from .curvature import CurvatureModel, ch2_metric, frame_brackets
from .errors import AcheLabError, NumericalFailure, SchemaError, ValidationFailure
from .filling import approximate_ke_metric, kahler_form, solve_complex_structure
from .series import decay_fit
from .structures import (
    PseudohermitianStructure,
    builtin_structure,
    structure_from_json,
    structure_to_json,
    su2_torsion,
    validate_structure,
)

DEFAULT_ORDER = 12
CH2_CAP = 60  # polynomial entries; high cap keeps small-r evaluations exact


# -- plumbing -------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _schema(name: str) -> dict:
    with importlib.resources.files("ache_lab.schemas").joinpath(name).open() as fh:
        return json.load(fh)


def _validate_doc(doc: dict, schema_name: str):
    validator = jsonschema.Draft202012Validator(_schema(schema_name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise SchemaError(f"schema violation at {pointer or '/'}: {e.message}")


def _parse_r_grid(spec) -> list:
    if isinstance(spec, list):
        rs = [float(x) for x in spec]
    elif isinstance(spec, dict):
        rs = list(np.arange(spec["start"], spec["stop"] + 1e-12, spec["step"]))
    elif ".." in str(spec):
        body = str(spec)
        step = 1.0
        if ":" in body:
            body, step_s = body.split(":")
            step = float(step_s)
        a, b = body.split("..")
        rs = list(np.arange(float(a), float(b) + 1e-12, step))
    else:
        rs = [float(x) for x in str(spec).split(",")]
    rs = [float(r) for r in rs]
    if not rs or any(r <= 0 for r in rs) or any(
        rs[i] >= rs[i + 1] for i in range(len(rs) - 1)
    ):
        raise SchemaError("r grid must be strictly increasing and positive")
    return rs


def _grid_map(fn, rs):
    n = int(os.environ.get("ACHE_LAB_THREADS", "1"))
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            return list(ex.map(fn, rs))
    return [fn(r) for r in rs]


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _csv(rows, header) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _grid_text(rows, header, fmt: str) -> str:
    if fmt == "json":
        doc = [{h: v for h, v in zip(header, row)} for row in rows]
        return _json_text({"rows": doc})
    return _csv(rows, header)


def _json_text(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_fmt) + "\n"


@dataclasses.dataclass
class ModelContext:
    structure: PseudohermitianStructure
    geometry: renorm.CollarGeometry
    metric_kind: str  # "exact-ch2" or "filling"
    order: int
    r_base: float  # inner radius for interior integrals

    @property
    def model(self) -> CurvatureModel:
        return self.geometry.model


def _resolve_structure(model: str | None, structure_file: str | None, torsion, webster_r):
    if structure_file:
        with open(structure_file, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        _validate_doc(doc, "structure.schema.json")
        return structure_from_json(doc), "filling"
    name = model or "s3-standard"
    if name in ("ch2", "ch2-ball"):
        return builtin_structure("s3-standard"), "exact-ch2"
    if name == "su2-torsion":
        a, b = torsion or (0.3, -0.2)
        r0 = webster_r if webster_r is not None else 4.0
        return su2_torsion(complex(a, b), webster_R=r0), "filling"
    s = builtin_structure(name)
    if s is None:
        raise SchemaError(f"unknown model {name!r}")
    return s, "filling"


def _build_context(model, structure_file, order, torsion=None, webster_r=None) -> ModelContext:
    s, kind = _resolve_structure(model, structure_file, torsion, webster_r)
    return _assemble_context(s, kind, order)


def _build_context_from_structure(s, order) -> ModelContext:
    return _assemble_context(s, "filling", order)


def _assemble_context(s, kind, order) -> ModelContext:
    if order < 6:
        raise SchemaError("truncation order must be >= 6")
    if kind == "exact-ch2":
        cap = max(CH2_CAP, order)
        g = ch2_metric(cap=cap)
        r_base = 0.0
    else:
        cap = order
        g = approximate_ke_metric(s, cap=cap)
        r_base = 1.0
    cm = CurvatureModel(g, frame_brackets(s, cap=g.cap()))
    geom = renorm.CollarGeometry(cm, s.total_volume)
    return ModelContext(structure=s, geometry=geom, metric_kind=kind, order=order, r_base=r_base)


# -- the command group --------------------------------------------------------------


@click.group()
def cli():
    """Curvature asymptotics and renormalized boundary invariants of CR collars."""


_model_opt = click.option("--model", default=None, help="built-in model name")
_file_opt = click.option("--structure-file", default=None, help="structure JSON file")
_order_opt = click.option("--order", default=DEFAULT_ORDER, show_default=True, help="series truncation order")
_r_opt = click.option("--r", "r_spec", default="1..8", show_default=True, help="radius grid")
_out_opt = click.option("--out", default=None, help="output path (default stdout)")
_fmt_opt = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
_torsion_opt = click.option("--torsion", nargs=2, type=float, default=None, help="torsion (re, im) for su2-torsion")
_webster_opt = click.option("--webster-r", type=float, default=None, help="scalar curvature for su2-torsion")


@cli.command()
@_model_opt
@_file_opt
@_out_opt
def validate(model, structure_file, out):
    """Check the structure invariants; exit 1 on failure."""
    s, _ = _resolve_structure(model, structure_file, None, None)
    report = validate_structure(s)
    _emit(_json_text({"structure": s.name, **report.to_dict()}), out)
    if not report.passed:
        raise ValidationFailure(f"structure {s.name} failed validation")


@cli.command()
@_model_opt
@_file_opt
@_order_opt
@_out_opt
@_torsion_opt
@_webster_opt
def fill(model, structure_file, order, out, torsion, webster_r):
    """Emit the approximate Kahler-Einstein frame metric as JSON series."""
    ctx = _build_context(model, structure_file, order, torsion, webster_r)
    entries = []
    for i in range(4):
        for j in range(i, 4):
            coeffs = [
                [k, c.real, c.imag] for k, c in ctx.model.metric.g[i][j].items()
            ]
            entries.append([i + 1, j + 1, coeffs])
    doc = {
        "frame": "radial-weighted-adapted",
        "structure": ctx.structure.name,
        "metric_kind": ctx.metric_kind,
        "order": ctx.order,
        "entries": entries,
    }
    _emit(_json_text(doc), out)


@cli.command()
@_model_opt
@_file_opt
@_order_opt
@_r_opt
@_out_opt
@_fmt_opt
@_torsion_opt
@_webster_opt
def curvature(model, structure_file, order, r_spec, out, fmt, torsion, webster_r):
    """Curvature snapshots: r, Scal, |W+|^2, |W-|^2, |Ric0|^2, residual."""
    ctx = _build_context(model, structure_file, order, torsion, webster_r)
    rs = _parse_r_grid(r_spec)

    def row(r):
        sn = ctx.model.snapshot(r)
        return (r, sn.scal, sn.w2_plus, sn.w2_minus, sn.ric0_norm2, sn.einstein_residual)

    rows = _grid_map(row, rs)
    _emit(_grid_text(rows, ["r", "scal", "wplus2", "wminus2", "ric0_2", "einstein_residual"], fmt), out)


@cli.command("gauss-bonnet")
@_model_opt
@_file_opt
@_order_opt
@_r_opt
@_out_opt
@_fmt_opt
@_torsion_opt
@_webster_opt
def gauss_bonnet(model, structure_file, order, r_spec, out, fmt, torsion, webster_r):
    """Euler-characteristic identity pieces per radius."""
    ctx = _build_context(model, structure_file, order, torsion, webster_r)
    rs = _parse_r_grid(r_spec)

    def row(r):
        igb = ctx.geometry.interior_integral("gb", ctx.r_base, r)
        bgb = ctx.geometry.gb_boundary(r)
        return (r, igb, bgb, igb + bgb)

    rows = _grid_map(row, rs)
    _emit(_grid_text(rows, ["r", "interior_gb", "gb_boundary", "euler_check"], fmt), out)


def _series_summary(rs, vals):
    diffs = [(rs[i], abs(vals[i + 1] - vals[i])) for i in range(len(rs) - 1)]
    summary = {"limit_estimate": vals[-1], "fit_alpha": None, "fit_residual": None}
    positive = [(r, d) for r, d in diffs if d > 1e-300]
    if len(positive) >= 4:
        try:
            alpha, c = decay_fit(positive)
            preds = [c * math.exp(-alpha * r) for r, _ in positive]
            resid = max(
                abs(math.log(d) - math.log(p)) for (_, d), p in zip(positive, preds)
            )
            summary["fit_alpha"] = alpha
            summary["fit_residual"] = resid
        except NumericalFailure:
            pass
    return summary


@cli.command("nu-local")
@_model_opt
@_file_opt
@_order_opt
@_r_opt
@_out_opt
@_fmt_opt
@_torsion_opt
@_webster_opt
def nu_local(model, structure_file, order, r_spec, out, fmt, torsion, webster_r):
    """Local boundary combination per radius plus a JSON convergence summary."""
    ctx = _build_context(model, structure_file, order, torsion, webster_r)
    rs = _parse_r_grid(r_spec)
    vals = _grid_map(ctx.geometry.nu_local, rs)
    alphas = _running_alpha(rs, vals)
    rows = list(zip(rs, vals, alphas))
    text = _grid_text(rows, ["r", "value", "running_fit_alpha"], fmt)
    text += _json_text(_series_summary(rs, vals))
    _emit(text, out)


def _running_alpha(rs, vals):
    out = []
    for i in range(len(rs)):
        window = [(rs[j], abs(vals[j + 1] - vals[j])) for j in range(max(0, i - 4), i)]
        window = [(r, d) for r, d in window if d > 1e-300]
        if len(window) >= 4:
            try:
                a, _ = decay_fit(window)
                out.append(a)
                continue
            except NumericalFailure:
                pass
        out.append(float("nan"))
    return out


@cli.command("renorm")
@_model_opt
@_file_opt
@_order_opt
@_r_opt
@_out_opt
@_fmt_opt
@_torsion_opt
@_webster_opt
def renorm_cmd(model, structure_file, order, r_spec, out, fmt, torsion, webster_r):
    """Tail integrals of the renormalized characteristic density."""
    ctx = _build_context(model, structure_file, order, torsion, webster_r)
    rs = _parse_r_grid(r_spec)
    r_top = rs[-1]
    vals = _grid_map(lambda r: ctx.geometry.char_tail(r, r_top), rs)
    alphas = _running_alpha(rs, vals)
    rows = list(zip(rs, vals, alphas))
    text = _grid_text(rows, ["r", "value", "running_fit_alpha"], fmt)
    text += _json_text(_series_summary(rs, vals))
    _emit(text, out)


@cli.command()
@_model_opt
@_file_opt
@_order_opt
@click.option("--a", "a_", type=float, required=True)
@click.option("--b", "b_", type=float, required=True)
@_out_opt
@_torsion_opt
@_webster_opt
def perturb(model, structure_file, order, a_, b_, out, torsion, webster_r):
    """Inject the undetermined-order perturbation and report its effects."""
    ctx = _build_context(model, structure_file, order, torsion, webster_r)
    if ctx.metric_kind != "filling":
        raise NumericalFailure("perturb applies to filling metrics, not the exact ball")
    k = inv.PerturbationK(a_, b_)
    gp = inv.inject_perturbation(ctx.model.metric, k)
    cmp_ = CurvatureModel(gp, ctx.model.brackets)
    geop = renorm.CollarGeometry(cmp_, ctx.structure.total_volume)
    rs = list(np.arange(4.0, 9.5, 1.0))
    dif = [(r, abs(geop.nu_local(r) - ctx.geometry.nu_local(r))) for r in rs]
    kah = [
        (r, abs(cmp_.snapshot(r).w2_plus - cmp_.snapshot(r).scal ** 2 / 24.0))
        for r in rs
    ]
    doc = {
        "value": {"a": a_, "b": b_},
        "residuals": {
            "nu_local_difference": {r: d for r, d in dif},
            "nu_local_difference_fit_alpha": decay_fit(dif)[0],
            "kahler_defect_fit_alpha": decay_fit(kah)[0],
        },
    }
    _emit(_json_text(doc), out)


@cli.command()
@_model_opt
@_file_opt
@_order_opt
@_out_opt
@_torsion_opt
@_webster_opt
def cartan(model, structure_file, order, out, torsion, webster_r):
    """Cartan tensor of the model and the proportionality fit over a family."""
    s, _ = _resolve_structure(model, structure_file, torsion, webster_r)
    Q = inv.cartan_tensor(s)
    A0 = complex(s.torsion_A) if abs(complex(s.torsion_A)) > 0 else 0.02 * (1 + 0.3j)
    pairs = []
    for t in (0.2, 0.4, 0.6, 0.8, 1.0):
        st = su2_torsion(t * A0, webster_R=s.webster_R if s.webster_R else 4.0)
        g = approximate_ke_metric(st, cap=order)
        cm = CurvatureModel(g, frame_brackets(st, cap=order))
        w2, rel = inv.extract_W2minus(cm)
        pairs.append((w2, inv.cartan_tensor(st)))
    fit = inv.fit_cartan_constant(pairs)
    doc = {
        "value": {"Q_re": Q.p, "Q_im": Q.q, "c_q": fit.c_q},
        "residuals": {"fit_max_rel": fit.max_rel_residual, "samples": fit.samples},
    }
    _emit(_json_text(doc), out)


@cli.command()
@_model_opt
@_file_opt
@click.option("--e-re", type=float, required=True)
@click.option("--e-im", type=float, required=True)
@_out_opt
@_torsion_opt
@_webster_opt
def variation(model, structure_file, e_re, e_im, out, torsion, webster_r):
    """Derivative of the boundary invariant along a deformation of J."""
    s, _ = _resolve_structure(model, structure_file, torsion, webster_r)
    E = complex(e_re, e_im)
    v = inv.variation_integrand(s, E)
    lin = abs(inv.variation_integrand(s, 2 * E) - 2 * v)
    resc = abs(inv.variation_integrand(s.rescale_contact_form(1.7), E) - v)
    doc = {"value": v, "residuals": {"linearity": lin, "contact_rescale": resc}}
    _emit(_json_text(doc), out)


@cli.command()
@_model_opt
@_file_opt
@_order_opt
@click.option("--chi", type=int, default=1, show_default=True)
@click.option("--tau", type=int, default=0, show_default=True)
@click.option("--r-top", type=float, default=12.0, show_default=True)
@_out_opt
@_torsion_opt
@_webster_opt
def nu(model, structure_file, order, chi, tau, r_top, out, torsion, webster_r):
    """Boundary invariant from the bulk integral: I - chi + 3 tau."""
    ctx = _build_context(model, structure_file, order, torsion, webster_r)
    I = ctx.geometry.interior_integral("char", ctx.r_base, r_top)
    tail = abs(ctx.geometry.char_tail(r_top - 2.0, r_top))
    val = inv.nu_from_filling(I, chi, tau)
    doc = {
        "value": val,
        "residuals": {"char_integral": I, "tail_estimate": tail, "mu": inv.mu_from_nu(val)},
    }
    _emit(_json_text(doc), out)


@cli.command()
@_model_opt
@_file_opt
@_order_opt
@_r_opt
@click.option("--chi", type=int, default=1, show_default=True)
@click.option("--tau", type=int, default=0, show_default=True)
@click.option("--eta", "eta_spec", default="zero", show_default=True)
@click.option("--config", "config_file", default=None, help="run-config JSON (flags override)")
@_out_opt
@_torsion_opt
@_webster_opt
def report(model, structure_file, order, r_spec, chi, tau, eta_spec, config_file, out, torsion, webster_r):
    """Aggregate JSON report of every diagnostic quantity."""
    structure_inline = None
    if config_file:
        with open(config_file, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
        _validate_doc(cfg, "config.schema.json")
        if "structure" in cfg:
            if isinstance(cfg["structure"], str):
                model = model or cfg["structure"]
            else:
                _validate_doc(cfg["structure"], "structure.schema.json")
                structure_inline = structure_from_json(cfg["structure"])
        order = cfg.get("truncation_order", order)
        if "r_grid" in cfg:
            r_spec = cfg["r_grid"]
        eta_spec = cfg.get("eta_provider", eta_spec)
        out = out or cfg.get("output", {}).get("path")
    if structure_inline is not None:
        ctx = _build_context_from_structure(structure_inline, order)
    else:
        ctx = _build_context(model, structure_file, order, torsion, webster_r)
    s = ctx.structure
    rs = _parse_r_grid(r_spec)
    eta = renorm.EtaProvider.from_spec(eta_spec)
    q = []

    def add(name, value, provenance, residual=None, tolerance=None):
        q.append(
            {
                "name": name,
                "value": value,
                "residual": residual,
                "tolerance": tolerance,
                "provenance": provenance,
            }
        )

    vr = validate_structure(s)
    add("structure_valid", bool(vr.passed), "structure-invariants",
        residual=max(vr.checks.values()))
    add("webster_R", float(s.webster_R), "structure-equations", tolerance=1e-12)
    add("torsion_A", [complex(s.torsion_A).real, complex(s.torsion_A).imag],
        "structure-equations", tolerance=1e-12)

    phi = solve_complex_structure(s, order=6)
    add("phi_is_zero", bool(phi.p.is_zero), "integrability-recursion",
        residual=phi.p.linf() if phi.p.is_zero else None,
        tolerance=None if phi.p.is_zero else 0.0)
    add("phi_1", [phi.coefficient(1).real, phi.coefficient(1).imag],
        "integrability-recursion", tolerance=1e-14)

    if ctx.metric_kind == "filling":
        kf = kahler_form(s, cap=ctx.order)
        add("kahler_route_mismatch", kf.mismatch, "kahler-form-cross-check",
            tolerance=1e-10)
    res_below = ctx.model.einstein_residual_linf_below(5)
    add("einstein_residual_below_q5", res_below, "einstein-order-check", tolerance=1e-10)
    snaps = [(r, ctx.model.snapshot(r).einstein_residual) for r in np.arange(4.0, 12.5, 1.0)]
    if max(v for _, v in snaps) > 1e-14:
        alpha, _ = decay_fit(snaps)
        add("einstein_residual_exponent", alpha, "einstein-order-decay-fit",
            tolerance=2.4)
    else:
        add("einstein_residual_exponent", float("inf"), "einstein-order-decay-fit",
            residual=0.0)

    try:
        w2, rel = inv.extract_W2minus(ctx.model)
        add("w2minus", [w2.p, w2.q], "asd-weyl-extraction", residual=rel)
    except AcheLabError as exc:
        add("w2minus", None, f"asd-weyl-extraction failed: {exc}", residual=None,
            tolerance=0.0)
    Q = inv.cartan_tensor(s)
    add("cartan_Q", [Q.p, Q.q], "cartan-tensor", tolerance=1e-12)

    grid_rows = []
    for r in rs:
        rep = renorm.boundary_report(ctx.geometry, r, r0=ctx.r_base, tau_target=float(tau))
        row = rep.to_dict()
        row["eta"] = eta(r)
        grid_rows.append(row)
    I = ctx.geometry.interior_integral("char", ctx.r_base, rs[-1])
    nu_val = inv.nu_from_filling(I, chi, tau)
    add("char_integral", I, "renormalized-bulk-integral",
        residual=abs(ctx.geometry.char_tail(rs[-1] - 2.0, rs[-1])))
    add("nu_invariant", nu_val, "bulk-minus-topology", tolerance=1e-6)
    add("mu_invariant", inv.mu_from_nu(nu_val), "linear-normalization", tolerance=1e-6)

    doc = {
        "schema": "ache-lab/report/v1",
        "structure": structure_to_json(s),
        "truncation_order": ctx.order,
        "quantities": q,
        "grids": {"boundary": grid_rows},
    }
    _validate_doc(doc, "report.schema.json")
    _emit(_json_text(doc), out)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except SchemaError as exc:
        click.echo(f"schema error: {exc}", err=True)
        return 3
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"io error: {exc}", err=True)
        return 3
    except ValidationFailure as exc:
        click.echo(f"validation failure: {exc}", err=True)
        return 1
    except NumericalFailure as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2
    except click.ClickException as exc:
        exc.show()
        return 3
    except click.exceptions.Abort:
        return 3


if __name__ == "__main__":
    sys.exit(main())
