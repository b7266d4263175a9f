"""Command-line interface.

Every subcommand can write its result to ``--out`` and records a JSON
manifest next to it (``<out>.manifest.json`` unless ``--manifest`` says
otherwise).  ``ldpu replay MANIFEST`` re-runs the stored command with the
stored parameters.  Dimensions on the command line are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .classifiers import FIXTURES, ClassifierModel, load_model, save_model
from .empirical import DEFAULT_SAMPLES, compare, empirical_rho, render_cost_table
from .errors import LDPUError, ModelError, ParameterError
from .mechanisms import DEFAULT_GRID, DISCRETE_FAMILIES, FAMILIES, Mechanism, make_mechanism
from .quantify import (
    DEFAULT_GAUSSIAN_DELTA,
    DEFAULT_SWEEP_EPS,
    DEFAULT_SWEEP_THETA,
    UtilityQuery,
    rho,
    select_epsilon,
    sweep,
)
from .robustness import Hyperrectangle, RobustnessConfig, expand_hyperrectangle, find_radius

SWEEP_COLUMNS = ("family", "epsilon", "theta_or_rect", "rho", "per_dim_probs", "composed_eps", "composed_delta")
COMPARE_COLUMNS = SWEEP_COLUMNS + ("rho_hat", "halfwidth", "violation", "t_sample_ms", "t_infer_ms", "t_theory_ms")


class UsageError(ParameterError):
    """Malformed command-line value."""


# --------------------------------------------------------------------------
# parsing helpers


def parse_floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated decimals, got {text!r}") from None


@dataclass(frozen=True)
class MechSpec:
    family: str
    eps: float | None
    delta: float = 0.0
    k: int = DEFAULT_GRID

    def build(self, eps: float | None = None) -> Mechanism:
        eps = self.eps if eps is None else eps
        if eps is None:
            raise UsageError(f"no epsilon given for {self.family}; write {self.family}:EPS or pass --eps")
        return make_mechanism(self.family, eps, self.delta, self.k)


def parse_mech(text: str) -> MechSpec:
    """``family[:eps[:delta][:k]]``; for discrete families a lone integer third field is k."""
    parts = text.strip().split(":")
    family = parts[0].lower()
    if family not in FAMILIES:
        raise UsageError(f"unknown mechanism {family!r}; choose from {', '.join(FAMILIES)}")
    try:
        eps = float(parts[1]) if len(parts) > 1 and parts[1] else None
        delta, k = 0.0, DEFAULT_GRID
        if len(parts) == 3:
            third = parts[2]
            if family in DISCRETE_FAMILIES and third.isdigit():
                k = int(third)
            else:
                delta = float(third)
        elif len(parts) == 4:
            delta, k = float(parts[2]), int(parts[3])
        elif len(parts) > 4:
            raise ValueError
    except ValueError:
        raise UsageError(f"malformed mechanism {text!r}; expected family:eps[:delta][:k]") from None
    if family == "gaussian" and delta == 0.0:
        delta = DEFAULT_GAUSSIAN_DELTA
    return MechSpec(family, eps, delta, k)


def parse_assignment(text: str, dimension: int) -> dict[int, MechSpec]:
    """``1=pm:2,3=krr:2:100`` (1-based) or one spec applied to every dimension."""
    if "=" not in text:
        spec = parse_mech(text)
        return {i: spec for i in range(dimension)}
    out: dict[int, MechSpec] = {}
    for item in text.split(","):
        if not item.strip():
            continue
        dim, _, spec = item.partition("=")
        try:
            i = int(dim) - 1
        except ValueError:
            raise UsageError(f"--mech: dimension {dim!r} is not an integer") from None
        if not 0 <= i < dimension:
            raise UsageError(f"--mech: dimension {i + 1} is outside 1..{dimension}")
        if i in out:
            raise UsageError(f"--mech: dimension {i + 1} assigned twice")
        out[i] = parse_mech(spec)
    return out


def resolve_model(ref: str) -> ClassifierModel:
    """A model file path, or a built-in fixture as ``NAME`` or ``fixtures/NAME``."""
    path = Path(ref)
    for candidate in (path, path.with_name(path.name + ".json")):
        if candidate.is_file():
            return load_model(candidate)
    name = path.stem if path.parent.name in ("", "fixtures") else None
    if name in FIXTURES:
        return FIXTURES[name]()
    raise ModelError(f"model {ref!r} is neither a file nor a built-in fixture ({', '.join(FIXTURES)})")


def parse_point(text: str, dimension: int | None = None) -> tuple[float, ...]:
    point = tuple(parse_floats(text, "point"))
    if dimension is not None and len(point) == 1 and dimension > 1:
        point = point * dimension
    return point


def region_from_args(args, x: Sequence[float]) -> Hyperrectangle | None:
    if args.lower is not None or args.upper is not None:
        if args.lower is None or args.upper is None:
            raise UsageError("--lower and --upper must be given together")
        return Hyperrectangle(tuple(parse_floats(args.lower, "lower")), tuple(parse_floats(args.upper, "upper")))
    if args.theta is not None:
        return Hyperrectangle.ball(x, args.theta)
    return None


# --------------------------------------------------------------------------
# output


def _cell(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ";".join(_cell(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_records(records: list[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: r[c] for c in columns} for r in records], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        writer.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


@dataclass
class Output:
    text: str
    records: list[dict]
    columns: Sequence[str]

    def render(self, fmt: str) -> str:
        return self.text if fmt == "text" else render_records(self.records, self.columns, fmt)


# --------------------------------------------------------------------------
# subcommands


def cmd_concentration(args) -> Output:
    spec = parse_mech(args.mech)
    delta = args.delta if args.delta is not None else spec.delta
    mech = MechSpec(spec.family, spec.eps, delta, args.k or spec.k).build(args.eps)
    if args.theta is not None:
        a, b = max(0.0, args.x - args.theta), min(1.0, args.x + args.theta)
    else:
        a, b = args.a, args.b
    ip = mech.interval_probability(args.x, a, b)
    record = {
        "family": mech.label,
        "epsilon": mech.epsilon,
        "delta": mech.delta,
        "x": args.x,
        "a": a,
        "b": b,
        "probability": ip.value,
        "includes_left_atom": ip.includes_left_atom,
        "includes_right_atom": ip.includes_right_atom,
    }
    return Output(f"{ip.value:.4f}\n", [record], list(record))


def _config(args) -> RobustnessConfig:
    return RobustnessConfig(args.tau, args.omega, args.kappa, args.seed, getattr(args, "max_passes", 3))


def cmd_radius(args) -> Output:
    model = resolve_model(args.model)
    x = parse_point(args.point, model.dimension)
    config = _config(args)
    theta = find_radius(model, x, config)
    record = {"model": model.name, "point": list(x), "theta": theta, "tau": args.tau, "omega": args.omega,
              "kappa": args.kappa, "seed": args.seed, "samples_per_test": config.samples}
    text = f"{theta:.4f}\n"
    return Output(text, [record], list(record))


def cmd_hyperrect(args) -> Output:
    model = resolve_model(args.model)
    x = parse_point(args.point, model.dimension)
    config = _config(args)
    theta = args.theta if args.theta is not None else find_radius(model, x, config)
    box = expand_hyperrectangle(model, x, theta, config)
    record = {"model": model.name, "point": list(x), "theta": theta,
              "lower": list(box.lower), "upper": list(box.upper), "seed": args.seed}
    text = f"theta = {theta:.4f}\nhyperrectangle = {box}\n"
    return Output(text, [record], list(record))


def cmd_quantify(args) -> Output:
    model = resolve_model(args.model) if args.model else None
    dimension = model.dimension if model else None
    x = parse_point(args.point, dimension)
    if model is not None and len(x) != model.dimension:
        raise UsageError(f"--point has {len(x)} coordinates, model expects {model.dimension}")
    specs = parse_assignment(args.mech, len(x))
    region = region_from_args(args, x)
    from_radius = False
    if region is None:
        if model is None:
            raise UsageError("give --lower/--upper or --theta, or a --model to search the robust region")
        config = _config(args)
        theta = find_radius(model, x, config)
        if args.expand:
            region = expand_hyperrectangle(model, x, theta, config)
        else:
            region, from_radius = Hyperrectangle.ball(x, theta), True
    slack = {"on": True, "off": False, "auto": from_radius}[args.slack]
    eps_grid = parse_floats(args.eps, "eps") if args.eps else [None]
    records, lines = [], []
    for eps in eps_grid:
        mechs = {i: s.build(eps) for i, s in specs.items()}
        report = rho(UtilityQuery(x, mechs, region, args.omega, args.tau, slack, args.joint_delta, model))
        records.append({
            "family": ",".join(sorted({m.label for m in mechs.values()})),
            "epsilon": eps if eps is not None else ",".join(f"{mechs[i].epsilon:g}" for i in sorted(mechs)),
            "theta_or_rect": str(region),
            "rho": report.rho,
            "rho_without_slack": report.rho_without_slack,
            "rho_with_slack": report.rho_with_slack,
            "per_dim_probs": list(report.per_dim_probs),
            "composed_eps": report.composed_privacy.epsilon,
            "composed_delta": report.composed_privacy.delta,
            "statement": report.statement,
        })
        lines.append(report.statement)
        lines.append(f"  rho = {report.rho:.6f} (without slack {report.rho_without_slack:.6f}, "
                     f"with slack {report.rho_with_slack:.6f}); region {region}")
    return Output("\n".join(lines) + "\n", records, list(records[0]))


def cmd_select_eps(args) -> Output:
    x = parse_point(args.point)
    region = region_from_args(args, x) or Hyperrectangle.ball(x, 0.3)
    dims = [d - 1 for d in args.dims] if args.dims else None
    lo, hi = parse_floats(args.eps_range, "eps-range")
    eps = select_epsilon(args.target, args.family, x, region, (lo, hi), args.delta, args.k, dims,
                         args.joint_delta, args.slack, args.precision)
    record = {"family": args.family, "target": args.target, "epsilon": eps, "theta_or_rect": str(region)}
    return Output(f"{eps:.4f}\n", [record], list(record))


def _families(text: str) -> list[str]:
    fams = [f.strip().lower() for f in text.split(",") if f.strip()]
    for f in fams:
        if f not in FAMILIES:
            raise UsageError(f"unknown mechanism {f!r}; choose from {', '.join(FAMILIES)}")
    return fams


def _table(records: list[dict], columns: Sequence[str]) -> str:
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.4f}"
        if isinstance(v, list):
            return "[" + ", ".join(fmt(u) for u in v) + "]"
        return str(v)

    rows = [[fmt(r[c]) for c in columns] for r in records]
    widths = [max(len(c), *(len(row[j]) for row in rows)) if rows else len(c) for j, c in enumerate(columns)]
    out = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    out += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows]
    return "\n".join(line.rstrip() for line in out) + "\n"


def cmd_sweep(args) -> Output:
    x = parse_point(args.point)
    region = region_from_args(argparse.Namespace(lower=args.lower, upper=args.upper, theta=None), x)
    thetas = None if region is not None else parse_floats(args.thetas, "thetas")
    rows = sweep(_families(args.families), parse_floats(args.eps, "eps"), thetas, x, region,
                 args.gaussian_delta, args.indicator_delta, args.k, workers=args.threads)
    records = [r.as_record() for r in rows]
    shown = [{**rec, "family": rec["family"] + (" *" if rec["best"] else "")} for rec in records]
    return Output(_table(shown, SWEEP_COLUMNS), records, SWEEP_COLUMNS + ("best",))


def cmd_empirical(args) -> Output:
    model = resolve_model(args.model)
    x = parse_point(args.point, model.dimension)
    mechs = {i: s.build(args.eps) for i, s in parse_assignment(args.mech, len(x)).items()}
    est = empirical_rho(model, x, mechs, args.n, args.seed, args.joint_delta)
    record = {"rho_hat": est.rho_hat, "preserved": est.preserved, "n": est.n, "halfwidth": est.hoeffding_halfwidth}
    if args.timing:
        record["t_sample_ms"] = est.elapsed_sampling * 1e3
        record["t_infer_ms"] = est.elapsed_inference * 1e3
    text = f"rho_hat = {est.rho_hat:.4f} +/- {est.hoeffding_halfwidth:.4f} ({est.preserved}/{est.n} preserved)\n"
    if args.timing:
        text += f"sampling {record['t_sample_ms']:.3f} ms, inference {record['t_infer_ms']:.3f} ms\n"
    return Output(text, [record], list(record))


def cmd_compare(args) -> Output:
    model = resolve_model(args.model)
    x = parse_point(args.point, model.dimension)
    region = region_from_args(args, x)
    if region is None:
        config = _config(args)
        region = expand_hyperrectangle(model, x, find_radius(model, x, config), config)
    dims = [d - 1 for d in args.dims] if args.dims else None
    rows = compare(model, x, _families(args.families), parse_floats(args.eps, "eps"), region, args.n, args.seed,
                   dims, args.gaussian_delta, args.indicator_delta, args.k, args.repeats)
    records = [r.as_record() for r in rows]
    text = _table(records, ("family", "epsilon", "rho", "rho_hat", "halfwidth", "violation"))
    text += f"\nregion {region}\n\n" + render_cost_table(rows) + "\n"
    return Output(text, records, COMPARE_COLUMNS)


def cmd_fixtures_export(args) -> Output:
    names = args.names.split(",") if args.names else list(FIXTURES)
    target = Path(args.dir)
    target.mkdir(parents=True, exist_ok=True)
    records = []
    for name in names:
        if name not in FIXTURES:
            raise UsageError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
        path = target / f"{name}.json"
        save_model(FIXTURES[name](), path)
        records.append({"fixture": name, "path": str(path)})
    return Output("".join(f"{r['path']}\n" for r in records), records, ("fixture", "path"))


# --------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # one line, exit 2
        self.exit(2, f"{self.prog}: error: {message}\n")


def _env_seed() -> int:
    raw = os.environ.get("LDPU_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"LDPU_SEED must be an integer, got {raw!r}") from None


def _common(p: argparse.ArgumentParser, seed: bool = False) -> None:
    p.add_argument("--format", choices=("text", "csv", "json"), default="text", help="output format")
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--manifest", default=None, help="manifest path; <out>.manifest.json is used when omitted and --out is set")
    p.add_argument("--threads", type=int, default=1, help="maximum worker threads")
    if seed:
        p.add_argument("--seed", type=int, default=_env_seed(), help="RNG seed (env LDPU_SEED)")


def _robust_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float, default=0.02, help="misclassification tolerance")
    p.add_argument("--omega", type=float, default=0.05, help="confidence failure probability")
    p.add_argument("--kappa", type=float, default=0.01, help="radius precision")


def _region_flags(p: argparse.ArgumentParser, theta_help: str = "l-inf radius around the point") -> None:
    p.add_argument("--lower", default=None, help="comma-separated lower corner of the robust box")
    p.add_argument("--upper", default=None, help="comma-separated upper corner of the robust box")
    p.add_argument("--theta", type=float, default=None, help=theta_help)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="ldpu", description="Utility guarantees for classifiers under LDP perturbation.",
                     formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"ldpu {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, handler: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help, formatter_class=fmt)
        p.set_defaults(handler=handler)
        return p

    p = add("concentration", cmd_concentration, "probability that a mechanism's output lands in [a, b]")
    p.add_argument("--mech", required=True, help="mechanism family or family:eps[:delta][:k]")
    p.add_argument("--eps", type=float, default=None, help="privacy budget (overrides --mech)")
    p.add_argument("--delta", type=float, default=None, help="Gaussian PAC delta or indicator delta")
    p.add_argument("--k", type=int, default=None, help=f"grid size for discrete families (default {DEFAULT_GRID} when --mech gives none)")
    p.add_argument("--x", type=float, required=True, help="input value")
    p.add_argument("--a", type=float, default=0.0, help="interval lower end")
    p.add_argument("--b", type=float, default=1.0, help="interval upper end")
    p.add_argument("--theta", type=float, default=None, help="use [x - theta, x + theta] instead of --a/--b")
    _common(p)

    p = add("radius", cmd_radius, "probabilistic l-inf robustness radius of a classifier")
    p.add_argument("--model", required=True, help="model file or fixtures/NAME")
    p.add_argument("--point", required=True, help="comma-separated anchor point")
    _robust_flags(p)
    _common(p, seed=True)

    p = add("hyperrect", cmd_hyperrect, "radius search followed by hyperrectangle expansion")
    p.add_argument("--model", required=True, help="model file or fixtures/NAME")
    p.add_argument("--point", required=True, help="comma-separated anchor point")
    p.add_argument("--theta", type=float, default=None, help="start from this radius instead of searching")
    p.add_argument("--max-passes", type=int, default=3, help="expansion passes over all faces")
    _robust_flags(p)
    _common(p, seed=True)

    p = add("quantify", cmd_quantify, "theoretical utility guarantee rho and its statement")
    p.add_argument("--model", default=None, help="model file or fixtures/NAME (needed to search the region)")
    p.add_argument("--point", required=True, help="comma-separated anchor point")
    p.add_argument("--mech", required=True, help="family:eps[:delta][:k] for all dims, or 1=pm:2,2=krr:2:100")
    p.add_argument("--eps", default=None, help="comma-separated epsilon grid overriding the --mech budgets")
    _region_flags(p)
    p.add_argument("--expand", action="store_true", help="expand the searched radius into a hyperrectangle")
    p.add_argument("--slack", choices=("auto", "on", "off"), default="auto",
                   help="multiply by (1-omega)(1-tau); auto = on only for a searched radius")
    p.add_argument("--joint-delta", type=float, default=None, help="one privacy indicator over all dimensions")
    _robust_flags(p)
    _common(p, seed=True)

    p = add("select-eps", cmd_select_eps, "smallest epsilon whose rho reaches a target")
    p.add_argument("--target", type=float, required=True, help="required rho")
    p.add_argument("--family", default="laplace", choices=FAMILIES, help="mechanism family")
    p.add_argument("--delta", type=float, default=0.0, help="Gaussian PAC delta or indicator delta")
    p.add_argument("--k", type=int, default=DEFAULT_GRID, help="grid size for discrete families")
    p.add_argument("--point", default="0.5", help="comma-separated anchor point")
    _region_flags(p, "l-inf radius around the point (0.3 when no box is given)")
    p.add_argument("--dims", type=int, nargs="*", default=None, help="1-based sensitive dimensions (default all)")
    p.add_argument("--eps-range", default="0.01,20", help="search interval low,high")
    p.add_argument("--joint-delta", type=float, default=None, help="one privacy indicator over all dimensions")
    p.add_argument("--slack", action="store_true", help="include the (1-omega)(1-tau) factor")
    p.add_argument("--precision", type=float, default=1e-3, help="bisection precision")
    _common(p)

    p = add("sweep", cmd_sweep, "rho over mechanism families, budgets and regions")
    p.add_argument("--families", default=",".join(FAMILIES), help="comma-separated families")
    p.add_argument("--eps", default=",".join(f"{e:g}" for e in DEFAULT_SWEEP_EPS), help="epsilon grid")
    p.add_argument("--thetas", default=",".join(f"{t:g}" for t in DEFAULT_SWEEP_THETA), help="radius grid")
    p.add_argument("--point", default="0.5", help="comma-separated anchor point")
    p.add_argument("--lower", default=None, help="use this box (with --upper) instead of --thetas")
    p.add_argument("--upper", default=None, help="upper corner of the box")
    p.add_argument("--gaussian-delta", type=float, default=DEFAULT_GAUSSIAN_DELTA, help="Gaussian PAC delta")
    p.add_argument("--indicator-delta", type=float, default=0.0, help="indicator delta for pure families (0 = off)")
    p.add_argument("--k", type=int, default=DEFAULT_GRID, help="grid size for discrete families")
    _common(p)

    p = add("empirical", cmd_empirical, "Monte-Carlo estimate of prediction preservation")
    p.add_argument("--model", required=True, help="model file or fixtures/NAME")
    p.add_argument("--point", required=True, help="comma-separated anchor point")
    p.add_argument("--mech", required=True, help="family:eps[:delta][:k] for all dims, or 1=pm:2,2=krr:2:100")
    p.add_argument("--eps", type=float, default=None, help="budget overriding --mech")
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLES, help="perturbed samples")
    p.add_argument("--joint-delta", type=float, default=None, help="one privacy indicator over all dimensions")
    p.add_argument("--timing", action="store_true", help="report wall-clock timings (not reproducible)")
    _common(p, seed=True)

    p = add("compare", cmd_compare, "theoretical rho against the empirical estimate, with timings")
    p.add_argument("--model", required=True, help="model file or fixtures/NAME")
    p.add_argument("--point", required=True, help="comma-separated anchor point")
    p.add_argument("--families", default=",".join(FAMILIES), help="comma-separated families")
    p.add_argument("--eps", default="1,2,4,8", help="epsilon grid")
    _region_flags(p)
    p.add_argument("--dims", type=int, nargs="*", default=None, help="1-based sensitive dimensions (default all)")
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLES, help="perturbed samples per estimate")
    p.add_argument("--repeats", type=int, default=10, help="timing repetitions (median reported)")
    p.add_argument("--gaussian-delta", type=float, default=DEFAULT_GAUSSIAN_DELTA, help="Gaussian PAC delta")
    p.add_argument("--indicator-delta", type=float, default=0.0, help="indicator delta for pure families (0 = off)")
    p.add_argument("--k", type=int, default=DEFAULT_GRID, help="grid size for discrete families")
    _robust_flags(p)
    _common(p, seed=True)

    p = add("fixtures", None, "built-in fixture models")
    fsub = p.add_subparsers(dest="fixtures_command", required=True, parser_class=_Parser)
    e = fsub.add_parser("export", help="write fixture models as JSON files", formatter_class=fmt)
    e.set_defaults(handler=cmd_fixtures_export, command="fixtures export")
    e.add_argument("--dir", default="fixtures", help="target directory")
    e.add_argument("--names", default=None, help=f"comma-separated subset of {', '.join(FIXTURES)}")
    _common(e)

    p = add("replay", None, "re-run a command from its manifest")
    p.add_argument("manifest_path", help="manifest written by an earlier run")
    p.add_argument("--out", default=None, help="write to this path instead of the recorded one")
    p.set_defaults(handler=None)
    return parser


HANDLERS: dict[str, Callable] = {
    "concentration": cmd_concentration,
    "radius": cmd_radius,
    "hyperrect": cmd_hyperrect,
    "quantify": cmd_quantify,
    "select-eps": cmd_select_eps,
    "sweep": cmd_sweep,
    "empirical": cmd_empirical,
    "compare": cmd_compare,
    "fixtures export": cmd_fixtures_export,
}

_NOT_PARAMETERS = ("handler", "out", "manifest", "fixtures_command")


def _execute(command: str, params: dict, out: str | None, manifest: str | None) -> None:
    args = argparse.Namespace(**params, out=out, manifest=manifest)
    result = HANDLERS[command](args)
    text = result.render(params["format"])
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    manifest_path = manifest or (f"{out}.manifest.json" if out else None)
    if manifest_path:
        record = {
            "command": command,
            "parameters": params,
            "seed": params.get("seed"),
            "tool_version": __version__,
            "outputs": [out] if out else [],
        }
        Path(manifest_path).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _replay(path: str, out: str | None) -> None:
    try:
        record = json.loads(Path(path).read_text(encoding="utf-8"))
        command, params = record["command"], record["parameters"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a readable manifest ({exc})") from None
    if command not in HANDLERS:
        raise UsageError(f"{path}: unknown command {command!r}")
    outputs = record.get("outputs") or [None]
    target = out or outputs[0]
    _execute(command, params, target, f"{target}.manifest.json" if out else None)


def run(argv: Sequence[str] | None = None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.command == "replay":
            _replay(args.manifest_path, args.out)
            return 0
        params = {k: v for k, v in vars(args).items() if k not in _NOT_PARAMETERS}
        _execute(args.command, params, args.out, args.manifest)
        return 0
    except SystemExit as exc:
        return int(exc.code or 0)
    except (LDPUError, ValueError) as exc:
        code = 2 if isinstance(exc, ValueError) else 1
        print(f"ldpu: error: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"ldpu: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
