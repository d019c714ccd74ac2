"""Command-line workbench.

Subcommands: models (catalog inspection), simulate (seeded runs), expand
(expansion tables), verify (theorem harnesses), report (render stored
reports/runs to CSV + figures).  All primary outputs are deterministic:
fixed JSON key order, floats at 17 significant digits.

Exit codes: 0 success/pass, 1 fail against fixtures, 2 usage error,
3 runtime error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import estimators as _est
from . import fixtures as _fixtures
from . import models as _models
from . import report as _report
from . import simulator as _sim
from . import verify as _verify
from .serialize import format_float, json_dumps

EXIT_OK = 0
EXIT_FIXTURE_FAIL = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgeworth",
        description="Edgeworth expansions for one-split branching random walk profiles",
    )
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(command=None)

    p_models = sub.add_parser("models", help="inspect the model catalog")
    models_sub = p_models.add_subparsers(dest="models_command", required=True)
    p_list = models_sub.add_parser("list", help="list builtin models")
    p_list.set_defaults(func=cmd_models_list)
    p_desc = models_sub.add_parser("describe", help="print model parameters as JSON")
    p_desc.add_argument("name")
    p_desc.set_defaults(func=cmd_models_describe)

    p_sim = sub.add_parser("simulate", help="run the one-split BRW engine")
    _add_run_args(p_sim)
    p_sim.add_argument("--replicates", type=int, default=1)
    p_sim.add_argument("--jobs", type=int, default=1)
    p_sim.add_argument("--out-dir", default=None)
    p_sim.add_argument("--keep-positions", action="store_true")
    p_sim.add_argument("--profile-csv", action="store_true", help="write per-snapshot CSVs")
    p_sim.set_defaults(func=cmd_simulate)

    p_exp = sub.add_parser("expand", help="tabulate the expansion prediction")
    p_exp.add_argument("--model", default="bst")
    p_exp.add_argument("--model-file", default=None)
    p_exp.add_argument("--beta", type=float, default=0.0)
    p_exp.add_argument("--r", type=int, default=1)
    p_exp.add_argument("--n", type=float, required=True)
    group = p_exp.add_mutually_exclusive_group(required=True)
    group.add_argument("--chi-file", default=None, help="LimitEstimate JSON")
    group.add_argument("--chi-zero", action="store_true", help="all chi corrections zero")
    group.add_argument("--mean", action="store_true", help="mean-profile expansion")
    p_exp.add_argument("--k-range", default=None, help="lo:hi levels (default: center +- 6 sigma sqrt(w))")
    p_exp.add_argument("--out", default=None)
    p_exp.set_defaults(func=cmd_expand)

    p_ver = sub.add_parser("verify", help="run a theorem harness")
    p_ver.add_argument(
        "harness",
        choices=[
            "clt",
            "saddle",
            "mode",
            "width",
            "occupation-a",
            "occupation-b",
            "occupation-c",
            "classical",
            "mean",
        ],
    )
    _add_run_args(p_ver)
    p_ver.add_argument("--replicates", type=int, default=1)
    p_ver.add_argument("--jobs", type=int, default=1)
    p_ver.add_argument("--r", type=int, default=0)
    p_ver.add_argument("--beta", type=float, default=0.0)
    p_ver.add_argument("--alpha", type=float, default=0.0)
    p_ver.add_argument("--a-offset", type=int, default=0)
    p_ver.add_argument("--c-exponent", type=float, default=0.75, help="case (b): c_n = (log n)^e")
    p_ver.add_argument("--uncentered", action="store_true", help="occupation-a: uncentered variant")
    p_ver.add_argument("--k-interval", default=None, help="saddle: lo:hi tilt interval")
    p_ver.add_argument("--exact-chi", action="store_true", help="saddle: skip interpolation")
    p_ver.add_argument("--n-min", type=int, default=10**4)
    p_ver.add_argument("--chi-order", type=int, default=2)
    p_ver.add_argument("--pmf", default=None, help="classical: e.g. 0:0.2,1:0.5,2:0.3")
    p_ver.add_argument("--n-list", default="64,128,256,512", help="classical: comma list")
    p_ver.add_argument("--out-dir", default=None)
    p_ver.add_argument("--fixtures", default=None)
    p_ver.add_argument("--check", action="store_true", help="pass/fail against fixtures")
    p_ver.add_argument("--no-figures", action="store_true")
    p_ver.set_defaults(func=cmd_verify)

    p_rep = sub.add_parser("report", help="render stored reports or runs to CSV + figures")
    p_rep.add_argument("--input", nargs="+", required=True, help="report or run JSON files")
    p_rep.add_argument("--out-dir", required=True)
    p_rep.add_argument("--no-figures", action="store_true")
    p_rep.set_defaults(func=cmd_report)

    return parser


def _add_run_args(parser: argparse.ArgumentParser):
    parser.add_argument("--model", default="bst")
    parser.add_argument("--model-file", default=None)
    parser.add_argument("--n", type=float, default=1e5)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--schedule", default=None, help="'geom:n0,gamma' or comma list of steps")
    parser.add_argument("--config", default=None, help="flat key = value file; flags override")


def _apply_config(args: argparse.Namespace, parser_defaults: dict):
    """Merge a flat config file under explicit CLI flags.

    Keys use the flag spelling with dashes or underscores; unknown keys are
    rejected.  A config value applies only where the flag was left at its
    default.
    """
    if getattr(args, "config", None) is None:
        return
    entries = {}
    with open(args.config, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{args.config}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            entries[key.strip().replace("-", "_")] = value.strip()
    for key, value in entries.items():
        if key not in parser_defaults:
            raise ValueError(f"unknown config key {key!r}")
        if getattr(args, key) == parser_defaults[key]:
            current = parser_defaults[key]
            if isinstance(current, bool):
                setattr(args, key, value.lower() in ("1", "true", "yes"))
            elif isinstance(current, int):
                setattr(args, key, int(float(value)))
            elif isinstance(current, float):
                setattr(args, key, float(value))
            else:
                setattr(args, key, value)


def _sub_defaults(command: str) -> dict:
    parser = build_parser()
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction) and command in action.choices:
            sub = action.choices[command]
            return {a.dest: a.default for a in sub._actions if a.dest != "help"}
    return {}


def _resolve_model(args) -> _models.ModelSpec:
    if getattr(args, "model_file", None):
        return _models.load_model_file(args.model_file)
    return _models.get_model(args.model)


def _resolve_schedule(args, n_target: int):
    spec = getattr(args, "schedule", None)
    if spec is None:
        return None
    if spec.startswith("geom:"):
        n0, gamma = spec[len("geom:") :].split(",")
        return _sim.default_schedule(n_target, n0=int(float(n0)), gamma=float(gamma))
    return [int(float(tok)) for tok in spec.split(",")]


def _print(obj):
    sys.stdout.write(json_dumps(obj, indent=2) + "\n")


# ---------------------------------------------------------------------------


def cmd_models_list(args) -> int:
    _print({"models": sorted(_models.BUILTIN_MODELS)})
    return EXIT_OK


def cmd_models_describe(args) -> int:
    model = _models.get_model(args.name)
    _print(_models.describe(model))
    return EXIT_OK


def cmd_simulate(args) -> int:
    _apply_config(args, _sub_defaults("simulate"))
    model = _resolve_model(args)
    n_target = int(args.n)
    schedule = _resolve_schedule(args, n_target)
    runs = _sim.grow_ensemble(
        model, n_target, args.seed, args.replicates, schedule=schedule, jobs=args.jobs
    )
    for r_index, run in enumerate(runs):
        for snap in run.snapshots:
            stats = _sim.mode_width(snap)
            w0 = _sim.laplace_W(snap, model, 0.0)
            print(
                f"replicate={r_index} n={snap.n} S={snap.S} mode={stats.u_n} "
                f"width={stats.M_n} W0={format_float(w0)}"
            )
        if args.out_dir:
            path = _sim.save_run(run, args.out_dir, inline_counts=not args.profile_csv)
            print(f"wrote {path}")
    return EXIT_OK


def cmd_expand(args) -> int:
    model = _resolve_model(args)
    n = int(args.n)
    w = math.log(n)
    r = args.r
    beta = args.beta
    if args.mean:
        chi = _models.mean_chi_set(model, beta, r)
        W = _models.limit_mean_W(model, beta)
    elif args.chi_zero:
        chi = (0.0,) * (r + 1)
        W = float(model.m0) if beta == 0.0 else 1.0
    else:
        import json

        with open(args.chi_file, "r", encoding="utf-8") as fh:
            est = _est.LimitEstimate.from_json(json.load(fh))
        if abs(est.beta - beta) > 1e-12:
            raise ValueError(f"chi file is for beta = {est.beta}, requested {beta}")
        chi = est.chi_with_log_w()[: r + 1] if r > 0 else (math.log(est.w_hat),)
        W = est.w_hat
    c = _models.cumulants(model, beta, kmax=r + 2, chi=chi)
    from .expansion import edgeworth_terms, expansion_value

    terms = edgeworth_terms(r, c)
    if args.k_range:
        lo, _, hi = args.k_range.partition(":")
        ks = range(int(lo), int(hi) + 1)
    else:
        center = c.mu * w
        half = 6.0 * float(c.sigma) * math.sqrt(w)
        ks = range(int(math.floor(center - half)), int(math.ceil(center + half)) + 1)
    lines = []
    header = ["k", "x_n_k"] + [f"term{j}" for j in range(r + 1)] + ["total"]
    lines.append(",".join(header))
    sigma = float(c.sigma)
    for k in ks:
        x = (k - c.mu * w) / (sigma * math.sqrt(w))
        parts = []
        total = 0.0
        for j in range(r + 1):
            val = expansion_value(j, c, W, w, k, terms=terms[: j + 1]) - total
            parts.append(val)
            total += val
        row = [str(k), format_float(x)] + [format_float(p) for p in parts] + [
            format_float(total)
        ]
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    _apply_config(args, _sub_defaults("verify"))
    model = _resolve_model(args) if args.harness != "classical" else None
    report = _build_report(args, model)
    if args.check:
        fixtures = _fixtures.load_fixtures(args.fixtures)
        _fixtures.apply_fixtures(report, fixtures)
    out_dir = args.out_dir or "."
    paths = _report.write_report(report, out_dir, figures=not args.no_figures)
    summary = {
        "theorem": report.theorem,
        "checks": report.checks,
        "passed": report.passed,
        "outputs": paths,
    }
    _print(summary)
    if args.check and not report.passed:
        return EXIT_FIXTURE_FAIL
    return EXIT_OK


def _build_report(args, model) -> _verify.TheoremReport:
    harness = args.harness
    if harness == "classical":
        if not args.pmf:
            raise ValueError("classical harness requires --pmf")
        pmf = {}
        for tok in args.pmf.split(","):
            k, _, p = tok.partition(":")
            pmf[int(k)] = p
        n_list = [int(float(tok)) for tok in args.n_list.split(",")]
        return _verify.classical_edgeworth_check(pmf, n_list, args.r)

    n_target = int(args.n)
    schedule = _resolve_schedule(args, n_target)
    if harness in ("clt", "saddle", "mode", "width"):
        run = _sim.grow(model, n_target, args.seed, schedule=schedule)
        if harness == "saddle":
            if args.k_interval:
                lo, _, hi = args.k_interval.partition(":")
                interval = (float(lo), float(hi))
            else:
                blo, bhi = model.beta_range()
                blo = max(blo, -1.0)
                bhi = min(bhi, 1.0)
                interval = (0.6 * blo, 0.6 * bhi)
            return _verify.saddle_sup_error(
                run, model, args.r, interval, exact_chi=args.exact_chi
            )
        chi_source = _est.estimate_chi(
            run,
            model,
            args.beta if harness == "clt" else 0.0,
            J=max(args.chi_order, args.r, 2),
        )
        if harness == "clt":
            return _verify.clt_sup_error(run, model, args.r, args.beta, chi_source)
        if harness == "mode":
            return _verify.mode_check(run, model, chi_source, n_min=args.n_min)
        return _verify.width_check(run, model, chi_source)

    runs = _sim.grow_ensemble(
        model, n_target, args.seed, args.replicates, schedule=schedule, jobs=args.jobs
    )
    if harness == "mean":
        return _verify.mean_profile_check(runs, model, args.r, args.beta)
    case = harness.split("-", 1)[1]
    if case == "a" and args.uncentered:
        return _verify.occupation_check(
            runs, model, "uncentered", beta=args.beta, alpha=args.alpha, n_min=args.n_min
        )
    kwargs = dict(beta=args.beta, alpha=args.alpha, a_offset=args.a_offset, n_min=args.n_min)
    if case == "b":
        exponent = args.c_exponent
        kwargs["c_rule"] = lambda n: math.log(n) ** exponent
    return _verify.occupation_check(runs, model, case, **kwargs)


def cmd_report(args) -> int:
    import json

    os.makedirs(args.out_dir, exist_ok=True)
    for path in args.input:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        if "theorem" in obj:
            rep = _report.load_report(path)
            paths = _report.write_report(rep, args.out_dir, figures=not args.no_figures)
        elif "snapshots" in obj:
            run = _sim.load_run(path)
            base = os.path.splitext(os.path.basename(path))[0]
            snap = run.final
            csv_path = os.path.join(args.out_dir, f"{base}_profile.csv")
            _sim.write_profile_csv(snap, csv_path)
            paths = {"csv": csv_path}
            if not args.no_figures:
                png_path = os.path.join(args.out_dir, f"{base}_profile.png")
                _report.render_profile_figure(snap, run.model_name, png_path)
                paths["png"] = png_path
        else:
            raise ValueError(f"{path}: neither a theorem report nor a run trace")
        _print({"input": path, "outputs": paths})
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
