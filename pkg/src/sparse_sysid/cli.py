"""Command-line interface.

Subcommands: ``gen``, ``degree``, ``identify``, ``predict``, ``identify-ode``
and ``simulate``. Exit status is 0 on success, 1 on a runtime or numerical
failure and 2 on a usage error. Output files are written atomically.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import datagen
from .dictionary import (
    DictionaryError,
    FiniteDiffSpec,
    IdentifiedDynamics,
    identify_ode,
    load_dictionary,
    simulate,
)
from .integrate import DivergenceError
from .io import CsvFormatError, atomic_write, dumps_report, format_csv, read_csv
from .obstruction import degree
from .sdsi import SdsiModel, commutator_norms, identify, predict, rmse
from .solver import SolverConfig
from .trajectory import GroupRep, TimeSeries, trivial_group

RUNTIME_ERRORS = (ValueError, ArithmeticError, OSError, KeyError, DivergenceError)


class CommandError(Exception):
    """Failure that should be reported with exit status 1."""


def _emit(args, payload: dict, human: str | None = None) -> None:
    if args.json or human is None:
        sys.stdout.write(dumps_report(payload))
    else:
        sys.stdout.write(human.rstrip("\n") + "\n")


def _load_group(spec: str | None, n: int) -> GroupRep:
    if spec is None or spec == "trivial":
        return trivial_group(n)
    if spec == "d3":
        if n != 6:
            raise CommandError("the built-in d3 group acts on 6-dimensional states")
        return datagen.d3_representation()
    with open(spec, encoding="utf-8") as fh:
        doc = json.load(fh)
    mats = []
    for k, m in enumerate(doc):
        a = np.asarray(m, dtype=float)
        if a.ndim == 3 and a.shape[-1] == 2:
            a = a[..., 0] + 1j * a[..., 1]
        if a.ndim != 2:
            raise CommandError(f"group element {k} is not a matrix")
        mats.append(a)
    return GroupRep(np.array(mats))


def _parse_vector(text: str) -> np.ndarray:
    vals = []
    for tok in text.split(","):
        tok = tok.strip().replace("i", "j")
        vals.append(complex(tok) if "j" in tok else float(tok))
    return np.array(vals)


# subcommands --------------------------------------------------------------

def cmd_gen(args):
    if args.kind == "triangle":
        series = datagen.triangle_wave(args.T)
    elif args.kind == "duffing":
        params = datagen.DuffingParams(args.alpha, args.beta, args.sigma, args.eta)
        series = datagen.duffing_network(args.T, args.dt or 1e-3, params)
    else:
        series = datagen.nlse_grid(args.T, args.dt or 0.01, q=args.q,
                                   record_every=args.record_every)
    if args.noise_scale:
        series = datagen.add_noise(series, datagen.NoiseSpec(args.noise_scale, args.seed))
    # ODE datasets carry a time column so the sample spacing travels with the file
    atomic_write(args.out, format_csv(series, with_time=args.kind != "triangle"))
    info = {"kind": args.kind, "n": series.n, "T": series.T, "dt": series.dt, "out": args.out}
    _emit(args, info, f"{args.kind}: n={series.n} T={series.T} dt={series.dt:g} -> {args.out}")


def cmd_degree(args):
    series = read_csv(args.input)
    if args.train:
        series = series.window(0, args.train)
    G = _load_group(args.group, series.n)
    report = degree(series, G, args.delta, lag_cap=args.max_lag, full=args.full)
    rows = [f"degree {report.degree}  (delta={report.delta:g})", "lag  rank_next  rank_prev"]
    rows += [f"{L:3d}  {a:9d}  {b:9d}" for L, (a, b) in sorted(report.rank_trace.items())]
    _emit(args, report.to_dict(), "\n".join(rows))


def _holdout_rmse(model, full: TimeSeries, train: int, symmetrized: bool) -> float:
    steps = full.T - 1
    pred = predict(model, steps, use_symmetrized=symmetrized)
    # pred row k forecasts sample k + 2 (1-based)
    return rmse(pred.samples[train - 1 :], full.samples[train:])


def cmd_identify(args):
    full = read_csv(args.input)
    train = args.train or full.T
    if not 2 < train <= full.T:
        raise CommandError(f"--train must be in (2, {full.T}]")
    series = full.window(0, train)
    G = _load_group(args.group, series.n)
    kw = dict(delta=args.delta, epsilon=args.epsilon, max_sweeps=args.max_sweeps,
              lag_cap=args.lag_cap)
    model, bounds = identify(series, G, lag_min=args.lag_min,
                             use_degree=not args.fixed_lag, **kw)
    trail = []
    if args.auto_escalate:
        cap = args.lag_cap or (train + 1) // 2
        err = _holdout_rmse(model, full, train, args.symmetrized)
        trail.append({"lag": model.L, "rmse": err})
        L = model.L
        while err > args.rmse_target and L < cap and train > 2 * (L + 1):
            L += 1
            model, bounds = identify(series, G, lag_min=L, use_degree=False, **kw)
            err = _holdout_rmse(model, full, train, args.symmetrized)
            trail.append({"lag": L, "rmse": err})
    atomic_write(args.model_out, model.dumps())
    comm = commutator_norms(model.A_sym, model.group, model.L)
    report = {
        "lag": model.L,
        "bounds": bounds.to_dict(),
        "commutator_norms": comm.tolist(),
        "nonzeros": int(np.count_nonzero(model.A_hat)),
    }
    if trail:
        report["escalation"] = trail
    if args.report_out:
        atomic_write(args.report_out, dumps_report(report))
    human = (
        f"lag L={model.L}  nonzeros={report['nonzeros']}  truncation rank={bounds.truncation_rank}\n"
        f"residual={bounds.residual:.3e}  nu={bounds.nu:.3e}  "
        f"bound {'holds' if bounds.bound_satisfied else 'VIOLATED'}"
        f"{'  (vacuous: ||A||_F > 1)' if bounds.vacuous else ''}\n"
        f"max commutator norm={comm.max():.3e}"
    )
    if trail:
        human += "\n" + "\n".join(f"  L={t['lag']:3d}  rmse={t['rmse']:.4g}" for t in trail)
    _emit(args, report, human)


def cmd_predict(args):
    with open(args.model, encoding="utf-8") as fh:
        model = SdsiModel.loads(fh.read())
    pred = predict(model, args.steps, use_symmetrized=args.symmetrized)
    atomic_write(args.out, format_csv(pred, with_time=False))
    info = {"steps": args.steps, "out": args.out}
    if args.truth:
        truth = read_csv(args.truth)
        # forecast row k corresponds to sample k + 2 (1-based)
        avail = min(pred.T, truth.T - 1)
        start = max(args.eval_from - 2, 0)
        if avail <= start:
            raise CommandError("truth file does not overlap the evaluation window")
        info["rmse"] = rmse(pred.samples[start:avail], truth.samples[start + 1 : avail + 1])
        info["evaluated_samples"] = avail - start
        if args.report_out:
            atomic_write(args.report_out, dumps_report([{"lag": model.L, "rmse": info["rmse"]}]))
    human = f"wrote {args.steps} forecast rows to {args.out}"
    if "rmse" in info:
        human += f"\nRMSE over {info['evaluated_samples']} samples: {info['rmse']:.6g}"
    _emit(args, info, human)


def cmd_identify_ode(args):
    series = read_csv(args.input)
    if args.dt:
        series = TimeSeries(series.samples, args.dt, series.names)
    if args.train:
        series = series.window(0, args.train)
    dfile = load_dictionary(args.dict, series.names)
    dirichlet = args.dirichlet or dfile.dirichlet
    fd = FiniteDiffSpec(args.fd_order, zero_components=(0, series.n - 1) if dirichlet else ())
    cfg = SolverConfig(args.delta, args.max_sweeps, args.epsilon)
    model = identify_ode(series, dfile.maps, cfg, fd, dfile.feature_scale,
                         normalize=args.normalize or dfile.normalize)
    atomic_write(args.out, json.dumps(model.to_dict(), indent=2) + "\n")
    doc = model.to_dict()
    _emit(args, {"model": doc["model"], "residual": model.residual,
                 "truncation_rank": model.truncation_rank}, model.format())


def cmd_simulate(args):
    with open(args.dynamics, encoding="utf-8") as fh:
        model = IdentifiedDynamics.from_dict(json.load(fh))
    if "," in args.x0 or not args.x0.endswith(".csv"):
        x0 = _parse_vector(args.x0)
    else:
        x0 = read_csv(args.x0).samples[0]
    traj = simulate(model, x0, args.dt, args.steps)
    atomic_write(args.out, format_csv(traj, with_time=True))
    _emit(args, {"steps": args.steps, "out": args.out},
          f"wrote {traj.T} states to {args.out}")


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparse-sysid", description=__doc__.splitlines()[0])
    p.add_argument("--json", action="store_true", help="print reports as JSON")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("kind", choices=["triangle", "duffing", "nlse"])
    g.add_argument("--T", type=int, required=True, help="number of recorded samples")
    g.add_argument("--dt", type=float, help="integration step (duffing 1e-3, nlse 0.01)")
    g.add_argument("--noise-scale", type=float, default=0.0, help="gaussian noise std")
    g.add_argument("--seed", type=int, default=0, help="noise seed")
    g.add_argument("--alpha", type=float, default=1.0)
    g.add_argument("--beta", type=float, default=-36.0)
    g.add_argument("--sigma", type=float, default=0.0)
    g.add_argument("--eta", type=float, default=0.2)
    g.add_argument("--q", type=float, default=1.0, help="nlse nonlinearity")
    g.add_argument("--record-every", type=int, default=5, help="nlse steps per sample")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("degree", help="identification degree and rank trace")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--delta", type=float, required=True)
    d.add_argument("--group", help="'trivial', 'd3' or a JSON file of matrices")
    d.add_argument("--max-lag", type=int, help="largest lag examined")
    d.add_argument("--train", type=int, help="use only the first TRAIN samples")
    d.add_argument("--full", action="store_true", help="scan every lag, not just up to the first hit")
    d.set_defaults(func=cmd_degree)

    i = sub.add_parser("identify", help="identify a lag-embedded linear model")
    i.add_argument("--in", dest="input", required=True)
    i.add_argument("--delta", type=float, required=True)
    i.add_argument("--epsilon", type=float, required=True)
    i.add_argument("--lag-min", type=int, default=1)
    i.add_argument("--fixed-lag", action="store_true", help="use --lag-min without the degree search")
    i.add_argument("--group", help="'trivial', 'd3' or a JSON file of matrices")
    i.add_argument("--train", type=int, help="use only the first TRAIN samples")
    i.add_argument("--max-sweeps", type=int, help="solver sweeps (default n*L)")
    i.add_argument("--auto-escalate", action="store_true",
                   help="raise the lag until the holdout RMSE meets --rmse-target")
    i.add_argument("--rmse-target", type=float)
    i.add_argument("--lag-cap", type=int, help="largest lag tried")
    i.add_argument("--symmetrized", action="store_true", help="score escalation with A_sym")
    i.add_argument("--model-out", required=True)
    i.add_argument("--report-out")
    i.set_defaults(func=cmd_identify)

    r = sub.add_parser("predict", help="forecast with an identified model")
    r.add_argument("--model", required=True)
    r.add_argument("--steps", type=int, required=True)
    r.add_argument("--symmetrized", action="store_true")
    r.add_argument("--truth", help="CSV of reference samples for an RMSE report")
    r.add_argument("--eval-from", type=int, default=2,
                   help="first 1-based sample index included in the RMSE")
    r.add_argument("--out", required=True)
    r.add_argument("--report-out")
    r.set_defaults(func=cmd_predict)

    o = sub.add_parser("identify-ode", help="dictionary identification of an ODE")
    o.add_argument("--in", dest="input", required=True)
    o.add_argument("--dict", required=True, help="JSON dictionary file")
    o.add_argument("--fd-order", type=int, choices=[1, 2, 4], default=4)
    o.add_argument("--dt", type=float, help="sample spacing (default from the file)")
    o.add_argument("--delta", type=float, required=True)
    o.add_argument("--epsilon", type=float, required=True)
    o.add_argument("--max-sweeps", type=int, default=10)
    o.add_argument("--train", type=int, help="use only the first TRAIN samples")
    o.add_argument("--normalize", action="store_true", help="scale feature columns to unit norm")
    o.add_argument("--dirichlet", action="store_true", help="zero the first and last derivative")
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_identify_ode)

    s = sub.add_parser("simulate", help="integrate identified dynamics")
    s.add_argument("--dynamics", required=True)
    s.add_argument("--x0", required=True, help="comma list, or a CSV whose first row is used")
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "identify" and args.auto_escalate:
        if args.rmse_target is None or args.train is None:
            parser.error("--auto-escalate needs --rmse-target and --train")
    try:
        args.func(args)
    except (CommandError, CsvFormatError, DictionaryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
