"""Command-line experiment runner.

    anisojump <command> --config FILE [--seed N] [--threads K] [--out DIR]
              [--set key=value]... [--dump-paths]

Each run writes ``<command>.csv`` (primary table), ``<command>.json``
(summary) and, for tables with a natural x/y pair, ``<command>.svg`` into the
output directory.  Exit status: 0 ok, 1 usage, 2 validation failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import estimators as est
from . import geometry as geo
from . import quadrature as qd
from . import regvar
from .config import COMMANDS, ConfigError, ExperimentConfig, load_config
from .kernel import GridSpec, nondegeneracy_matrix, validate_kernel
from .simulate import SimConfig, levy_system_paths, trace_paths

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
VERSION = f"v{__version__}"


class Result:
    """Primary table plus summary for one run."""

    def __init__(self, header, rows=(), summary=None, plot=None, status=EXIT_OK):
        self.header = list(header)
        self.rows = [list(r) for r in rows]
        self.summary = dict(summary or {})
        self.plot = plot  # (x column, y column, loglog)
        self.status = status
        self.eps = []  # per-row epsilon; falls back to the configured one
        self.extra_files = {}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % (float(v) + 0.0)
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def _sim(cfg: ExperimentConfig, eps=None, seed=None) -> SimConfig:
    return SimConfig(cfg.epsilon if eps is None else eps, cfg.max_events, None, cfg.seed if seed is None else seed)


def _eps_for(cfg, r):
    rel = cfg.params.get("epsilon_rel")
    return cfg.epsilon if rel is None else rel * r


# ---------------------------------------------------------------------------
# commands


def cmd_validate(cfg, threads, dump):
    p = cfg.params
    grid = GridSpec(p["n_radial"], p["radial_max"], p["n_points"], p["tol"], cfg.seed, p["spatial_box"])
    report = validate_kernel(cfg.kernel, grid)
    rows = [(c.name, c.passed, c.worst_margin, c.detail) for c in report.checks]
    res = Result(["check", "passed", "worst_margin", "detail"], rows,
                 {"passed": report.passed, "failed": list(report.failed())})
    res.status = EXIT_OK if report.passed else EXIT_INVALID
    return res


def cmd_exit_time(cfg, threads, dump):
    p = cfg.params
    k = cfg.kernel
    rows, eps_col = [], []
    for r in p["radii"]:
        ball = geo.Ball(p["center"], r)
        start = p["center"] if isinstance(p["start"], str) else p["start"]
        eps = _eps_for(cfg, r)
        st = est.estimate_exit_stats(k, start, ball, cfg.n, _sim(cfg, eps), threads=threads)
        rows.append((r, st.tau.mean, st.tau.std_error, st.normalized.mean, st.normalized.std_error,
                     st.tau.censored_fraction, st.mean_events, st.degenerate))
        eps_col.append(eps)
    radii = np.array(p["radii"])
    means = np.array([row[1] for row in rows])
    norm = np.array([row[3] for row in rows])
    slope = float(np.polyfit(np.log(radii), np.log(means), 1)[0]) if len(radii) >= 2 else float("nan")
    res = Result(["r", "mean_tau", "se_tau", "normalized", "se_normalized", "censored_fraction", "mean_events",
                  "degenerate"], rows,
                 {"slope": slope, "alpha": k.alpha, "normalized_spread": float(norm.max() / norm.min())},
                 plot=("r", "mean_tau", True))
    res.eps = eps_col
    if dump and p["dump_replicas"] > 0:
        r0 = p["radii"][0]
        start = p["center"] if isinstance(p["start"], str) else p["start"]
        trace = trace_paths(k, start, geo.Ball(p["center"], r0), _sim(cfg, _eps_for(cfg, r0)),
                            range(p["dump_replicas"]))
        d = k.dim
        header = ["replica", "time"] + [f"x_pre_{i}" for i in range(d)] + [f"x_post_{i}" for i in range(d)] + [
            "fictitious"]
        res.extra_files["paths.csv"] = (header, trace)
    return res


def cmd_survival(cfg, threads, dump):
    p = cfg.params
    k = cfg.kernel
    alpha = k.alpha
    rows, eps_col = [], []
    for r in p["radii"]:
        scale = r**alpha / float(k.ell(r))
        times = [s * scale for s in p["times"]]
        eps = _eps_for(cfg, r)
        ests = est.estimate_survival(k, p["center"], geo.Ball(p["center"], r), times, cfg.n, _sim(cfg, eps), threads)
        for s, (t, e) in zip(p["times"], ests):
            rows.append((r, t, s, e.mean, e.std_error, e.mean * scale / t))
            eps_col.append(eps)
    norm = np.array([row[5] for row in rows])
    pos = norm[norm > 0.0]
    res = Result(["r", "t", "scaled_time", "probability", "se", "normalized"], rows,
                 {"max_normalized": float(norm.max()),
                  "spread": float(pos.max() / pos.min()) if pos.size else float("nan")})
    res.eps = eps_col
    return res


def cmd_hitting(cfg, threads, dump):
    p = cfg.params
    k = cfg.kernel
    lam = p["lam"] if p["lam"] is not None else 0.45 * geo.lambda_max(geo.governing_angle(k))
    rows = est.estimate_ks_ratio(k, p["center"], p["r"], lam, p["fractions"], cfg.n, _sim(cfg),
                                 start=p["start"], threads=threads)
    table = [(row.fraction, row.probability.mean, row.probability.std_error, row.volume_ratio,
              row.ratio if row.volume_ratio > 0 else float("nan")) for row in rows]
    ratios = [t[4] for t in table if t[3] > 0]
    return Result(["fraction", "probability", "se", "volume_ratio", "ratio"], table,
                  {"lam": lam, "min_ratio": min(ratios) if ratios else float("nan")},
                  plot=("volume_ratio", "probability", True))


def cmd_harmonic(cfg, threads, dump):
    p = cfg.params
    d = cfg.kernel.dim
    samples = est.harmonic_samples(cfg.kernel, p["domain"], p["data"], p["points"], cfg.n, _sim(cfg), threads)
    rows = []
    for pt, row in zip(p["points"], samples):
        e = est._estimate_row(row)
        rows.append((*pt, e.mean, e.std_error, e.censored_fraction))
    return Result([f"x_{i}" for i in range(d)] + ["value", "se", "censored_fraction"], rows)


def cmd_harnack(cfg, threads, dump):
    p = cfg.params
    k = cfg.kernel
    if p["amplitudes"] is not None:
        r = p["radii"][0]
        eps = _eps_for(cfg, r)
        scan = est.signed_harnack_scan(k, p["center"], r, p["data"], p["amplitudes"], p["c1"], cfg.n,
                                       _sim(cfg, eps), n_probes=p["n_probes"], threads=threads)
        rows = zip(scan.amplitudes, scan.sup, scan.inf, scan.inf_domain, scan.tail, scan.holds_with_tail,
                   scan.holds_without_tail)
        res = Result(["amplitude", "sup", "inf", "inf_domain", "tail_term", "holds_with_tail",
                      "holds_without_tail"], rows,
                     {"r": r, "c1": scan.c1, "c2": scan.c2, "all_hold_with_tail": bool(scan.holds_with_tail.all()),
                      "any_fail_without_tail": bool((~scan.holds_without_tail).any())})
        res.eps = [eps] * len(res.rows)
        return res
    rows, eps_col = [], []
    for r in p["radii"]:
        eps = _eps_for(cfg, r)
        rep = est.harnack_report(k, p["center"], r, p["data"], cfg.n, _sim(cfg, eps), n_probes=p["n_probes"],
                                 c1=p["c1"], threads=threads)
        rows.append((r, rep.sup, rep.inf, rep.quotient, rep.tail_term, rep.c1, rep.c2, rep.flagged))
        eps_col.append(eps)
    qs = [row[3] for row in rows if row[3] is not None]
    summary = {"max_quotient": max(qs) if qs else None,
               "median_quotient": float(np.median(qs)) if qs else None,
               "tail_terms": [row[4] for row in rows]}
    res = Result(["r", "sup", "inf", "quotient", "tail_term", "c1", "c2", "flagged"], rows, summary,
                 plot=("r", "quotient", True))
    res.eps = eps_col
    return res


def cmd_restricted(cfg, threads, dump):
    p = cfg.params
    k = cfg.kernel
    lam = p["lam"] if p["lam"] is not None else 0.9 * geo.lambda_restricted(geo.governing_angle(k))
    out = est.restricted_harnack_check(k, p["center"], p["r"], lam, p["data"], cfg.n, _sim(cfg),
                                       n_probes=p["n_probes"], threads=threads)
    rows = [(lam, out.numerator.mean, out.numerator.std_error, out.denominator.mean, out.denominator.std_error,
             out.quotient, out.vacuous)]
    return Result(["lam", "numerator", "se_numerator", "denominator", "se_denominator", "quotient", "vacuous"],
                  rows, {"quotient": out.quotient, "vacuous": out.vacuous})


def cmd_hoelder(cfg, threads, dump):
    p = cfg.params
    fit = est.holder_fit(cfg.kernel, p["center"], p["R"], p["data"], p["scales"], cfg.n, _sim(cfg),
                         n_probes=p["n_probes"], threads=threads)
    rows = zip(fit.scales, fit.oscillations, fit.errors)
    return Result(["scale", "oscillation", "se"], rows, {"beta": fit.beta, "residual": fit.residual},
                  plot=("scale", "oscillation", True))


def cmd_levy(cfg, threads, dump):
    p = cfg.params
    count, comp = levy_system_paths(cfg.kernel, p["start"], p["set_a"], p["set_b"], cfg.n, _sim(cfg),
                                    horizon=p["horizon"], container=p.get("container"), threads=threads,
                                    angular_nodes=p["angular_nodes"])
    joint = count.std_error + comp.std_error
    diff = count.mean - comp.mean
    agree = abs(diff) <= 3.0 * joint
    res = Result(["count", "se_count", "compensator", "se_compensator", "difference", "joint_se", "agree"],
                 [(count.mean, count.std_error, comp.mean, comp.std_error, diff, joint, agree)],
                 {"agree": agree})
    res.status = EXIT_OK if agree else EXIT_INVALID
    return res


def cmd_nondegeneracy(cfg, threads, dump):
    p = cfg.params
    k = cfg.kernel
    d = k.dim
    norm = p["normalizer"]
    rows = []
    for rho in p["rhos"]:
        mat, eig = nondegeneracy_matrix(k, p["point"], rho, None if norm is None else (lambda _r: norm),
                                        n_angular=p["n_angular"])
        rows.append((rho, *mat.ravel(), eig[0], eig[-1]))
    header = ["rho"] + [f"a_{i}{j}" for i in range(d) for j in range(d)] + ["eig_min", "eig_max"]
    return Result(header, rows, {"min_eigenvalue": min(r[-2] for r in rows), "max_eigenvalue": max(r[-1] for r in rows)})


def cmd_eta(cfg, threads, dump):
    p = cfg.params
    gamma = cfg.kernel.radial
    rows = []
    for r in p["radii"]:
        for j in p["js"]:
            eta, root = qd.eta_rj(gamma, p["center"], r, j, n_probe=p["n_probe"])
            rows.append((r, j, eta, root))
    tail = [row[3] for row in rows if row[1] >= 5]
    return Result(["r", "j", "eta", "root"], rows, {"max_root_j_ge_5": max(tail) if tail else None})


def cmd_apply_l(cfg, threads, dump):
    p = cfg.params
    d = cfg.kernel.dim
    rows = [(*x, qd.apply_L(cfg.kernel, p["function"], x, form=p["form"], n_angular=p["n_angular"]))
            for x in p["points"]]
    return Result([f"x_{i}" for i in range(d)] + ["value"], rows)


def cmd_karamata(cfg, threads, dump):
    p = cfg.params
    ell = cfg.kernel.radial.ell
    fn = regvar.karamata_ratio_small if p["side"] == "small" else regvar.karamata_ratio_large
    reps = [fn(ell, p["beta"], r) for r in p["radii"]]
    return Result(["r", "ratio", "beta"], [(rep.r, rep.ratio, rep.beta) for rep in reps],
                  {"side": p["side"], "last_ratio": reps[-1].ratio}, plot=("r", "ratio", False))


def cmd_geometry(cfg, threads, dump):
    p = cfg.params
    inflate = p["inflate"]
    count = p["count"] if inflate is None else p["search"]
    rows = []
    failures = 0
    for i, (case, chain, margins, err) in enumerate(geo.chain_stress(count, cfg.seed, p["dims"], inflate)):
        ok = chain is not None and margins.ok
        failures += not ok
        ms = margins.as_tuple() if margins is not None else (float("nan"),) * 4
        rows.append((i, case.x0.size, case.lam / geo.lambda_max(geo.governing_angle(case.kernel)), *ms,
                     min(ms), ok))
        if inflate is not None and not ok:
            break  # directed search stops at the first counterexample
    header = ["case", "dim", "lam_over_max", "m1", "m2", "m3", "m4", "worst", "ok"]
    if inflate is None:
        res = Result(header, rows, {"cases": count, "failures": failures})
        res.status = EXIT_OK if failures == 0 else EXIT_INVALID
    else:
        res = Result(header, rows, {"inflate": inflate, "cases_searched": len(rows),
                                    "counterexample_found": failures > 0})
    return res


HANDLERS = {
    "validate": cmd_validate,
    "exit-time": cmd_exit_time,
    "survival": cmd_survival,
    "hitting": cmd_hitting,
    "harmonic": cmd_harmonic,
    "harnack": cmd_harnack,
    "restricted-harnack": cmd_restricted,
    "hoelder": cmd_hoelder,
    "levy-check": cmd_levy,
    "nondegeneracy": cmd_nondegeneracy,
    "eta": cmd_eta,
    "apply-l": cmd_apply_l,
    "karamata": cmd_karamata,
    "geometry-check": cmd_geometry,
}
assert set(HANDLERS) == set(COMMANDS)


# ---------------------------------------------------------------------------
# output


def _write_table(path: Path, header, rows, trailing):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header) + [name for name, _ in trailing])
        for i, row in enumerate(rows):
            extra = [vals[i] if isinstance(vals, list) else vals for _, vals in trailing]
            w.writerow([_fmt(v) for v in list(row) + extra])


def _write_plot(path: Path, res: Result, title: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xcol, ycol, loglog = res.plot
    xi, yi = res.header.index(xcol), res.header.index(ycol)
    pts = [(row[xi], row[yi]) for row in res.rows
           if row[xi] is not None and row[yi] is not None and (not loglog or (row[xi] > 0 and row[yi] > 0))]
    if not pts:
        return
    xs, ys = zip(*pts)
    with matplotlib.rc_context({"svg.hashsalt": "anisojump", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.plot(xs, ys, "o-")
        if loglog:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(xcol)
        ax.set_ylabel(ycol)
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)


def write_outputs(cfg: ExperimentConfig, res: Result, out_dir: Path, threads: int):
    out_dir.mkdir(parents=True, exist_ok=True)
    eps = res.eps if res.eps else cfg.epsilon
    trailing = [("seed", cfg.seed), ("eps", eps), ("n", cfg.n), ("version", VERSION)]
    _write_table(out_dir / f"{cfg.command}.csv", res.header, res.rows, trailing)
    for name, (header, rows) in res.extra_files.items():
        _write_table(out_dir / name, header, rows, [])
    summary = {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "command": cfg.command,
        "version": VERSION,
        "seed": cfg.seed,
        "epsilon": cfg.epsilon,
        "n": cfg.n,
        "status": res.status,
        "results": res.summary,
    }
    with (out_dir / f"{cfg.command}.json").open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(_jsonable(summary), indent=2))
        fh.write("\n")
    if cfg.plot and res.plot is not None:
        _write_plot(out_dir / f"{cfg.command}.svg", res, cfg.command)


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="anisojump", description="Anisotropic jump-process experiments.")
    ap.add_argument("--version", action="version", version=f"anisojump {VERSION}")
    ap.add_argument("command", choices=sorted(HANDLERS))
    ap.add_argument("--config", required=True, help="YAML experiment file")
    ap.add_argument("--seed", type=int, help="overrides the config seed")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for replicas")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config key, dotted path; repeatable")
    ap.add_argument("--dump-paths", action="store_true", help="write the event log of a few replicas")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("anisojump: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    try:
        cfg = load_config(args.config, args.command, overrides)
    except OSError as exc:
        print(f"anisojump: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"anisojump: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"anisojump: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        cfg.output = args.out
    try:
        res = HANDLERS[args.command](cfg, args.threads, args.dump_paths)
    except ValueError as exc:
        print(f"anisojump: validation failure: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, RuntimeError, FloatingPointError) as exc:
        print(f"anisojump: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_outputs(cfg, res, Path(cfg.output), args.threads)
    print(f"{args.command}: status {res.status}, results in {cfg.output}")
    return res.status


if __name__ == "__main__":
    sys.exit(main())
