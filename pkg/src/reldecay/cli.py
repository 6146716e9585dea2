"""``reldecay run|scan|validate <config>``."""
import argparse
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from . import amplitudes as amp
from . import analysis
from .config import load_config
from .errors import ConvergenceError, ParameterError, ReldecayError

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

LOGGER = logging.getLogger("reldecay")

PLOT_TEMPLATE = '''"""Plot P(t) from the reldecay CSV outputs on log-log axes.

Usage: python plot.py [output.png]
"""
import csv
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
SERIES = {files!r}

fig, ax = plt.subplots(figsize=(7, 5))
for name in SERIES:
    curves = {{}}
    with open(HERE / name, newline="") as fh:
        for row in csv.DictReader(fh):
            t, P = float(row["t_over_tau"]), float(row["P"])
            if t > 0 and P > 0:
                curves.setdefault(row["label"], ([], []))
                curves[row["label"]][0].append(t)
                curves[row["label"]][1].append(P)
    for label, (t, P) in curves.items():
        ax.loglog(t, P, label=label)
ax.set_xlabel("t / tau")
ax.set_ylabel("P(t)")
ax.legend(fontsize="small")
ax.grid(True, which="both", alpha=0.3)
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else HERE / "survival.png", dpi=150)
'''


class _Writer:
    """Sequential output writer that remembers every file it produced."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.files = []

    def path(self, name):
        self.files.append(name)
        return self.dir / name


def _series_for(cfg, grid, engine, threads):
    dist = cfg.dist
    out = [("rest.csv", amp.survival_rest(dist, grid, eps=cfg.eps, engine=engine, threads=threads))]
    if cfg.p is not None:
        s = amp.survival_momentum(dist, cfg.p, grid, eps=cfg.eps, engine=engine, threads=threads)
        out.append(("momentum.csv", s))
    else:
        for model in cfg.phase_models:
            with warnings.catch_warnings():
                # already reported once by the config parser
                warnings.simplefilter("ignore", amp.RegimeWarning)
                s = amp.survival_velocity_frame(
                    dist, cfg.smearing, cfg.v, cfg.x_rules[model], model, grid,
                    eps=cfg.eps, engine=engine, threads=threads)
            out.append((f"velocity_{model.value}.csv", s))
    return out


def _manifest(w, cfg, engine, notes):
    lines = ["# reldecay manifest", f"version = {__version__}", f"engine = {engine}", "", "[files]"]
    listed = sorted(w.files + ["manifest.txt"])
    lines += listed
    lines += ["", "[parameters]"] + cfg.echo()
    if notes:
        lines += ["", "[notes]"] + notes
    w.path("manifest.txt").write_text("\n".join(lines) + "\n")


def execute(cfg, out_dir, threads=1, engine="fast", command="run", stream=None):
    """Run a parsed config; returns the exit status."""
    stream = stream or sys.stdout
    w = _Writer(out_dir)
    try:
        w.dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out_dir}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO

    status = EXIT_OK
    notes = []
    deviations, transitions, scan = [], [], None
    try:
        if command == "run" and not cfg.scan_only:
            grid = cfg.grid()
            series = _series_for(cfg, grid, engine, threads)
            for name, s in series:
                s.to_csv(w.path(name))
                if s.notes:
                    notes.append(f"{name}: {len(s.notes)} point(s) annotated")
                if s.wholly_failed:
                    notes.append(f"{name}: every point failed")
                    status = EXIT_NUMERIC
            if cfg.regime_warning:
                notes.append("regime: " + cfg.regime_warning)

            if cfg.compare:
                provider = amp.rest_provider(cfg.dist, eps=cfg.eps, engine=engine)
                for name, s in series[1:]:
                    try:
                        deviations.append(analysis.dilation_compare(s, provider, cfg.gamma, cfg.window))
                    except ParameterError as exc:
                        notes.append(f"compare {name}: {exc}")
                        status = EXIT_NUMERIC
                analysis.write_deviation_csv(deviations, w.path("compare.csv"))
            if cfg.transition:
                for name, s in series:
                    try:
                        transitions.append(analysis.transition_time(s, cfg.threshold, cfg.anchor))
                    except ParameterError as exc:
                        notes.append(f"transition {name}: {exc}")
                        status = EXIT_NUMERIC
                analysis.write_transition_csv(transitions, w.path("transition.csv"))
            plot = PLOT_TEMPLATE.format(files=[name for name, _ in series])
            w.path("plot.py").write_text(plot)

        if cfg.scan:
            scan = analysis.consistency_scan(cfg.scan_m, cfg.scan_p, cfg.scan_v, threads=threads)
            analysis.write_consistency_csv(scan, w.path("consistency_scan.csv"))
        elif command == "scan":
            print("error: config has no scan section (analyses.scan = true)", file=sys.stderr)
            return EXIT_CONFIG

        _manifest(w, cfg, engine, notes)
    except OSError as exc:
        print(f"error: writing outputs failed: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConvergenceError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    text = analysis.summary_block(deviations, transitions, scan)
    if text:
        print(text, file=stream)
    for n in notes:
        print(f"note: {n}", file=stream)
    return status


def _describe(cfg):
    if cfg.scan_only:
        return (f"scan-only config: {len(cfg.scan_m)} x {len(cfg.scan_p)} x {len(cfg.scan_v)} grid")
    d = cfg.dist
    kin = f"p={cfg.p:g}" if cfg.p is not None else f"v={cfg.v:g}"
    lines = [f"distribution {d.kind.value}: M={d.M:g} Gamma={d.Gamma:g} mu0={d.mu0:g}",
             f"kinematics {kin} (gamma={cfg.gamma:.6g})",
             f"grid: {cfg.spacing}, t_max={cfg.t_max:g} tau, n={cfg.n_points}"]
    if cfg.v is not None:
        rules = ", ".join(f"{m.value}[x={cfg.x_rules[m]}]" for m in cfg.phase_models)
        lines.append(f"models: {rules}; smearing p_bar={cfg.smearing.p_bar:g} "
                     f"sigma_p={cfg.smearing.sigma_p:g}")
    return "\n".join(lines)


def build_parser():
    ap = argparse.ArgumentParser(prog="reldecay",
                                 description="Survival probabilities of moving unstable states.")
    ap.add_argument("--version", action="version", version=f"reldecay {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("run", "compute series and analyses"),
                       ("scan", "run only the consistency-residual scan"),
                       ("validate", "parse and check a config")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config")
        p.add_argument("--output-dir", default=None,
                       help="overrides output_dir from the config")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--oracle", action="store_true",
                       help="use the brute-force quadrature (cross-checks only; slow)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", amp.RegimeWarning)
            cfg = load_config(args.config)
        for c in caught:
            print(f"warning: {c.message}", file=sys.stderr)
    except ReldecayError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(_describe(cfg))
        print("config ok")
        return EXIT_OK
    out = args.output_dir or cfg.output_dir
    engine = "oracle" if args.oracle else "fast"
    return execute(cfg, out, threads=args.threads, engine=engine, command=args.command)


if __name__ == "__main__":
    sys.exit(main())
