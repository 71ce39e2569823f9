"""Command-line front end.

Subcommands: ``score`` (Vendi / Conditional-Vendi / Information-Vendi of a
paired dataset), ``bandwidth`` (variance-criterion sigma selection),
``decompose`` (per-prompt-mode diversity), and ``simulate`` (synthetic
trend experiments emitting plot-ready CSV).

Output is deterministic for a fixed config and seed: fixed key order,
floats at 17 significant digits, files written via temp-file + atomic
rename so partial reports are never left behind. Errors are reported as a
JSON object on stderr with a nonzero exit code. The environment variable
VENDI_THREADS caps BLAS parallelism.
"""

import argparse
import json
import os
import sys

from ._threads import apply_thread_cap

SIMULATE_SCENARIOS = (
    "mode_growth_specified",
    "mode_growth_unspecified",
    "substitution",
    "theorem1",
)


# ---------------------------------------------------------------------------
# Deterministic serialization
# ---------------------------------------------------------------------------

def format_float(value):
    """Render a float at 17 significant digits (bit-exact round trip)."""
    if value != value:
        return "NaN"
    if value == float("inf"):
        return "Infinity"
    if value == float("-inf"):
        return "-Infinity"
    return format(value, ".17g")


def _json_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    if isinstance(value, dict):
        inner = ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    try:
        import numpy as np
        if isinstance(value, np.integer):
            return str(int(value))
        if isinstance(value, np.floating):
            return format_float(float(value))
        if isinstance(value, np.ndarray):
            return _json_value(value.tolist())
    except ImportError:
        pass
    raise TypeError(f"cannot serialize {type(value)!r}")


def render_json(obj):
    return _json_value(obj) + "\n"


def render_csv(rows, header):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for key in header:
            v = row[key]
            if isinstance(v, bool):
                cells.append("true" if v else "false")
            elif isinstance(v, float):
                cells.append(format_float(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_output(text, path):
    """Write to ``path`` atomically, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text)
        return
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------

def _sigma_arg(text):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"sigma must be positive, got {value}")
    return value


def _parse_grid(text):
    """Candidate grid: 'lo:hi:count' (log-spaced) or comma-separated values."""
    import numpy as np
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("grid must be 'lo:hi:count' or 'v1,v2,...'")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        if lo <= 0 or hi <= lo or count < 1:
            raise argparse.ArgumentTypeError(f"bad grid range {text!r}")
        return np.logspace(np.log10(lo), np.log10(hi), count)
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise argparse.ArgumentTypeError("empty grid")
    return np.asarray(values)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="condvendi",
        description="Kernel-entropy diversity scores for conditional generative models.")
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", help="Vendi / Conditional-Vendi / Information-Vendi")
    score.add_argument("--x", required=True, help="generated-data embedding file")
    score.add_argument("--t", required=True, help="prompt embedding file")
    score.add_argument("--format", default="emb1", choices=("emb1", "csv", "npy"))
    score.add_argument("--alpha", type=float, default=1.0)
    score.add_argument("--sigma-x", type=_sigma_arg, default="auto")
    score.add_argument("--sigma-t", type=_sigma_arg, default="auto")
    score.add_argument("--out", default=None)
    fmt = score.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="output_format", action="store_const",
                     const="json", default="json")
    fmt.add_argument("--csv", dest="output_format", action="store_const", const="csv")
    score.add_argument("--seed", type=int, default=0)

    bw = sub.add_parser("bandwidth", help="variance-criterion bandwidth selection")
    bw.add_argument("--x", required=True)
    bw.add_argument("--format", default="emb1", choices=("emb1", "csv", "npy"))
    bw.add_argument("--alpha", type=float, default=1.0)
    bw.add_argument("--grid", type=_parse_grid, default=None,
                    help="'lo:hi:count' log-spaced or comma-separated sigmas "
                         "(default: median-distance anchored grid)")
    bw.add_argument("--trials", type=int, default=10)
    bw.add_argument("--subsample", type=int, default=None)
    bw.add_argument("--threshold", type=float, default=0.01)
    bw.add_argument("--seed", type=int, default=0)
    bw.add_argument("--out", default=None)
    fmt = bw.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="output_format", action="store_const",
                     const="json", default="json")
    fmt.add_argument("--csv", dest="output_format", action="store_const", const="csv")

    dec = sub.add_parser("decompose", help="per-prompt-mode diversity reports")
    dec.add_argument("--x", required=True)
    dec.add_argument("--t", required=True)
    dec.add_argument("--format", default="emb1", choices=("emb1", "csv", "npy"))
    dec.add_argument("--modes", type=int, default=3)
    dec.add_argument("--top-k", type=int, default=5)
    dec.add_argument("--alpha", type=float, default=1.0)
    dec.add_argument("--sigma-x", type=_sigma_arg, default="auto")
    dec.add_argument("--sigma-t", type=_sigma_arg, default="auto")
    dec.add_argument("--labels", default=None,
                     help="optional label file (one integer per line) for a "
                          "per-group conditional report")
    dec.add_argument("--seed", type=int, default=0)
    dec.add_argument("--out", default=None)

    sim = sub.add_parser("simulate", help="synthetic trend experiments (CSV)")
    sim.add_argument("--scenario", required=True, choices=SIMULATE_SCENARIOS)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default=None)
    sim.add_argument("--alpha", type=float, default=None,
                     help="entropy order (default 1, or 2 for theorem1)")
    sim.add_argument("--modes", type=int, default=None)
    sim.add_argument("--n-samples", type=int, default=None)
    sim.add_argument("--repeats", type=int, default=10,
                     help="seeds per sweep for the theorem1 scenario")
    return parser


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _load(path, fmt, modality):
    from .ingest import load_embeddings
    return load_embeddings(path, format=fmt, modality=modality)


def _resolve_sigma(sigma, emb, alpha, seed):
    if sigma != "auto":
        return float(sigma)
    from .bandwidth import select_bandwidth
    return select_bandwidth(emb, alpha=alpha, seed=seed).sigma


def cmd_score(args):
    from .ingest import pair
    from .scores import score_report

    x = _load(args.x, args.format, "image")
    t = _load(args.t, args.format, "text")
    d = pair(x, t)
    sigma_x = _resolve_sigma(args.sigma_x, x, args.alpha, args.seed)
    sigma_t = _resolve_sigma(args.sigma_t, t, args.alpha, args.seed)
    report = score_report(d, sigma_x, sigma_t, args.alpha).as_dict()
    if args.output_format == "csv":
        text = render_csv([report], header=list(report))
    else:
        text = render_json(report)
    write_output(text, args.out)


def cmd_bandwidth(args):
    from .bandwidth import select_bandwidth

    x = _load(args.x, args.format, "other")
    sel = select_bandwidth(x, alpha=args.alpha, candidates=args.grid,
                           trials=args.trials, subsample_size=args.subsample,
                           threshold=args.threshold, seed=args.seed)
    if args.output_format == "csv":
        rows = [{"sigma": float(s), "variance": float(v)}
                for s, v in zip(sel.candidates, sel.variances)]
        text = render_csv(rows, header=["sigma", "variance"])
    else:
        text = render_json({
            "sigma": sel.sigma,
            "threshold": sel.threshold,
            "trials": sel.trials,
            "subsample_size": sel.subsample_size,
            "seed": sel.seed,
            "no_candidate_passed": sel.no_candidate_passed,
            "candidates": [float(v) for v in sel.candidates],
            "variances": [float(v) for v in sel.variances],
        })
    write_output(text, args.out)


def _read_labels(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [int(line) for line in fh if line.strip()]


def cmd_decompose(args):
    from .decompose import mode_decomposition
    from .ingest import pair
    from .scores import group_conditional_report

    x = _load(args.x, args.format, "image")
    t = _load(args.t, args.format, "text")
    labels = _read_labels(args.labels) if args.labels else None
    d = pair(x, t, labels=labels)
    sigma_x = _resolve_sigma(args.sigma_x, x, args.alpha, args.seed)
    sigma_t = _resolve_sigma(args.sigma_t, t, args.alpha, args.seed)
    reports = mode_decomposition(d, sigma_x, sigma_t, num_modes=args.modes,
                                 alpha=args.alpha, top_k=args.top_k)
    payload = {
        "sigma_x": sigma_x,
        "sigma_t": sigma_t,
        "alpha": args.alpha,
        "modes": [
            {
                "mode_index": r.mode_index,
                "text_eigenvalue": r.text_eigenvalue,
                "mode_diversity": r.mode_diversity,
                "top_samples": list(r.top_samples),
                "degenerate": r.degenerate,
            }
            for r in reports
        ],
    }
    if labels is not None:
        group = group_conditional_report(d, sigma_x=sigma_x, alpha=args.alpha,
                                         sigma_t=sigma_t)
        payload["groups"] = {
            "aggregate": group.aggregate,
            "conditional_entropy_joint": group.conditional_entropy_joint,
            "per_group": [
                {
                    "group": e.group,
                    "weight": e.weight,
                    "conditional_entropy": e.conditional_entropy,
                    "vendi": e.vendi,
                }
                for e in group.per_group
            ],
        }
    write_output(render_json(payload), args.out)


def _simulate_mode_growth(args, specified):
    from .oracle import make_mode_sweep_dataset
    from .scores import score_report

    alpha = 1.0 if args.alpha is None else args.alpha
    max_modes = args.modes or 10
    rows = []
    for m in range(1, max_modes + 1):
        d = make_mode_sweep_dataset(m, specified=specified, seed=args.seed)
        rep = score_report(d, 1.0, 1.0, alpha)
        rows.append({
            "num_modes": m,
            "n": rep.n,
            "vendi": rep.vendi_x,
            "conditional_vendi": rep.conditional_vendi,
            "information_vendi": rep.information_vendi,
        })
    return rows, ["num_modes", "n", "vendi", "conditional_vendi", "information_vendi"]


def _simulate_substitution(args):
    from .oracle import make_correlated_pairs
    from .scores import score_report

    alpha = 1.0 if args.alpha is None else args.alpha
    n = args.n_samples or 256
    modes = args.modes or 8
    rows = []
    for rate in (0.0, 0.25, 0.5, 0.75, 1.0):
        d = make_correlated_pairs(n, num_modes=modes, substitution_rate=rate,
                                  seed=args.seed)
        rep = score_report(d, 1.0, 1.0, alpha)
        rows.append({
            "rate": rate,
            "information_vendi": rep.information_vendi,
            "vendi": rep.vendi_x,
            "conditional_vendi": rep.conditional_vendi,
        })
    return rows, ["rate", "information_vendi", "vendi", "conditional_vendi"]


def _simulate_aggregation(args):
    from .oracle import check_mixture_aggregation, separated_mixture_setup

    alpha = 2.0 if args.alpha is None else args.alpha
    modes = args.modes or 4
    n = args.n_samples or 2000
    rows = []
    for offset in range(args.repeats):
        seed = args.seed + offset
        spec, sampler, sigma_t, sigma_x = separated_mixture_setup(modes, seed=seed)
        rep = check_mixture_aggregation(spec, sampler, n, sigma_t=sigma_t,
                                        sigma_x=sigma_x, alpha=alpha)
        rows.append({
            "seed": seed,
            "gap": rep.gap,
            "bound": rep.bound,
            "vacuous": rep.vacuous,
            "passed": rep.passed,
        })
    return rows, ["seed", "gap", "bound", "vacuous", "passed"]


def cmd_simulate(args):
    if args.scenario == "mode_growth_specified":
        rows, header = _simulate_mode_growth(args, specified=True)
    elif args.scenario == "mode_growth_unspecified":
        rows, header = _simulate_mode_growth(args, specified=False)
    elif args.scenario == "substitution":
        rows, header = _simulate_substitution(args)
    else:
        rows, header = _simulate_aggregation(args)
    write_output(render_csv(rows, header), args.out)


COMMANDS = {
    "score": cmd_score,
    "bandwidth": cmd_bandwidth,
    "decompose": cmd_decompose,
    "simulate": cmd_simulate,
}


def main(argv=None):
    apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    from .errors import CondVendiError
    try:
        COMMANDS[args.command](args)
    except (CondVendiError, OSError) as exc:
        sys.stderr.write(render_json({
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
