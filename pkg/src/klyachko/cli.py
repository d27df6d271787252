"""Command-line entry point: ``klyachko <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import charts as charts_mod
from . import experiment, geometry, lhv, quantum
from .geometry import PENTAGON_EDGES, PENTAGRAM_EDGES

COMMANDS = ("geometry", "charts", "inequalities", "lhv-bounds", "simulate", "chsh")


# ---------------------------------------------------------------------------
# argument parsing


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--trials", type=_positive_int, default=100_000)
    common.add_argument("--model", choices=("quantum", "lhv", "biased"), default="quantum")
    common.add_argument("--mixture", default="m21", help="m21, m20, or a weights file")
    common.add_argument("--bias", default="half", help="half, quantum-matching, or a weights file")
    common.add_argument("--pairing", choices=sorted(experiment.PAIRINGS), default="mixed")
    common.add_argument("--tolerance", type=_positive_float, default=1e-12)
    common.add_argument("--sigma", type=_positive_float, default=4.0,
                        help="pass band for simulated estimates, in standard errors")
    common.add_argument("--workers", type=_positive_int, default=1)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", type=Path, default=None)

    parser = argparse.ArgumentParser(prog="klyachko", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "geometry": "pentagram coordinates, derived scalars and identity residuals",
        "charts": "the 11 noncontextual charts",
        "inequalities": "quantum values against the noncontextual bounds",
        "lhv-bounds": "exact range of the pentagon sum over marginal-1/3 mixtures",
        "simulate": "Monte Carlo run of the two-particle protocol",
        "chsh": "CHSH correlators and the maximum over vertex quadruples",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


# ---------------------------------------------------------------------------
# weight files


def read_weights(path: Path) -> list:
    """Whitespace-separated weights, ``#`` starts a comment; fractions like ``1/3`` allowed."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    try:
        values = [Fraction(t) for t in tokens]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{path}: {exc}") from None
    if sum(values) != 1 and len(values) == lhv.N_CHARTS:
        return [float(v) for v in values]
    return values


def load_mixture(spec: str) -> lhv.MixtureWeights:
    if spec in ("m21", "m20"):
        m21, m20 = lhv.solve_marginal_mixtures()
        return m21 if spec == "m21" else m20
    values = read_weights(Path(spec))
    return lhv.MixtureWeights(tuple(values))


def load_bias(spec: str) -> lhv.BiasSpec:
    if spec == "half":
        return lhv.half_half_bias()
    if spec == "quantum-matching":
        return lhv.quantum_matching_bias()
    values = read_weights(Path(spec))
    n = lhv.N_CHARTS
    if len(values) != 5 * n:
        raise ValueError(f"{spec}: bias file needs 5 x {n} weights, got {len(values)}")
    rows = {}
    for k, edge in enumerate(PENTAGRAM_EDGES):
        row = values[k * n:(k + 1) * n]
        if sum(row) != 1:
            row = [float(x) for x in row]
        rows[edge] = lhv.MixtureWeights(tuple(row))
    return lhv.BiasSpec(rows)


def build_model(args) -> experiment.ModelSpec:
    if args.model == "quantum":
        return experiment.Quantum()
    if args.model == "lhv":
        return experiment.SharedChartLHV(load_mixture(args.mixture))
    return experiment.BiasedSingleParticle(load_bias(args.bias))


# ---------------------------------------------------------------------------
# commands; each returns (results, residuals, verdicts, ok)


def _num(x):
    return float(x) if isinstance(x, Fraction) else x


def _vec(v) -> list[float]:
    return [float(x) for x in v]


def cmd_geometry(args):
    frame = geometry.build_pentagram()
    results = {
        "vertices": {str(k): _vec(frame.vertex(k)) for k in range(1, 6)},
        "psi": _vec(frame.psi),
        "r": frame.r,
        "s": frame.s,
        "phi": frame.phi,
        "chi": frame.chi,
        "cos_phi": math.cos(frame.phi),
        "cos_chi": math.cos(frame.chi),
        "completions": {f"{a}{b}": _vec(basis.completion)
                        for (a, b), basis in zip(PENTAGRAM_EDGES, geometry.context_bases(frame))},
    }
    residuals = geometry.frame_residuals(frame)
    verdicts = {k: "pass" if v <= args.tolerance else "fail" for k, v in residuals.items()}
    return results, residuals, verdicts, all(v == "pass" for v in verdicts.values())


def cmd_charts(args):
    all_charts = charts_mod.enumerate_charts()
    counts = {k.name: 0 for k in charts_mod.ChartClass}
    for c in all_charts:
        counts[c.kind.name] += 1
    results = {
        "count": len(all_charts),
        "class_counts": counts,
        "charts": [{"index": j + 1, "values": list(c.values), "class": c.kind.name}
                   for j, c in enumerate(all_charts)],
    }
    ok = len(all_charts) == 11 and counts == {"C0": 1, "C1": 5, "C2": 5}
    return results, {}, {"census": "pass" if ok else "fail"}, ok


def cmd_inequalities(args):
    frame = geometry.build_pentagram()
    state = quantum.make_entangled_state()
    m21, m20 = lhv.solve_marginal_mixtures()
    bounds = lhv.pentagon_sum_bounds()
    k_quantum = quantum.single_particle_klyachko_sum(frame)
    p_quantum = quantum.pentagon_sum_quantum(state, frame)
    chsh = quantum.max_chsh(state, frame)
    results = {
        "klyachko_quantum": k_quantum,
        "klyachko_noncontextual_bound": 2.0,
        "case_iii_quantum": quantum.joint_distribution(state, 1, 4, frame).p11,
        "pentagon_quantum": p_quantum,
        "pentagon_noncontextual_min": float(bounds.min),
        "pentagon_noncontextual_max": float(bounds.max),
        "m21_edge_joint": float(lhv.pentagon_edge_joint(m21, (1, 4))),
        "m20_edge_joint": float(lhv.pentagon_edge_joint(m20, (1, 4))),
        "chsh_max": chsh.value,
        "chsh_bound": 2.0,
    }
    residuals = {
        "klyachko_quantum": abs(k_quantum - math.sqrt(5.0)),
        "pentagon_quantum": abs(p_quantum - 5.0 / 3.0 * geometry.GOLDEN_CONJUGATE**2),
    }
    tol = args.tolerance
    verdicts = {
        "klyachko": "violated" if k_quantum > 2.0 + tol else "satisfied",
        "pentagon": "violated" if p_quantum < float(bounds.min) - tol else "satisfied",
        "chsh": "violated" if chsh.value > 2.0 + tol else "satisfied",
    }
    ok = verdicts == {"klyachko": "violated", "pentagon": "violated", "chsh": "satisfied"}
    return results, residuals, verdicts, ok


def cmd_lhv_bounds(args):
    bounds = lhv.pentagon_sum_bounds()
    verts = lhv.feasible_vertices()
    results = {
        "min": float(bounds.min),
        "max": float(bounds.max),
        "min_exact": str(bounds.min),
        "max_exact": str(bounds.max),
        "argmin": [str(w) for w in bounds.argmin],
        "argmax": [str(w) for w in bounds.argmax],
        "vertices": [[str(w) for w in v] for v in verts],
        "vertex_pentagon_sums": [str(lhv.pentagon_sum(v)) for v in verts],
    }
    ok = bounds.min == Fraction(2, 3) and bounds.max == Fraction(5, 6)
    return results, {}, {"bounds": "pass" if ok else "fail"}, ok


def cmd_chsh(args):
    frame = geometry.build_pentagram()
    state = quantum.make_entangled_state()
    table = quantum.correlator_table(state, frame)
    best = quantum.max_chsh(state, frame)
    results = {
        "correlators": {str(a): _vec(table[a - 1]) for a in range(1, 6)},
        "same_vertex": float(table[0, 0]),
        "pentagram_edge": float(table[0, 1]),
        "pentagon_edge": float(table[PENTAGON_EDGES[0][0] - 1, PENTAGON_EDGES[0][1] - 1]),
        "max": best.value,
        "argmax": {"x": best.x, "x_prime": best.x_prime, "y": best.y, "y_prime": best.y_prime},
        "bound": 2.0,
    }
    residuals = {
        "same_vertex": abs(results["same_vertex"] - 1.0),
        "pentagram_edge": abs(results["pentagram_edge"] + 1.0 / 3.0),
    }
    ok = best.value <= 2.0 + args.tolerance and abs(results["pentagon_edge"]) <= 1.0 / 3.0
    return results, residuals, {"chsh": "satisfied" if ok else "violated"}, ok


def cmd_simulate(args):
    frame = geometry.build_pentagram()
    model = build_model(args)
    stats = experiment.run_trials(model, frame, args.trials, args.seed, args.pairing, workers=args.workers)
    available = stats.estimates()
    targets = {k: v for k, v in experiment.analytic_targets(model, frame, args.pairing).items()
               if k in available}
    verdict = experiment.evaluate(stats, targets, sigma=args.sigma)
    results = stats.to_dict()
    results["checks"] = {
        c.name: {"estimate": c.estimate, "se": c.se, "target": c.target, "z": c.z, "passed": c.passed}
        for c in verdict.checks
    }
    residuals = {c.name: abs(c.estimate - c.target) for c in verdict.checks}
    verdicts = {c.name: "pass" if c.passed else "fail" for c in verdict.checks}
    verdicts.update({f"inequality_{k}": v for k, v in verdict.inequalities.items()})
    return results, residuals, verdicts, verdict.passed


HANDLERS = {
    "geometry": cmd_geometry,
    "charts": cmd_charts,
    "inequalities": cmd_inequalities,
    "lhv-bounds": cmd_lhv_bounds,
    "simulate": cmd_simulate,
    "chsh": cmd_chsh,
}


# ---------------------------------------------------------------------------
# output


def _flatten(prefix: str, obj, out: list):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out.append((prefix, obj))


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    rows: list = []
    for section in ("results", "residuals", "verdicts"):
        _flatten(section, report[section], rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["section", "quantity", "value"])
        for key, value in rows:
            section, _, name = key.partition(".")
            writer.writerow([section, name, repr(value) if isinstance(value, float) else value])
        return buf.getvalue()
    lines = [f"# klyachko {report['command']}"]
    lines += [f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}" for k, v in rows]
    lines.append(f"runtime_ms = {report['runtime_ms']}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        results, residuals, verdicts, ok = HANDLERS[args.command](args)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "command"}
    report = {
        "command": args.command,
        "config": config,
        "results": results,
        "residuals": residuals,
        "verdicts": verdicts,
        "runtime_ms": int(round((time.perf_counter() - start) * 1000)),
    }
    text = render(report, args.format)
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
