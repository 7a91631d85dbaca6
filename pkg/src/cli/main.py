"""
markoff-bq command line.

Exit codes: 0 success, 2 invalid input or any library error, 3 when a
single-point decision (bq, or a 1x1 slice) is undetermined within budget.
"""
import argparse
import json
import logging
import sys

from bowditch.bq import VerdictKind, bq_test, omega_k
from cli.config import (
    default_workers,
    load_config,
    parse_complex,
    parse_complex_list,
    parse_float_list,
    parse_size,
    pick,
    resolve_budget,
    resolve_mu,
    resolve_tau,
    resolve_tolerances,
    resolve_triple,
)
from markoff.algebra import COLORS, degenerate_data, derived_constants
from markoff.errors import ConfigError, InvalidInput, MarkoffError
from markoff.tree import Slope, trace_at_slope
from realcase.real_characters import classify_real, construct_real_seed, ergodicity_decision
from render.pixmap import parse_palette, write_ppm, write_sidecar
from render.slices import LinePlane, PixelKind, SliceSpec, XyPlane, evaluate_slice

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNDETERMINED = 3


def format_complex(z):
    if z.imag == 0:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}i"


def complex_json(z):
    return [z.real, z.imag]


def _global_flags():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--json", action="store_true", help="print machine-readable JSON")
    parent.add_argument("--config", default=None, help="JSON config file; flags win over its values")
    parent.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    return parent


def _parameter_flags():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--mu", default=None, help="p,q,r,s")
    parent.add_argument("--tau", default=None, help="boundary traces a,b,c,d")
    return parent


def _search_flags():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--eps-segment", type=float, default=None)
    parent.add_argument("--eps-degenerate", type=float, default=None)
    parent.add_argument("--eps-tie", type=float, default=None)
    parent.add_argument("--max-descent-steps", type=int, default=None)
    parent.add_argument("--max-vertices", type=int, default=None)
    return parent


def build_parser():
    parser = argparse.ArgumentParser(prog="markoff-bq", description="Q-conditions for four-holed sphere characters")
    commands = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags()]
    params = _parameter_flags()
    search = _search_flags()

    trace = commands.add_parser("trace", parents=common + [params], help="trace at a slope")
    trace.add_argument("--triple", default=None, help="x,y,z at the base vertex")
    trace.add_argument("--slope", default=None, help="p/q, p or inf")

    bq = commands.add_parser("bq", parents=common + [params, search], help="decide the Q-conditions")
    bq.add_argument("--triple", default=None)

    omega = commands.add_parser("omega", parents=common + [params, search], help="regions with |trace| <= k")
    omega.add_argument("--triple", default=None)
    omega.add_argument("--k", type=float, default=None)

    slice_ = commands.add_parser("slice", parents=common + [params, search], help="render a slice to PPM")
    slice_.add_argument("--mode", choices=("xy", "line"), default=None)
    slice_.add_argument("--x", default=None, help="fixed x in xy mode")
    slice_.add_argument("--branch", choices=("plus", "minus"), default=None)
    slice_.add_argument("--base", default=None, help="base triple in line mode")
    slice_.add_argument("--direction", default=None, help="dx,dy,dz in line mode")
    slice_.add_argument("--window", default=None, help="re_min,re_max,im_min,im_max")
    slice_.add_argument("--size", default=None, help="WIDTHxHEIGHT")
    slice_.add_argument("--threads", type=int, default=None, help="worker processes")
    slice_.add_argument("--out", default=None, help="PPM path")
    slice_.add_argument("--sidecar", default=None, help="JSON sidecar path")

    commands.add_parser("classify", parents=common + [params], help="real topology and ergodicity")

    seed = commands.add_parser("seed", parents=common + [params, search], help="explicit real BQ seed")
    seed.add_argument("--y", type=float, default=None)

    commands.add_parser("constants", parents=common + [params], help="derived constants and S_mu")
    return parser


def verdict_to_dict(verdict):
    document = {
        "kind": verdict.kind.value,
        "big_l": verdict.big_l,
        "vertices_used": verdict.vertices_used,
    }
    if verdict.kind is VerdictKind.ACCEPTED:
        document["omega_l"] = [{"slope": str(s), "value": complex_json(v)} for s, v in verdict.omega_l]
        document["sink_slopes"] = [str(s) for s in verdict.stats.sink_slopes]
        document["arrows_inward"] = verdict.stats.arrows_inward
        document["fork_bound_violations"] = verdict.fork_bound_violations
        document["near_degenerate"] = verdict.near_degenerate
    elif verdict.kind is VerdictKind.REJECTED:
        slope, value = verdict.witness
        document["reason"] = verdict.reason.value
        document["witness"] = {"slope": str(slope), "value": complex_json(value)}
    else:
        document["frontier_size"] = verdict.frontier_size
    return document


def verdict_to_text(verdict):
    if verdict.kind is VerdictKind.ACCEPTED:
        lines = [f"accepted (L = {verdict.big_l:.6g}, {verdict.vertices_used} vertices)"]
        lines += [f"  {s}: {format_complex(v)}" for s, v in verdict.omega_l]
        if verdict.near_degenerate:
            lines.append("  caveat: a region lies near the degenerate locus")
        return "\n".join(lines)
    if verdict.kind is VerdictKind.REJECTED:
        slope, value = verdict.witness
        return f"rejected({verdict.reason.value}) at slope {slope}: {format_complex(value)}"
    return f"undetermined ({verdict.vertices_used} vertices used, {verdict.frontier_size} open)"


def _mu_json(mu, tau):
    document = {"mu": [complex_json(v) for v in mu.as_tuple()]}
    if tau is not None:
        document["tau"] = [complex_json(v) for v in tau.as_tuple()]
    return document


def cmd_trace(args, config):
    mu, tau = resolve_mu(args, config)
    t = resolve_triple(pick(args.triple, config, "triple"))
    slope_text = pick(args.slope, config, "slope")
    if slope_text is None:
        raise ConfigError("slope is required")
    slope = Slope.parse(str(slope_text))
    value = trace_at_slope(t, mu, slope)
    document = {**_mu_json(mu, tau), "slope": str(slope), "value": complex_json(value)}
    return EXIT_OK, document, f"trace({slope}) = {format_complex(value)}"


def cmd_bq(args, config):
    mu, tau = resolve_mu(args, config)
    t = resolve_triple(pick(args.triple, config, "triple"))
    verdict = bq_test(t, mu, resolve_tolerances(args, config), resolve_budget(args, config))
    code = EXIT_UNDETERMINED if verdict.undetermined else EXIT_OK
    return code, {**_mu_json(mu, tau), **verdict_to_dict(verdict)}, verdict_to_text(verdict)


def cmd_omega(args, config):
    mu, tau = resolve_mu(args, config)
    t = resolve_triple(pick(args.triple, config, "triple"))
    k = pick(args.k, config, "k")
    if k is None:
        raise ConfigError("k is required")
    regions = omega_k(t, mu, float(k), resolve_tolerances(args, config), resolve_budget(args, config))
    document = {
        **_mu_json(mu, tau),
        "k": float(k),
        "regions": [{"slope": str(s), "value": complex_json(v)} for s, v in regions],
    }
    text = "\n".join([f"{len(regions)} region(s) with |trace| <= {float(k):g}"] + [f"  {s}: {format_complex(v)}" for s, v in regions])
    return EXIT_OK, document, text


def build_slice_spec(args, config, mu):
    mode = pick(args.mode, config, "slice", "mode", default="xy")
    if mode == "xy":
        x = pick(args.x, config, "slice", "x")
        if x is None:
            raise ConfigError("xy mode needs x")
        plane = XyPlane(parse_complex(x, "x"), pick(args.branch, config, "slice", "branch", default="plus"))
    elif mode == "line":
        base = resolve_triple(pick(args.base, config, "slice", "base"), "base")
        direction = pick(args.direction, config, "slice", "direction")
        if direction is None:
            raise ConfigError("line mode needs a direction")
        plane = LinePlane(base, tuple(parse_complex_list(direction, 3, "direction")))
    else:
        raise ConfigError(f"unknown slice mode {mode!r}")
    window = parse_float_list(pick(args.window, config, "slice", "window", default="-1,1,-1,1"), 4, "window")
    width, height = parse_size(pick(args.size, config, "slice", "size", default="64x64"))
    return SliceSpec(
        mu=mu,
        plane=plane,
        window=tuple(window),
        width=width,
        height=height,
        budget=resolve_budget(args, config),
        tol=resolve_tolerances(args, config),
    )


def cmd_slice(args, config):
    mu, tau = resolve_mu(args, config)
    spec = build_slice_spec(args, config, mu)
    palette = parse_palette(pick(None, config, "slice", "palette"))
    workers = args.threads if args.threads is not None else default_workers()
    if workers < 1:
        raise InvalidInput("--threads must be positive")
    out = pick(args.out, config, "output", "ppm", default="slice.ppm")
    sidecar = pick(args.sidecar, config, "output", "sidecar")

    grid = evaluate_slice(spec, workers)
    written = write_ppm(grid, palette, out)
    if sidecar:
        write_sidecar(grid, spec, sidecar)

    counts = {kind.value: int((grid.kinds == code).sum()) for code, kind in enumerate(PixelKind)}
    document = {**_mu_json(mu, tau), "ppm": out, "bytes": written, "sidecar": sidecar, "counts": counts}
    text = f"wrote {written} bytes to {out}\n" + "\n".join(f"  {k}: {v}" for k, v in counts.items() if v)
    code = EXIT_OK
    if spec.width == spec.height == 1:
        pixel = grid.verdict(0, 0)
        document["pixel"] = {"kind": pixel.kind.value, "depth": pixel.depth}
        if pixel.kind is PixelKind.UNDETERMINED:
            code = EXIT_UNDETERMINED
    return code, document, text


def cmd_classify(args, config):
    tau = resolve_tau(args, config)
    topology = classify_real(tau)
    decision = ergodicity_decision(tau)
    document = {
        "tau": [complex_json(v) for v in tau.as_tuple()],
        "n_in_segment": topology.n_in_segment,
        "case": topology.case.value,
        "euler_note": list(topology.euler_note),
        "verdict": decision.verdict.value,
        "mu": [complex_json(v) for v in (decision.p, decision.q, decision.r, decision.s)],
        "regime": decision.regime.value if decision.regime else None,
        "rationale": decision.rationale,
    }
    lines = [f"{topology.case.value} (n = {topology.n_in_segment})"]
    lines += [f"  {note}" for note in topology.euler_note]
    lines.append(f"{decision.verdict.value}: {decision.rationale}")
    return EXIT_OK, document, "\n".join(lines)


def cmd_seed(args, config):
    mu, tau = resolve_mu(args, config)
    y = pick(args.y, config, "seed", "y")
    seed = construct_real_seed(mu, None if y is None else float(y))
    verdict = bq_test(seed.triple, mu, resolve_tolerances(args, config), resolve_budget(args, config))
    document = {
        **_mu_json(mu, tau),
        "triple": [complex_json(v) for v in seed.triple.as_tuple()],
        "role_color": seed.role_color,
        "mirrored": seed.mirrored,
        "y": seed.y,
        "epsilon": seed.epsilon,
        "verdict": verdict_to_dict(verdict),
    }
    triple = ", ".join(format_complex(v) for v in seed.triple.as_tuple())
    text = f"seed ({triple}) with color {seed.role_color}{' mirrored' if seed.mirrored else ''}\n{verdict_to_text(verdict)}"
    return EXIT_OK, document, text


def cmd_constants(args, config):
    mu, tau = resolve_mu(args, config)
    constants = derived_constants(mu)
    roots = {color: degenerate_data(mu, color).roots for color in COLORS}
    document = {
        **_mu_json(mu, tau),
        "alpha": constants.alpha,
        "m": constants.m,
        "big_m": constants.big_m,
        "big_l": constants.big_l,
        "degenerate_roots": {str(c): [complex_json(v) for v in roots[c]] for c in COLORS},
    }
    lines = [
        f"alpha = {constants.alpha:.12g}",
        f"m = {constants.m:.12g}",
        f"M = {constants.big_m:.12g}",
        f"L = {constants.big_l:.12g}",
    ]
    lines += [f"S_mu color {c}: " + ", ".join(format_complex(v) for v in roots[c]) for c in COLORS]
    return EXIT_OK, document, "\n".join(lines)


COMMANDS = {
    "trace": cmd_trace,
    "bq": cmd_bq,
    "omega": cmd_omega,
    "slice": cmd_slice,
    "classify": cmd_classify,
    "seed": cmd_seed,
    "constants": cmd_constants,
}


def report_error(exc, as_json, code=None):
    code = code or getattr(exc, "code", "invalid_input")
    if as_json:
        print(json.dumps({"error": code, "message": str(exc)}), file=sys.stderr)
    else:
        print(f"error[{code}]: {exc}", file=sys.stderr)


def run(argv=None):
    """
    Runs one command.

    Returns:
        exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        config = load_config(args.config)
        code, document, text = COMMANDS[args.command](args, config)
    except MarkoffError as exc:
        report_error(exc, args.json)
        return EXIT_INVALID
    except ValueError as exc:
        report_error(exc, args.json, "invalid_input")
        return EXIT_INVALID
    except OSError as exc:
        report_error(exc, args.json, "io_error")
        return EXIT_INVALID

    print(json.dumps(document, indent=2) if args.json else text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
