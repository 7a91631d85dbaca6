"""
Command-line configuration.

Flags may be backed by a JSON document passed with --config; a flag given on
the command line always wins over the file. Canonical schema:

    {
      "mu": [p, q, r, s] | "p,q,r,s",        (exactly one of mu / tau)
      "tau": [a, b, c, d] | "a,b,c,d",
      "triple": [x, y, z] | "x,y,z",
      "slope": "p/q",
      "k": 10.0,
      "seed": {"y": 100.0},
      "slice": {"mode": "xy" | "line", "x": ..., "branch": "plus" | "minus",
                "base": [x, y, z], "direction": [dx, dy, dz],
                "window": [re_min, re_max, im_min, im_max], "size": "64x64",
                "palette": {"accepted": [255, 255, 255], ...}},
      "tolerances": {"eps_segment": 1e-8, "eps_degenerate": 1e-8, "eps_tie": 0.0},
      "budget": {"max_descent_steps": 10000, "max_vertices": 20000},
      "output": {"ppm": "slice.ppm", "sidecar": "slice.json"}
    }

Complex numbers are written "re", "re+imi" (or with j), or as [re, im].
"""
import cmath
import json
import os

from bowditch.bq import SearchBudget, Tolerances
from markoff.algebra import BoundaryTraces, MarkoffTriple, MuParams, gt_map
from markoff.errors import ConfigError, InvalidInput

ENV_THREADS = "MARKOFF_BQ_THREADS"


def parse_complex(value, name="value"):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InvalidInput(f"{name}: expected [re, im], got {value!r}")
        z = complex(float(value[0]), float(value[1]))
    elif isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        z = complex(value)
    else:
        text = str(value).strip().replace(" ", "").replace("i", "j")
        try:
            z = complex(text)
        except ValueError as exc:
            raise InvalidInput(f"{name}: cannot parse {value!r} as a complex number") from exc
    if not cmath.isfinite(z):
        raise InvalidInput(f"{name} must be finite, got {value!r}")
    return z


def parse_complex_list(value, count, name):
    items = value.split(",") if isinstance(value, str) else list(value)
    if len(items) != count:
        raise InvalidInput(f"{name}: expected {count} comma-separated values, got {value!r}")
    return [parse_complex(item, name) for item in items]


def parse_float_list(value, count, name):
    items = value.split(",") if isinstance(value, str) else list(value)
    if len(items) != count:
        raise InvalidInput(f"{name}: expected {count} values, got {value!r}")
    try:
        return [float(item) for item in items]
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name}: values must be real numbers, got {value!r}") from exc


def parse_size(value):
    """Parses 'WIDTHxHEIGHT'."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        width, height = value
    else:
        text = str(value).lower()
        if "x" not in text:
            raise InvalidInput(f"size must look like 64x64, got {value!r}")
        width, height = text.split("x", 1)
    try:
        return int(width), int(height)
    except ValueError as exc:
        raise InvalidInput(f"size must look like 64x64, got {value!r}") from exc


def load_config(path):
    if not path:
        return {}
    try:
        with open(path, "r") as handle:
            document = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return document


def pick(flag, config, *keys, default=None):
    """Flag value if given, else the nested config value, else default."""
    if flag is not None:
        return flag
    node = config
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            return default
        node = node[key]
    return node


def resolve_mu(args, config, required=True):
    """
    Parameters from --mu or --tau (exactly one).

    Returns:
        (MuParams, BoundaryTraces or None)
    """
    mu_value = pick(getattr(args, "mu", None), config, "mu")
    tau_value = pick(getattr(args, "tau", None), config, "tau")
    if mu_value is not None and tau_value is not None:
        raise ConfigError("give exactly one of mu and tau")
    if tau_value is not None:
        tau = BoundaryTraces(*parse_complex_list(tau_value, 4, "tau"))
        return gt_map(tau), tau
    if mu_value is not None:
        return MuParams(*parse_complex_list(mu_value, 4, "mu")), None
    if required:
        raise ConfigError("one of mu and tau is required")
    return None, None


def resolve_tau(args, config):
    tau_value = pick(getattr(args, "tau", None), config, "tau")
    if tau_value is None:
        raise ConfigError("tau is required")
    return BoundaryTraces(*parse_complex_list(tau_value, 4, "tau"))


def resolve_triple(value, name="triple"):
    if value is None:
        raise ConfigError(f"{name} is required")
    return MarkoffTriple(*parse_complex_list(value, 3, name))


def resolve_tolerances(args, config):
    defaults = Tolerances()
    return Tolerances(
        eps_segment=float(pick(args.eps_segment, config, "tolerances", "eps_segment", default=defaults.eps_segment)),
        eps_degenerate=float(pick(args.eps_degenerate, config, "tolerances", "eps_degenerate", default=defaults.eps_degenerate)),
        eps_tie=float(pick(args.eps_tie, config, "tolerances", "eps_tie", default=defaults.eps_tie)),
    )


def resolve_budget(args, config):
    defaults = SearchBudget()
    return SearchBudget(
        max_descent_steps=int(pick(args.max_descent_steps, config, "budget", "max_descent_steps", default=defaults.max_descent_steps)),
        max_vertices=int(pick(args.max_vertices, config, "budget", "max_vertices", default=defaults.max_vertices)),
    )


def default_workers():
    """Worker count from MARKOFF_BQ_THREADS, 1 when unset."""
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{ENV_THREADS} must be a positive integer, got {raw!r}") from exc
    if workers < 1:
        raise ConfigError(f"{ENV_THREADS} must be a positive integer, got {raw!r}")
    return workers
