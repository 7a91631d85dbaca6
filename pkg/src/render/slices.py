"""
Rasterized slices of the character variety.

Each pixel center maps to a complex slice parameter c. In the xy plane the
x coordinate is fixed, y = c and z solves the vertex quadratic on the chosen
branch. On a line, x and y move along base + c * direction and z is the root
of the vertex quadratic nearest to base.z + c * direction.z. Every pixel is
then decided by bq_test on its own.
"""
import cmath
import logging
import math
import multiprocessing
from dataclasses import dataclass, field
from enum import Enum
from functools import partial

import numpy as np

from bowditch.bq import RejectReason, SearchBudget, Tolerances, VerdictKind, bq_test
from markoff.algebra import MarkoffTriple, MuParams, as_complex, derived_constants, residual_scale, vertex_residual
from markoff.errors import InvalidInput, InvalidSpec, ResidualTooLarge

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-6


class ZBranch(Enum):
    PLUS = "plus"
    MINUS = "minus"


class PixelKind(Enum):
    ACCEPTED = "accepted"
    REJECTED_SEGMENT = "rejected_segment"
    REJECTED_DEGENERATE = "rejected_degenerate"
    REJECTED_SMALL_RAY = "rejected_small_ray"
    UNDETERMINED = "undetermined"
    OFF_VARIETY = "off_variety"


PIXEL_KINDS = tuple(PixelKind)

_REJECTED_KINDS = {
    RejectReason.SEGMENT_HIT: PixelKind.REJECTED_SEGMENT,
    RejectReason.DEGENERATE_HIT: PixelKind.REJECTED_DEGENERATE,
    RejectReason.SMALL_RAY: PixelKind.REJECTED_SMALL_RAY,
}


@dataclass(frozen=True)
class XyPlane:
    x: complex
    z_branch: ZBranch = ZBranch.PLUS

    def __post_init__(self):
        object.__setattr__(self, "x", as_complex(self.x, "x"))
        object.__setattr__(self, "z_branch", ZBranch(self.z_branch))


@dataclass(frozen=True)
class LinePlane:
    base: MarkoffTriple
    direction: tuple

    def __post_init__(self):
        if len(self.direction) != 3:
            raise InvalidSpec("line direction needs three components")
        object.__setattr__(self, "direction", tuple(as_complex(v, "direction") for v in self.direction))


@dataclass(frozen=True)
class PixelVerdict:
    kind: PixelKind
    depth: int = 0


@dataclass(frozen=True)
class SliceSpec:
    mu: MuParams
    plane: XyPlane | LinePlane
    window: tuple
    width: int
    height: int
    budget: SearchBudget = field(default_factory=SearchBudget)
    tol: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if not isinstance(self.plane, (XyPlane, LinePlane)):
            raise InvalidSpec(f"unknown slice plane {self.plane!r}")
        if int(self.width) < 1 or int(self.height) < 1:
            raise InvalidSpec(f"grid must be at least 1x1, got {self.width}x{self.height}")
        try:
            re_min, re_max, im_min, im_max = (float(v) for v in self.window)
        except (TypeError, ValueError) as exc:
            raise InvalidSpec(f"window must be four numbers, got {self.window!r}") from exc
        if not all(math.isfinite(v) for v in (re_min, re_max, im_min, im_max)):
            raise InvalidSpec("window bounds must be finite")
        if re_min >= re_max or im_min >= im_max:
            raise InvalidSpec(f"window {self.window} is empty")
        object.__setattr__(self, "window", (re_min, re_max, im_min, im_max))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    def parameter(self, i, j):
        """Slice parameter at the center of column i, row j (row 0 on top)."""
        re_min, re_max, im_min, im_max = self.window
        re = re_min + (i + 0.5) * (re_max - re_min) / self.width
        im = im_max - (j + 0.5) * (im_max - im_min) / self.height
        return complex(re, im)

    def to_dict(self):
        if isinstance(self.plane, XyPlane):
            plane = {"mode": "xy", "x": _pair(self.plane.x), "branch": self.plane.z_branch.value}
        else:
            plane = {
                "mode": "line",
                "base": [_pair(v) for v in self.plane.base.as_tuple()],
                "direction": [_pair(v) for v in self.plane.direction],
            }
        return {
            "mu": [_pair(v) for v in self.mu.as_tuple()],
            "plane": plane,
            "window": list(self.window),
            "width": self.width,
            "height": self.height,
            "budget": {"max_descent_steps": self.budget.max_descent_steps, "max_vertices": self.budget.max_vertices},
            "tolerances": {
                "eps_segment": self.tol.eps_segment,
                "eps_degenerate": self.tol.eps_degenerate,
                "eps_tie": self.tol.eps_tie,
            },
        }


def _pair(value):
    return [value.real, value.imag]


@dataclass(frozen=True)
class SliceGrid:
    """Pixel kinds (indices into PIXEL_KINDS) and depths, row 0 on top."""

    kinds: np.ndarray
    depths: np.ndarray

    @property
    def height(self):
        return self.kinds.shape[0]

    @property
    def width(self):
        return self.kinds.shape[1]

    def verdict(self, i, j):
        return PixelVerdict(PIXEL_KINDS[int(self.kinds[j, i])], int(self.depths[j, i]))

    def kind_names(self):
        return [[PIXEL_KINDS[int(code)].value for code in row] for row in self.kinds]

    def __eq__(self, other):
        if not isinstance(other, SliceGrid):
            return NotImplemented
        return np.array_equal(self.kinds, other.kinds) and np.array_equal(self.depths, other.depths)


def _quadratic_roots(b, c):
    # z^2 + b z + c = 0, principal square root, plus branch first
    root = cmath.sqrt(b * b - 4 * c)
    return (-b + root) / 2, (-b - root) / 2


def _z_coefficients(mu, x, y):
    return x * y - mu.r, x * x + y * y - mu.p * x - mu.q * y - mu.s


def slice_point(spec, c):
    """
    The triple at slice parameter c, or None when no finite triple on the
    variety is found there.
    """
    mu, plane = spec.mu, spec.plane
    if isinstance(plane, XyPlane):
        x, y = plane.x, c
        plus, minus = _quadratic_roots(*_z_coefficients(mu, x, y))
        z = plus if plane.z_branch is ZBranch.PLUS else minus
    else:
        dx, dy, dz = plane.direction
        x, y = plane.base.x + c * dx, plane.base.y + c * dy
        target = plane.base.z + c * dz
        z = min(_quadratic_roots(*_z_coefficients(mu, x, y)), key=lambda root: abs(root - target))
    if not all(cmath.isfinite(v) for v in (x, y, z)):
        return None
    t = MarkoffTriple(x, y, z)
    if abs(vertex_residual(t, mu)) >= RESIDUAL_TOL * residual_scale(t, mu):
        return None
    return t


def evaluate_pixel(spec, c):
    # a line always meets the variety, so failures there are numerical
    failed = PixelKind.OFF_VARIETY if isinstance(spec.plane, XyPlane) else PixelKind.UNDETERMINED
    t = slice_point(spec, c)
    if t is None:
        return PixelVerdict(failed)
    try:
        verdict = bq_test(t, spec.mu, spec.tol, spec.budget)
    except (ResidualTooLarge, InvalidInput):
        return PixelVerdict(failed)
    if verdict.kind is VerdictKind.ACCEPTED:
        return PixelVerdict(PixelKind.ACCEPTED, verdict.vertices_used)
    if verdict.kind is VerdictKind.REJECTED:
        return PixelVerdict(_REJECTED_KINDS[verdict.reason], verdict.vertices_used)
    return PixelVerdict(PixelKind.UNDETERMINED, verdict.vertices_used)


def _evaluate_rows(spec, rows):
    out = []
    for j in rows:
        pixels = [evaluate_pixel(spec, spec.parameter(i, j)) for i in range(spec.width)]
        out.append((j, [PIXEL_KINDS.index(p.kind) for p in pixels], [p.depth for p in pixels]))
    return out


def _row_chunks(height, workers):
    size = max(1, math.ceil(height / (4 * workers)))
    return [range(start, min(start + size, height)) for start in range(0, height, size)]


def evaluate_slice(spec, workers=1):
    """
    Decides every pixel of the slice.

    Args:
        spec: SliceSpec
        workers: number of processes; 1 evaluates in this process

    Returns:
        SliceGrid, identical for any worker count
    """
    if not isinstance(spec, SliceSpec):
        raise InvalidSpec("evaluate_slice expects a SliceSpec")
    workers = max(1, int(workers))
    derived_constants(spec.mu)

    chunks = _row_chunks(spec.height, workers)
    task = partial(_evaluate_rows, spec)
    if workers == 1 or len(chunks) == 1:
        results = [task(rows) for rows in chunks]
    else:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(task, chunks)

    kinds = np.zeros((spec.height, spec.width), dtype=np.uint8)
    depths = np.zeros((spec.height, spec.width), dtype=np.int64)
    for chunk in results:
        for j, row_kinds, row_depths in chunk:
            kinds[j] = row_kinds
            depths[j] = row_depths
    logger.debug("slice %dx%d evaluated with %d worker(s)", spec.width, spec.height, workers)
    return SliceGrid(kinds=kinds, depths=depths)
