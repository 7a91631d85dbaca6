"""
Portable pixmap (P6) output for slice grids, with an optional JSON sidecar.
"""
import json
import logging
import os
import tempfile

import numpy as np

from markoff.errors import InvalidInput
from render.slices import PIXEL_KINDS, PixelKind

logger = logging.getLogger(__name__)

DEFAULT_PALETTE = {
    PixelKind.ACCEPTED: (255, 255, 255),
    PixelKind.REJECTED_SEGMENT: (0, 0, 0),
    PixelKind.REJECTED_DEGENERATE: (0, 0, 255),
    PixelKind.REJECTED_SMALL_RAY: (64, 64, 64),
    PixelKind.UNDETERMINED: (0, 255, 0),
    PixelKind.OFF_VARIETY: (255, 0, 0),
}


def parse_palette(overrides):
    """
    Merges {kind name: [r, g, b]} overrides into the default palette.
    """
    palette = dict(DEFAULT_PALETTE)
    for name, rgb in (overrides or {}).items():
        try:
            kind = PixelKind(name)
        except ValueError as exc:
            raise InvalidInput(f"unknown pixel kind {name!r} in palette") from exc
        if len(rgb) != 3 or not all(0 <= int(v) <= 255 for v in rgb):
            raise InvalidInput(f"palette color for {name} must be three bytes, got {rgb!r}")
        palette[kind] = tuple(int(v) for v in rgb)
    return palette


def _undetermined_shade(color, depths):
    # deeper searches get brighter, starting from a third of the base color
    top = max(int(depths.max()), 1)
    weight = 1 / 3 + (2 / 3) * depths / top
    return np.rint(np.outer(weight, color)).astype(np.uint8)


def grid_to_rgb(grid, palette=None):
    """
    Returns a (height, width, 3) uint8 array; undetermined pixels are graded
    by search depth.
    """
    palette = palette or DEFAULT_PALETTE
    lookup = np.array([palette[kind] for kind in PIXEL_KINDS], dtype=np.uint8)
    rgb = lookup[grid.kinds]
    undetermined = grid.kinds == PIXEL_KINDS.index(PixelKind.UNDETERMINED)
    if undetermined.any():
        rgb[undetermined] = _undetermined_shade(palette[PixelKind.UNDETERMINED], grid.depths[undetermined])
    return rgb


def atomic_write(path, payload):
    """Writes bytes to path through a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return len(payload)


def encode_ppm(grid, palette=None):
    if grid.width < 1 or grid.height < 1:
        raise InvalidInput("cannot encode an empty grid")
    header = f"P6\n{grid.width} {grid.height}\n255\n".encode("ascii")
    return header + grid_to_rgb(grid, palette).tobytes()


def write_ppm(grid, palette, path):
    """
    Writes the grid as a binary pixmap.

    Returns:
        number of bytes written
    """
    written = atomic_write(path, encode_ppm(grid, palette))
    logger.debug("wrote %d bytes to %s", written, path)
    return written


def write_sidecar(grid, spec, path):
    """JSON with per-pixel kinds and depths and the full slice spec."""
    document = {
        "spec": spec.to_dict(),
        "kinds": grid.kind_names(),
        "depths": grid.depths.tolist(),
    }
    return atomic_write(path, json.dumps(document, indent=2).encode("utf-8"))
