"""Deterministic serialization: netpbm images, CSV tables, run manifests.

Images are binary PGM (P5) for grayscale escape maps and binary PPM (P6)
for palette output; identical inputs always produce identical bytes.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .metrics import BoxCountResult
from .paramplane import ConvergenceCurve, FixedMapSamples, HybridRaster

TOOL_VERSION = "templia 0.1.0"

PRISONER_LEVEL = 0  # grayscale value of prisoner/bounded pixels


@dataclass(frozen=True)
class Palette:
    """Escape-index (or count-fraction) coloring with a reserved interior color.

    Grayscale palettes map to PGM; RGB palettes map to PPM. Escape colors
    never collide with the interior color.
    """

    name: str
    grayscale: bool
    interior_rgb: tuple = (0, 0, 0)

    def escape_levels(self, max_iter: int) -> np.ndarray:
        """uint8 gray per escape index 0..max_iter: 255 at immediate escape,
        decreasing to 1 at the iteration cap; interior stays PRISONER_LEVEL."""
        span = max(max_iter - 1, 1)
        idx = np.minimum(np.arange(max_iter + 1), max_iter - 1)
        return (255 - (254 * idx) // span).astype(np.uint8)

    def fraction_rgb(self, fraction: np.ndarray) -> np.ndarray:
        """Blue (0.0) to red (1.0) over the HSV hue arc, as uint8 RGB."""
        fraction = np.clip(np.asarray(fraction, dtype=float), 0.0, 1.0)
        out = np.empty(fraction.shape + (3,), dtype=np.uint8)
        flat = fraction.ravel()
        rgb = out.reshape(-1, 3)
        for i, f in enumerate(flat):
            r, g, b = colorsys.hsv_to_rgb((2.0 / 3.0) * (1.0 - f), 1.0, 1.0)
            rgb[i] = (int(round(255 * r)), int(round(255 * g)), int(round(255 * b)))
        return out

    def escape_rgb(self, max_iter: int) -> np.ndarray:
        span = max(max_iter - 1, 1)
        idx = np.minimum(np.arange(max_iter + 1), max_iter - 1)
        return self.fraction_rgb(idx / span)


PALETTES = {
    "grayscale": Palette("grayscale", grayscale=True),
    "spectrum": Palette("spectrum", grayscale=False),
}


def get_palette(name: str) -> Palette:
    try:
        return PALETTES[name]
    except KeyError:
        raise ValueError(f"unknown palette {name!r}; choose from {sorted(PALETTES)}")


def _write_pnm(path, magic: bytes, width: int, height: int, payload: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (width, height))
        fh.write(payload)


def write_raster_image(raster, palette: Palette, path) -> None:
    """Write a classified or hybrid raster as PGM (grayscale) or PPM (color).

    Rows run top to bottom with the imaginary axis increasing upward, which
    is the in-memory order of the raster arrays.
    """
    grid = raster.grid
    if isinstance(raster, HybridRaster):
        fraction = raster.counts / raster.total_templates
        img = palette.fraction_rgb(fraction)
        _write_pnm(path, b"P6", grid.pixels_x, grid.pixels_y,
                   np.ascontiguousarray(img).tobytes())
        return
    esc = raster.escape_index
    interior = esc < 0
    idx = np.where(interior, 0, esc)
    if palette.grayscale:
        img = palette.escape_levels(raster.max_iter)[idx]
        img[interior] = PRISONER_LEVEL
        _write_pnm(path, b"P5", grid.pixels_x, grid.pixels_y,
                   np.ascontiguousarray(img, dtype=np.uint8).tobytes())
    else:
        img = palette.escape_rgb(raster.max_iter)[idx]
        img[interior] = palette.interior_rgb
        _write_pnm(path, b"P6", grid.pixels_x, grid.pixels_y,
                   np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def _read_pnm_header(data: bytes, magic: bytes):
    if not data.startswith(magic):
        raise ValueError(f"not a {magic.decode()} file")
    fields = []
    i = len(magic)
    while len(fields) < 3:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if data[i:i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i:i + 1].isspace():
            i += 1
        fields.append(int(data[start:i]))
    return fields[0], fields[1], fields[2], i + 1


def read_pgm(path):
    """(width, height, maxval, uint8 array (h, w)) from a binary PGM."""
    data = Path(path).read_bytes()
    w, h, maxval, off = _read_pnm_header(data, b"P5")
    img = np.frombuffer(data[off:off + w * h], dtype=np.uint8).reshape(h, w)
    return w, h, maxval, img


def read_ppm(path):
    """(width, height, maxval, uint8 array (h, w, 3)) from a binary PPM."""
    data = Path(path).read_bytes()
    w, h, maxval, off = _read_pnm_header(data, b"P6")
    img = np.frombuffer(data[off:off + 3 * w * h], dtype=np.uint8).reshape(h, w, 3)
    return w, h, maxval, img


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")  # round-trip exact for binary64
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_table(obj, path) -> None:
    """CSV for sample tables, convergence curves, and box-count tables."""
    if isinstance(obj, FixedMapSamples):
        write_csv(path, ("a", "F"), zip(obj.a_values, obj.f_values))
    elif isinstance(obj, ConvergenceCurve):
        rows = [(e.root_length, e.distance if e.distance is not None else "")
                for e in obj.entries]
        write_csv(path, ("n", "hausdorff_distance"), rows)
    elif isinstance(obj, BoxCountResult):
        write_csv(path, ("epsilon", "count"), obj.table())
    else:
        raise TypeError(f"no table writer for {type(obj).__name__}")


@dataclass
class RunManifest:
    """Parameter echo sufficient to byte-reproduce every listed output."""

    parameters: dict
    outputs: list = field(default_factory=list)
    wall_clock_seconds: Optional[float] = None
    tool_version: str = TOOL_VERSION

    def lines(self):
        entries = {"toolVersion": self.tool_version}
        entries.update({str(k): _fmt(v) for k, v in self.parameters.items()})
        for i, name in enumerate(self.outputs):
            entries[f"output.{i}"] = str(name)
        if self.wall_clock_seconds is not None:
            entries["wallClockSeconds"] = _fmt(self.wall_clock_seconds)
        return [f"{k}={entries[k]}" for k in sorted(entries)]


def write_manifest(manifest: RunManifest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in manifest.lines():
            fh.write(line + "\n")
