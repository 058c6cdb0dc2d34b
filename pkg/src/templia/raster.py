"""Rasterized prisoner/escape sets, Julia boundaries, and connectivity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .core import ParameterPair, SymbolicTemplate, escape_radius
from . import kernels

VERDICT_CONNECTED = "Connected"
VERDICT_DISCONNECTED = "Disconnected"
VERDICT_DUST = "Dust"
VERDICT_EMPTY = "Empty"

DEFAULT_PIXELS = 512
DEFAULT_MAX_ITER = 200
DEFAULT_DUST_THRESHOLD = 16

_CONN8 = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class GridSpec:
    """A sampling window over the complex plane.

    Pixel (row j, col i) has center re_axis[i] + 1j * im_axis[j]; row 0 is
    the top of the window (largest imaginary part).
    """

    center: complex
    width: float
    height: float
    pixels_x: int = DEFAULT_PIXELS
    pixels_y: int = DEFAULT_PIXELS

    def __post_init__(self):
        c = complex(self.center)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("grid center must be finite")
        object.__setattr__(self, "center", c)
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError(f"grid width must be positive and finite, got {self.width}")
        if not (self.height > 0 and math.isfinite(self.height)):
            raise ValueError(f"grid height must be positive and finite, got {self.height}")
        if self.pixels_x < 2 or self.pixels_y < 2:
            raise ValueError("grid needs at least 2x2 pixels")

    @property
    def pixel_width(self) -> float:
        return self.width / self.pixels_x

    @property
    def pixel_height(self) -> float:
        return self.height / self.pixels_y

    def re_axis(self) -> np.ndarray:
        left = self.center.real - self.width / 2.0
        return left + (np.arange(self.pixels_x) + 0.5) * self.pixel_width

    def im_axis(self) -> np.ndarray:
        top = self.center.imag + self.height / 2.0
        return top - (np.arange(self.pixels_y) + 0.5) * self.pixel_height

    def pixel_of(self, z: complex) -> Optional[tuple]:
        """(row, col) of the pixel containing z, or None when outside."""
        col = int(math.floor((z.real - (self.center.real - self.width / 2.0))
                             / self.pixel_width))
        row = int(math.floor(((self.center.imag + self.height / 2.0) - z.imag)
                             / self.pixel_height))
        if 0 <= row < self.pixels_y and 0 <= col < self.pixels_x:
            return row, col
        return None

    def contains(self, other: "GridSpec") -> bool:
        """True when the other window lies inside this one."""
        sl = self.center.real - self.width / 2.0
        st = self.center.imag + self.height / 2.0
        ol = other.center.real - other.width / 2.0
        ot = other.center.imag + other.height / 2.0
        return (ol >= sl and ol + other.width <= sl + self.width
                and ot <= st and ot - other.height >= st - self.height)


def default_grid(pair: ParameterPair, pixels: int = DEFAULT_PIXELS) -> GridSpec:
    """Window centered at 0 with width = height = 2R + 0.2 for the pair."""
    side = 2.0 * escape_radius(pair) + 0.2
    return GridSpec(0j, side, side, pixels, pixels)


@dataclass
class ClassifiedRaster:
    """Per-pixel escape classification of a template Julia window.

    escape_index holds the first iterate past the escape radius, or -1 for
    prisoner pixels (never escaped within max_iter).
    """

    grid: GridSpec
    escape_index: np.ndarray
    max_iter: int
    pair: ParameterPair
    template_descriptor: str

    @property
    def prisoner_mask(self) -> np.ndarray:
        return self.escape_index < 0


@dataclass
class BoundaryPointSet:
    """Centers of prisoner pixels 4-adjacent to escape (or the window edge)."""

    points: np.ndarray  # complex128, 1-D
    source_grid: GridSpec

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ConnectivityReport:
    component_count: int
    largest_component_fraction: float
    dust_threshold: int
    verdict: str


def render_julia(pair: ParameterPair, template: SymbolicTemplate, grid: GridSpec,
                 max_iter: int = DEFAULT_MAX_ITER) -> ClassifiedRaster:
    """Classify every pixel center by its template orbit.

    Deterministic function of the arguments: the kernel writes each pixel
    independently, so the raster is identical for any thread count.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if template.length is not None and template.length < max_iter:
        raise ValueError(
            f"template of length {template.length} is shorter than max_iter {max_iter}")
    bits = template.word(max_iter)
    esc = kernels.julia_escape(grid.re_axis(), grid.im_axis(), bits,
                               pair.c0, pair.c1, escape_radius(pair), max_iter)
    return ClassifiedRaster(grid, esc, max_iter, pair, template.descriptor())


def boundary_points(mask: np.ndarray, grid: GridSpec,
                    edge_is_exterior: bool = True) -> BoundaryPointSet:
    """Centers of mask pixels 4-adjacent to the complement.

    With edge_is_exterior, pixels on the raster edge count as adjacent to
    the outside, so an all-true mask yields its frame.
    """
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1, constant_values=not edge_is_exterior)
    exterior = (~padded[:-2, 1:-1] | ~padded[2:, 1:-1]
                | ~padded[1:-1, :-2] | ~padded[1:-1, 2:])
    rows, cols = np.nonzero(mask & exterior)
    pts = grid.re_axis()[cols] + 1j * grid.im_axis()[rows]
    return BoundaryPointSet(pts, grid)


def extract_boundary(raster: ClassifiedRaster) -> BoundaryPointSet:
    """Julia boundary of a classified raster (window edge counts as escape)."""
    return boundary_points(raster.prisoner_mask, raster.grid, edge_is_exterior=True)


def connectivity_report(mask: np.ndarray, dust_threshold: int = DEFAULT_DUST_THRESHOLD
                        ) -> ConnectivityReport:
    """Component statistics of a boolean mask under 8-connectivity."""
    if dust_threshold < 1:
        raise ValueError("dust threshold must be >= 1")
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask, structure=_CONN8)
    if n == 0:
        return ConnectivityReport(0, 0.0, dust_threshold, VERDICT_EMPTY)
    sizes = np.bincount(labels.ravel())[1:]
    largest = float(sizes.max()) / float(sizes.sum())
    if n == 1:
        verdict = VERDICT_CONNECTED
    elif sizes.max() <= dust_threshold:
        verdict = VERDICT_DUST
    else:
        verdict = VERDICT_DISCONNECTED
    return ConnectivityReport(int(n), largest, dust_threshold, verdict)


def classify_connectivity(raster: ClassifiedRaster,
                          dust_threshold: int = DEFAULT_DUST_THRESHOLD
                          ) -> ConnectivityReport:
    """Connected / Disconnected / Dust / Empty verdict for the prisoner set."""
    return connectivity_report(raster.prisoner_mask, dust_threshold)
