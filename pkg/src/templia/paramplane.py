"""Parameter-space constructions: Mandelbrot slices, lattices and zooms,
the fixed-map boundedness function, hybrid counts, error sweeps, and
root-convergence experiments."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .core import (Finite, ParameterPair, Periodic, SingleError, SymbolicTemplate,
                   binary_expansion_bits, k_root, random_bits)
from .metrics import (BoxCountResult, EmptyPointSetError, DegenerateRegressionError,
                      box_counting_dimension, default_box_scales, hausdorff_distance)
from .raster import (ClassifiedRaster, GridSpec, boundary_points, extract_boundary,
                     render_julia)

DEFAULT_MAX_ITER = 200
# Boundedness budget for length-L words in the fixed-map and hybrid
# constructions: the word is iterated cyclically for this many steps.
DEFAULT_ORBIT_BUDGET = 200
EXACT_LENGTH_LIMIT = 20
EXACT_WARN_LENGTH = 12


@dataclass
class MandelSliceRaster:
    """Boundedness of the orbit of 0 over a c1 window, for fixed c0.

    escape_index is -1 on bounded pixels, else the first escaping iterate.
    """

    grid: GridSpec
    fixed_c0: complex
    template_descriptor: str
    escape_index: np.ndarray
    max_iter: int

    @property
    def bounded_mask(self) -> np.ndarray:
        return self.escape_index < 0


def mandel_slice(template: SymbolicTemplate, c0: complex, grid: GridSpec,
                 max_iter: int = DEFAULT_MAX_ITER) -> MandelSliceRaster:
    """Fixed-template Mandelbrot slice: classify (c0, c1) per c1 pixel."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if template.length is not None and template.length < max_iter:
        raise ValueError(
            f"template of length {template.length} is shorter than max_iter {max_iter}")
    bits = template.word(max_iter)
    esc = kernels.slice_escape(grid.re_axis(), grid.im_axis(), bits,
                               complex(c0), max_iter)
    return MandelSliceRaster(grid, complex(c0), template.descriptor(), esc, max_iter)


DEFAULT_SLICE_GRID = GridSpec(0j, 4.0, 4.0, 512, 512)


def lattice_values(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive arithmetic range; tolerates float endpoints a half step out."""
    if step <= 0:
        raise ValueError("lattice step must be positive")
    if stop < start:
        raise ValueError("lattice range is empty")
    n = int(round((stop - start) / step)) + 1
    vals = start + step * np.arange(n)
    return vals[vals <= stop + step * 1e-9]


def slice_lattice(template: SymbolicTemplate, re_range: tuple, im_range: tuple,
                  step: float, grid: GridSpec,
                  max_iter: int = DEFAULT_MAX_ITER) -> list:
    """One Mandelbrot slice per c0 lattice point, row-major over (im, re)."""
    res = lattice_values(re_range[0], re_range[1], step)
    ims = lattice_values(im_range[0], im_range[1], step)
    out = []
    for im in ims:
        for re in res:
            c0 = complex(re, im)
            out.append(mandel_slice(template, c0, grid, max_iter))
    return out


@dataclass
class ZoomEntry:
    raster: MandelSliceRaster
    dimension: Optional[BoxCountResult]
    error: Optional[str] = None


def zoom_sequence(template: SymbolicTemplate, c0: complex,
                  windows: Sequence[GridSpec],
                  max_iter: int = DEFAULT_MAX_ITER) -> list:
    """Slice raster plus boundary box-counting estimate per zoom window.

    Windows are expected to nest; a violation only warns. The boundary here
    does not include the window frame, since a zoom window usually sits
    inside the set under study.
    """
    if not windows:
        raise ValueError("need at least one window")
    entries = []
    for k, window in enumerate(windows):
        if k > 0 and not windows[k - 1].contains(window):
            warnings.warn(f"zoom window {k} is not contained in window {k - 1}",
                          stacklevel=2)
        raster = mandel_slice(template, c0, window, max_iter)
        pts = boundary_points(raster.bounded_mask, window, edge_is_exterior=False)
        try:
            dim = box_counting_dimension(pts, *default_box_scales(window))
            entries.append(ZoomEntry(raster, dim))
        except (EmptyPointSetError, DegenerateRegressionError) as exc:
            entries.append(ZoomEntry(raster, None, error=str(exc)))
    return entries


@dataclass
class FixedMapSamples:
    """Samples of the boundedness indicator F over binary expansions in [0,1]."""

    pair: ParameterPair
    expansion_length: int
    orbit_budget: int
    a_values: np.ndarray
    f_values: np.ndarray  # uint8, 1 = bounded


def fixed_map_F(pair: ParameterPair, expansion_length: int, resolution: int,
                orbit_budget: int = DEFAULT_ORBIT_BUDGET) -> FixedMapSamples:
    """Evaluate F(a) = [orbit of 0 bounded] over a uniform grid of a in [0,1].

    Each sample expands a to expansion_length binary digits; the digit word
    is iterated cyclically for orbit_budget steps.
    """
    if expansion_length < 1:
        raise ValueError("expansion length must be >= 1")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    a_vals = np.arange(resolution) / (resolution - 1)
    words = np.empty((resolution, expansion_length), dtype=np.uint8)
    for i, a in enumerate(a_vals):
        words[i] = binary_expansion_bits(float(a), expansion_length)
    bounded = kernels.cyclic_bounded_mask(words, pair.c0, pair.c1, orbit_budget)
    return FixedMapSamples(pair, expansion_length, orbit_budget,
                           a_vals, bounded.astype(np.uint8))


@dataclass
class HybridRaster:
    """Per-c1 count of length-L words whose orbit of 0 stays bounded."""

    grid: GridSpec
    fixed_c0: complex
    word_length: int
    orbit_budget: int
    mode: str  # "exact" or "mc:samples=...,seed=..."
    counts: np.ndarray
    total_templates: int


def monte_carlo_words(seed: int, samples: int, length: int) -> np.ndarray:
    """Seeded word matrix shared by every pixel of a Monte Carlo hybrid run."""
    if samples < 1:
        raise ValueError("sample count must be >= 1")
    return random_bits(seed, samples * length, 0.5).reshape(samples, length)


def hybrid_mandelbrot(c0: complex, grid: GridSpec, word_length: int,
                      mode: str = "exact", samples: Optional[int] = None,
                      seed: Optional[int] = None,
                      orbit_budget: int = DEFAULT_ORBIT_BUDGET) -> HybridRaster:
    """Count bounded length-L words per c1 pixel, exactly or by sampling.

    Exact mode enumerates all 2^L words (shared prefixes are pruned in one
    pass, but bounded regions still pay the full 2^L; lengths above
    EXACT_WARN_LENGTH warn). Monte Carlo mode evaluates one seeded word set
    shared across pixels.
    """
    if word_length < 1:
        raise ValueError("word length must be >= 1")
    c0 = complex(c0)
    if mode == "exact":
        if word_length > EXACT_LENGTH_LIMIT:
            raise ValueError(f"exact mode supports word lengths up to {EXACT_LENGTH_LIMIT}")
        if word_length > EXACT_WARN_LENGTH:
            warnings.warn(
                f"exact enumeration of 2^{word_length} words per pixel is expensive; "
                f"lengths up to {EXACT_WARN_LENGTH} are recommended", stacklevel=2)
        counts = kernels.hybrid_exact(grid.re_axis(), grid.im_axis(), c0,
                                      word_length, orbit_budget)
        return HybridRaster(grid, c0, word_length, orbit_budget, "exact",
                            counts, 2 ** word_length)
    if mode == "monte-carlo":
        if samples is None or seed is None:
            raise ValueError("monte-carlo mode needs samples and seed")
        words = monte_carlo_words(seed, samples, word_length)
        counts = kernels.hybrid_monte_carlo(grid.re_axis(), grid.im_axis(),
                                            words, c0, orbit_budget)
        return HybridRaster(grid, c0, word_length, orbit_budget,
                            f"mc:samples={samples},seed={seed}", counts, samples)
    raise ValueError(f"unknown hybrid mode {mode!r}")


def error_sweep(c1: complex, c0: complex, positions: Sequence[int], n: int,
                grid: GridSpec, max_iter: Optional[int] = None) -> list:
    """Julia rasters for a single error at each 1-based position k.

    The base template is all ones (the desired map f_c1 at every step); the
    symbol at position k flips to 0, applying the error map f_c0 there.
    """
    max_iter = n if max_iter is None else max_iter
    pair = ParameterPair(complex(c0), complex(c1))
    out = []
    for k in positions:
        template = SingleError(error_position=int(k), n=n)
        out.append((int(k), render_julia(pair, template, grid, max_iter)))
    return out


@dataclass
class ConvergenceEntry:
    root_length: int
    distance: Optional[float]
    error: Optional[str] = None


@dataclass
class ConvergenceCurve:
    pair: ParameterPair
    template_descriptor: str
    reference_length: int
    entries: list


def convergence_experiment(pair: ParameterPair, template: SymbolicTemplate,
                           root_lengths: Sequence[int], reference_length: int,
                           grid: GridSpec) -> ConvergenceCurve:
    """Hausdorff distance between truncated-template Julia boundaries and the
    reference boundary at full length, per root length n."""
    lengths = sorted(set(int(n) for n in root_lengths))
    if not lengths:
        raise ValueError("need at least one root length")
    if lengths[0] < 1:
        raise ValueError("root lengths must be >= 1")
    if lengths[-1] > reference_length:
        raise ValueError("root lengths cannot exceed the reference length")
    reference = render_julia(pair, template, grid, reference_length)
    ref_boundary = extract_boundary(reference)
    entries = []
    for n in lengths:
        truncated = Finite(k_root(template, n).bits)
        raster = render_julia(pair, truncated, grid, n)
        try:
            d = hausdorff_distance(extract_boundary(raster), ref_boundary)
            entries.append(ConvergenceEntry(n, d))
        except EmptyPointSetError as exc:
            entries.append(ConvergenceEntry(n, None, error=str(exc)))
    return ConvergenceCurve(pair, template.descriptor(), reference_length, entries)
