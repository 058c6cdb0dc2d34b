"""templia: escape-time engine for symbolic-template iterations of pairs of
complex quadratic maps."""

from .core import (BinaryExpansion, Finite, OrbitOutcome, ParameterPair, Periodic,
                   RandomSeeded, SingleError, SymbolicTemplate, TemplateRoot,
                   escape_radius, k_root, shift, step, template_orbit,
                   template_symbol)
from .raster import (BoundaryPointSet, ClassifiedRaster, ConnectivityReport,
                     GridSpec, classify_connectivity, default_grid,
                     extract_boundary, render_julia)
from .metrics import (BoxCountResult, box_counting_dimension, hausdorff_distance)
from .paramplane import (ConvergenceCurve, FixedMapSamples, HybridRaster,
                         MandelSliceRaster, convergence_experiment, error_sweep,
                         fixed_map_F, hybrid_mandelbrot, mandel_slice,
                         slice_lattice, zoom_sequence)
from .output import (Palette, RunManifest, get_palette, read_pgm, read_ppm,
                     write_manifest, write_raster_image, write_table)

__version__ = "0.1.0"
