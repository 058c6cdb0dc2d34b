"""Command line surface: one subcommand per experiment family.

Every run writes its outputs plus a manifest.txt echoing the full parameter
set. Outputs are byte-deterministic: the same flags always produce the same
image and table bytes, independent of --threads.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import time
from pathlib import Path

from . import kernels
from .core import (BinaryExpansion, Finite, ParameterPair, Periodic, RandomSeeded,
                   SingleError, SymbolicTemplate, escape_radius)
from .metrics import box_counting_dimension, default_box_scales
from .output import (RunManifest, get_palette, write_manifest, write_raster_image,
                     write_table)
from .paramplane import (DEFAULT_ORBIT_BUDGET, convergence_experiment, error_sweep,
                         fixed_map_F, hybrid_mandelbrot, lattice_values, mandel_slice,
                         zoom_sequence)
from .raster import (DEFAULT_DUST_THRESHOLD, DEFAULT_MAX_ITER, DEFAULT_PIXELS,
                     GridSpec, classify_connectivity, default_grid, extract_boundary,
                     render_julia)


class ConfigError(ValueError):
    """Invalid configuration discovered after argument parsing; exits 2."""


_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


def parse_complex(text: str) -> complex:
    """Complex literal in the a+bi form: '0', '-0.75', '-0.117-0.76i', '2i', 'i'."""
    s = text.strip()
    m = re.fullmatch(rf"[+-]?{_NUM}", s)
    if m:
        return complex(float(s), 0.0)
    m = re.fullmatch(rf"(?P<b>[+-]?(?:{_NUM})?)i", s)
    if m:
        return complex(0.0, _imag_coef(m.group("b")))
    m = re.fullmatch(rf"(?P<a>[+-]?{_NUM})(?P<b>[+-](?:{_NUM})?)i", s)
    if m:
        return complex(float(m.group("a")), _imag_coef(m.group("b")))
    raise argparse.ArgumentTypeError(f"not a complex literal: '{text}'")


def _imag_coef(text: str) -> float:
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return float(text)


def parse_range(text: str) -> tuple:
    """'start:step:stop' inclusive lattice range."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be start:step:stop, got '{text}'")
    try:
        start, step, stop = (float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range '{text}': {exc}")
    if step <= 0:
        raise argparse.ArgumentTypeError(f"range step must be positive in '{text}'")
    if stop < start:
        raise argparse.ArgumentTypeError(f"empty range '{text}'")
    return start, stop, step


def parse_positions(text: str) -> list:
    try:
        return [int(p) for p in text.split(",") if p]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad position list '{text}': {exc}")


def parse_window(text: str) -> GridSpec:
    """'re,im,width,height' zoom window (pixel counts come from --px/--py)."""
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"window must be re,im,width,height, got '{text}'")
    try:
        re_c, im_c, w, h = (float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad window '{text}': {exc}")
    return GridSpec(complex(re_c, im_c), w, h)


_FIELD_PARSERS = {
    "k": int, "N": int, "seed": int, "L": int,
    "p": float, "a": float, "base": int, "error": int,
}


def _parse_fields(body: str, spec: str, required: tuple, optional: tuple = ()) -> dict:
    fields = {}
    for token in body.split(","):
        if "=" not in token:
            raise argparse.ArgumentTypeError(
                f"bad template spec '{spec}': token '{token}' is not key=value")
        key, _, value = token.partition("=")
        if key not in required + optional:
            raise argparse.ArgumentTypeError(
                f"bad template spec '{spec}': unknown field '{key}'")
        if key in fields:
            raise argparse.ArgumentTypeError(
                f"bad template spec '{spec}': duplicate field '{key}'")
        try:
            fields[key] = _FIELD_PARSERS[key](value)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"bad template spec '{spec}': bad value in token '{token}'")
    for key in required:
        if key not in fields:
            raise argparse.ArgumentTypeError(
                f"bad template spec '{spec}': missing field '{key}'")
    return fields


def parse_template_spec(text: str) -> SymbolicTemplate:
    """Template grammar: periodic:011 | word:0110 | error:k=30,N=200 |
    random:seed=42,N=200,p=0.5 | binary:a=0.375,L=15."""
    spec = text.strip()
    kind, sep, body = spec.partition(":")
    if not sep or not body:
        raise argparse.ArgumentTypeError(
            f"bad template spec '{spec}': expected kind:payload")
    try:
        if kind in ("periodic", "word"):
            if not re.fullmatch(r"[01]+", body):
                raise argparse.ArgumentTypeError(
                    f"bad template spec '{spec}': word '{body}' must be over 0/1")
            bits = tuple(int(b) for b in body)
            return Periodic(bits) if kind == "periodic" else Finite(bits)
        if kind == "error":
            f = _parse_fields(body, spec, ("k", "N"), ("base", "error"))
            return SingleError(f["k"], f["N"], f.get("base", 1), f.get("error", 0))
        if kind == "random":
            f = _parse_fields(body, spec, ("seed", "N"), ("p",))
            return RandomSeeded(f["seed"], f["N"], f.get("p", 0.5))
        if kind == "binary":
            f = _parse_fields(body, spec, ("a", "L"))
            return BinaryExpansion(f["a"], f["L"])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad template spec '{spec}': {exc}")
    raise argparse.ArgumentTypeError(
        f"bad template spec '{spec}': unknown kind '{kind}'")


# Flags whose values can begin with '-' (complex literals, ranges, windows).
# argparse would read such values as option names, so they are folded into
# --flag=value form before parsing.
_MERGE_FLAGS = {"--c0", "--c1", "--center", "--re", "--im", "--window"}


def preprocess_argv(argv):
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _MERGE_FLAGS and i + 1 < len(argv) and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _add_common(p, window_help: str):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: TEMPLIA_THREADS or all cores; "
                        "output never depends on this)")
    p.add_argument("--center", type=parse_complex, default=None,
                   help=f"window center (default: {window_help})")
    p.add_argument("--width", type=float, default=None, help="window width")
    p.add_argument("--height", type=float, default=None, help="window height")
    p.add_argument("--px", type=int, default=DEFAULT_PIXELS, help="pixels across")
    p.add_argument("--py", type=int, default=DEFAULT_PIXELS, help="pixels down")


def _grid_from_args(args, default: GridSpec) -> GridSpec:
    center = default.center if args.center is None else args.center
    width = default.width if args.width is None else args.width
    height = default.height if args.height is None else args.height
    return GridSpec(center, width, height, args.px, args.py)


def _grid_params(grid: GridSpec) -> dict:
    return {
        "gridCenterRe": grid.center.real, "gridCenterIm": grid.center.imag,
        "gridWidth": grid.width, "gridHeight": grid.height,
        "pixelsX": grid.pixels_x, "pixelsY": grid.pixels_y,
    }


def _finish(args, params: dict, outputs: list, started: float) -> None:
    out_dir = Path(args.out)
    manifest = RunManifest(params, [str(p.name) for p in outputs],
                           wall_clock_seconds=time.perf_counter() - started)
    path = out_dir / "manifest.txt"
    write_manifest(manifest, path)
    for p in outputs:
        print(f"wrote {p}")
    print(f"wrote {path}")


def _out_dir(args) -> Path:
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _image_name(stem: str, palette) -> str:
    return f"{stem}.pgm" if palette.grayscale else f"{stem}.ppm"


def cmd_julia(args):
    started = time.perf_counter()
    pair = ParameterPair(args.c0, args.c1)
    grid = _grid_from_args(args, default_grid(pair, DEFAULT_PIXELS))
    raster = render_julia(pair, args.template, grid, args.iters)
    palette = get_palette(args.palette)
    out = _out_dir(args) / _image_name("julia", palette)
    write_raster_image(raster, palette, out)
    params = {"command": "julia", "c0": args.c0, "c1": args.c1,
              "template": args.template.descriptor(), "maxIter": args.iters,
              "palette": palette.name, **_grid_params(grid)}
    _finish(args, params, [out], started)


def cmd_mandel_slice(args):
    started = time.perf_counter()
    grid = _grid_from_args(args, GridSpec(0j, 4.0, 4.0))
    raster = mandel_slice(args.template, args.c0, grid, args.iters)
    palette = get_palette(args.palette)
    out = _out_dir(args) / _image_name("mandel_slice", palette)
    write_raster_image(raster, palette, out)
    params = {"command": "mandel-slice", "c0": args.c0,
              "template": args.template.descriptor(), "maxIter": args.iters,
              "palette": palette.name, **_grid_params(grid)}
    _finish(args, params, [out], started)


def cmd_mandel_lattice(args):
    started = time.perf_counter()
    grid = _grid_from_args(args, GridSpec(0j, 4.0, 4.0))
    res = lattice_values(args.re[0], args.re[1], args.re[2])
    ims = lattice_values(args.im[0], args.im[1], args.im[2])
    palette = get_palette(args.palette)
    out_dir = _out_dir(args)
    outputs = []
    idx = 0
    for im in ims:
        for re_v in res:
            raster = mandel_slice(args.template, complex(re_v, im), grid, args.iters)
            out = out_dir / _image_name(f"slice_{idx:03d}", palette)
            write_raster_image(raster, palette, out)
            outputs.append(out)
            idx += 1
    params = {"command": "mandel-lattice",
              "latticeRe": f"{args.re[0]}:{args.re[2]}:{args.re[1]}",
              "latticeIm": f"{args.im[0]}:{args.im[2]}:{args.im[1]}",
              "latticePoints": idx, "template": args.template.descriptor(),
              "maxIter": args.iters, "palette": palette.name, **_grid_params(grid)}
    _finish(args, params, outputs, started)


def cmd_zoom(args):
    started = time.perf_counter()
    windows = [GridSpec(w.center, w.width, w.height, args.px, args.py)
               for w in args.window]
    palette = get_palette(args.palette)
    out_dir = _out_dir(args)
    outputs = []
    entries = zoom_sequence(args.template, args.c0, windows, args.iters)
    for k, entry in enumerate(entries):
        out = out_dir / _image_name(f"zoom_{k:02d}", palette)
        write_raster_image(entry.raster, palette, out)
        outputs.append(out)
        if entry.dimension is not None:
            table = out_dir / f"zoom_{k:02d}_boxcount.csv"
            write_table(entry.dimension, table)
            outputs.append(table)
            print(f"window {k}: boundary dimension {entry.dimension.dimension:.4f}")
        else:
            print(f"window {k}: no dimension estimate ({entry.error})")
    params = {"command": "zoom", "c0": args.c0,
              "template": args.template.descriptor(), "maxIter": args.iters,
              "windows": len(windows), "palette": palette.name,
              "pixelsX": args.px, "pixelsY": args.py}
    _finish(args, params, outputs, started)


def cmd_fixed_map(args):
    started = time.perf_counter()
    pair = ParameterPair(args.c0, args.c1)
    samples = fixed_map_F(pair, args.length, args.resolution, args.iters)
    out = _out_dir(args) / "fixed_map.csv"
    write_table(samples, out)
    params = {"command": "fixed-map", "c0": args.c0, "c1": args.c1,
              "expansionLength": args.length, "resolution": args.resolution,
              "maxIter": args.iters}
    _finish(args, params, [out], started)


def cmd_hybrid(args):
    started = time.perf_counter()
    grid = _grid_from_args(args, GridSpec(0j, 4.0, 4.0))
    if args.mode == "mc":
        if args.seed is None:
            raise ConfigError("--mode mc requires an explicit --seed")
        raster = hybrid_mandelbrot(args.c0, grid, args.length, "monte-carlo",
                                   samples=args.samples, seed=args.seed,
                                   orbit_budget=args.iters)
    else:
        raster = hybrid_mandelbrot(args.c0, grid, args.length, "exact",
                                   orbit_budget=args.iters)
    palette = get_palette(args.palette)
    out = _out_dir(args) / "hybrid.ppm"
    write_raster_image(raster, palette, out)
    params = {"command": "hybrid", "c0": args.c0, "wordLength": args.length,
              "mode": raster.mode, "maxIter": args.iters,
              "totalTemplates": raster.total_templates, "palette": palette.name,
              **_grid_params(grid)}
    if args.seed is not None:
        params["seed"] = args.seed
    _finish(args, params, [out], started)


def cmd_error_sweep(args):
    started = time.perf_counter()
    for k in args.positions:
        if not 1 <= k <= args.length:
            raise ConfigError(f"error position {k} outside 1..{args.length}")
    pair = ParameterPair(args.c0, args.c1)
    grid = _grid_from_args(args, default_grid(pair, DEFAULT_PIXELS))
    palette = get_palette(args.palette)
    out_dir = _out_dir(args)
    outputs = []
    for k, raster in error_sweep(args.c1, args.c0, args.positions, args.length, grid):
        out = out_dir / _image_name(f"error_k{k:03d}", palette)
        write_raster_image(raster, palette, out)
        outputs.append(out)
    params = {"command": "error-sweep", "c0": args.c0, "c1": args.c1,
              "positions": ",".join(str(k) for k in args.positions),
              "templateLength": args.length, "maxIter": args.length,
              "palette": palette.name, **_grid_params(grid)}
    _finish(args, params, outputs, started)


def cmd_converge(args):
    started = time.perf_counter()
    pair = ParameterPair(args.c0, args.c1)
    grid = _grid_from_args(args, default_grid(pair, DEFAULT_PIXELS))
    curve = convergence_experiment(pair, args.template, args.roots,
                                   args.reference, grid)
    out = _out_dir(args) / "convergence.csv"
    write_table(curve, out)
    for entry in curve.entries:
        if entry.distance is not None:
            print(f"n={entry.root_length}: d={entry.distance:.6f}")
        else:
            print(f"n={entry.root_length}: {entry.error}")
    params = {"command": "converge", "c0": args.c0, "c1": args.c1,
              "template": args.template.descriptor(),
              "roots": ",".join(str(n) for n in args.roots),
              "referenceLength": args.reference, "maxIter": args.reference,
              **_grid_params(grid)}
    _finish(args, params, [out], started)


def cmd_classify(args):
    started = time.perf_counter()
    pair = ParameterPair(args.c0, args.c1)
    grid = _grid_from_args(args, default_grid(pair, DEFAULT_PIXELS))
    raster = render_julia(pair, args.template, grid, args.iters)
    report = classify_connectivity(raster, args.dust_threshold)
    print(f"verdict={report.verdict} components={report.component_count} "
          f"largestFraction={report.largest_component_fraction:.6f}")
    out = _out_dir(args) / "classify.txt"
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"verdict={report.verdict}\n")
        fh.write(f"componentCount={report.component_count}\n")
        fh.write(f"largestComponentFraction={report.largest_component_fraction!r}\n")
        fh.write(f"dustThreshold={report.dust_threshold}\n")
    params = {"command": "classify", "c0": args.c0, "c1": args.c1,
              "template": args.template.descriptor(), "maxIter": args.iters,
              "dustThreshold": args.dust_threshold, **_grid_params(grid)}
    _finish(args, params, [out], started)


def cmd_dimension(args):
    started = time.perf_counter()
    pair = ParameterPair(args.c0, args.c1)
    grid = _grid_from_args(args, default_grid(pair, DEFAULT_PIXELS))
    raster = render_julia(pair, args.template, grid, args.iters)
    pts = extract_boundary(raster)
    min_scale, max_scale, levels = default_box_scales(grid)
    if args.min_scale is not None:
        min_scale = args.min_scale
    if args.max_scale is not None:
        max_scale = args.max_scale
    result = box_counting_dimension(pts, min_scale, max_scale, args.levels or levels)
    print(f"dimension={result.dimension:.6f}")
    out = _out_dir(args) / "boxcount.csv"
    write_table(result, out)
    params = {"command": "dimension", "c0": args.c0, "c1": args.c1,
              "template": args.template.descriptor(), "maxIter": args.iters,
              "minScale": min_scale, "maxScale": max_scale,
              "levels": args.levels or levels, **_grid_params(grid)}
    _finish(args, params, [out], started)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="templia",
        description="Escape-time engine for template iterations of pairs of "
                    "complex quadratic maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, window_help="0, side 2R+0.2"):
        p = sub.add_parser(name, help=help_text,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.set_defaults(handler=func)
        _add_common(p, window_help)
        p.add_argument("--palette", default="grayscale",
                       choices=["grayscale", "spectrum"], help="output palette")
        return p

    p = add("julia", cmd_julia, "render a template Julia raster")
    p.add_argument("--c0", type=parse_complex, required=True)
    p.add_argument("--c1", type=parse_complex, required=True)
    p.add_argument("--template", type=parse_template_spec, required=True)
    p.add_argument("--iters", type=int, default=DEFAULT_MAX_ITER)

    p = add("mandel-slice", cmd_mandel_slice,
            "fixed-template Mandelbrot slice over the c1 plane", "0, side 4")
    p.add_argument("--c0", type=parse_complex, required=True)
    p.add_argument("--template", type=parse_template_spec, required=True)
    p.add_argument("--iters", type=int, default=DEFAULT_MAX_ITER)

    p = add("mandel-lattice", cmd_mandel_lattice,
            "Mandelbrot slices over a lattice of c0 values", "0, side 4")
    p.add_argument("--template", type=parse_template_spec, required=True)
    p.add_argument("--re", type=parse_range, required=True,
                   help="c0 real range start:step:stop")
    p.add_argument("--im", type=parse_range, required=True,
                   help="c0 imaginary range start:step:stop")
    p.add_argument("--iters", type=int, default=DEFAULT_MAX_ITER)

    p = add("zoom", cmd_zoom, "zoom sequence with boundary dimension estimates")
    p.add_argument("--c0", type=parse_complex, required=True)
    p.add_argument("--template", type=parse_template_spec, required=True)
    p.add_argument("--window", type=parse_window, action="append", required=True,
                   help="re,im,width,height; repeat for nested windows")
    p.add_argument("--iters", type=int, default=DEFAULT_MAX_ITER)

    p = add("fixed-map", cmd_fixed_map,
            "boundedness indicator F over binary expansions of [0,1]")
    p.add_argument("--c0", type=parse_complex, required=True)
    p.add_argument("--c1", type=parse_complex, required=True)
    p.add_argument("--L", dest="length", type=int, default=15,
                   help="binary expansion length")
    p.add_argument("--resolution", type=int, default=4096,
                   help="number of a samples in [0,1]")
    p.add_argument("--iters", type=int, default=DEFAULT_ORBIT_BUDGET,
                   help="orbit budget; the length-L word cycles to this depth")

    p = add("hybrid", cmd_hybrid,
            "per-c1 count of bounded length-L words for fixed c0", "0, side 4")
    p.set_defaults(palette="spectrum")
    p.add_argument("--c0", type=parse_complex, required=True)
    p.add_argument("--L", dest="length", type=int, default=10,
                   help="template word length")
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int, default=4096,
                   help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, default=None,
                   help="Monte Carlo seed (required in mc mode; no entropy default)")
    p.add_argument("--iters", type=int, default=DEFAULT_ORBIT_BUDGET,
                   help="orbit budget; words cycle to this depth")

    p = add("error-sweep", cmd_error_sweep,
            "Julia rasters for a single error at positions k of a perfect template")
    p.add_argument("--c0", type=parse_complex, required=True,
                   help="error map parameter")
    p.add_argument("--c1", type=parse_complex, required=True,
                   help="desired map parameter")
    p.add_argument("--positions", type=parse_positions, required=True,
                   help="comma-separated 1-based error positions")
    p.add_argument("--N", dest="length", type=int, default=DEFAULT_MAX_ITER,
                   help="template length (also the iteration count)")

    p = add("converge", cmd_converge,
            "Hausdorff distance of truncated-root Julia boundaries to the reference")
    p.add_argument("--c0", type=parse_complex, required=True)
    p.add_argument("--c1", type=parse_complex, required=True)
    p.add_argument("--template", type=parse_template_spec, required=True)
    p.add_argument("--roots", type=parse_positions, required=True,
                   help="comma-separated root lengths")
    p.add_argument("--reference", type=int, default=DEFAULT_MAX_ITER,
                   help="reference truncation length")

    p = add("classify", cmd_classify, "connectivity verdict for a Julia raster")
    p.add_argument("--c0", type=parse_complex, required=True)
    p.add_argument("--c1", type=parse_complex, required=True)
    p.add_argument("--template", type=parse_template_spec, required=True)
    p.add_argument("--iters", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--dust-threshold", type=int, default=DEFAULT_DUST_THRESHOLD,
                   help="largest component size still counted as dust, in pixels")

    p = add("dimension", cmd_dimension,
            "box-counting dimension of a Julia boundary")
    p.add_argument("--c0", type=parse_complex, required=True)
    p.add_argument("--c1", type=parse_complex, required=True)
    p.add_argument("--template", type=parse_template_spec, required=True)
    p.add_argument("--iters", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--min-scale", type=float, default=None,
                   help="smallest box size (default: 2 pixels)")
    p.add_argument("--max-scale", type=float, default=None,
                   help="largest box size (default: window/8)")
    p.add_argument("--levels", type=int, default=None,
                   help="number of geometric scales (default: 6)")

    return parser


def _resolve_threads(args) -> None:
    threads = args.threads
    if threads is None:
        env = os.environ.get("TEMPLIA_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"TEMPLIA_THREADS must be an integer, got '{env}'")
    kernels.set_threads(threads)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(preprocess_argv(
        sys.argv[1:] if argv is None else list(argv)))
    try:
        _resolve_threads(args)
        args.handler(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
