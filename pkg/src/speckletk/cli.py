"""Command-line front door: process, sweep, compose, edges, simulate, serve.

Every subcommand is deterministic given its flags; outputs are written to a
temp file and renamed so failures never leave truncated containers behind.
Each written image is accompanied by a JSON provenance sidecar.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__, images
from .descriptors import ActivityMap, Algorithm, DescriptorParams, compute_descriptor
from .edges import EdgeParams, canny_edges
from .errors import SpeckleTkError
from .postprocess import (
    CompositeSpec,
    DisplayParams,
    FixedRange,
    MinMax,
    Normalization,
    PseudocolorLut,
    apply_exponent,
    apply_pseudocolor,
    compose_rgb,
    normalize_map,
    quantize_u8,
)
from .presets import PRESETS
from .simulate import ActivityField, SimulationParams, generate_stack, glyph_field
from .stack_io import SpkFrameReader, read_stack, write_stack

SHEET_TILE_MAX = 160
SHEET_TILES_PER_PAGE = 64
LABEL_HEIGHT = 14


class CliError(Exception):
    """User-facing failure; message is printed as the one-line reason."""


@contextmanager
def _atomic(dest: Path):
    """Yield a temp path that is renamed onto dest only on success."""
    dest.parent.mkdir(parents=True, exist_ok=True)
    tmp = dest.with_name(dest.name + ".part")
    try:
        yield tmp
        os.replace(tmp, dest)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_sidecar(out_path: Path, payload: dict) -> None:
    payload = {"tool_version": __version__, **payload}
    sidecar = out_path.with_name(out_path.name + ".json")
    with _atomic(sidecar) as tmp:
        tmp.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _require_file(path: str | Path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"input not found: {p}")
    return p


def _parse_norm(text: str) -> Normalization:
    if text == "minmax":
        return MinMax()
    if text.startswith("fixed:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(f"bad --norm {text!r}, expected fixed:lo:hi")
        try:
            return FixedRange(float(parts[1]), float(parts[2]))
        except ValueError as e:
            raise CliError(f"bad --norm {text!r}: {e}") from e
    raise CliError(f"bad --norm {text!r}, expected minmax or fixed:lo:hi")


def _norm_text(norm: Normalization) -> str:
    if isinstance(norm, FixedRange):
        return f"fixed:{norm.lo:g}:{norm.hi:g}"
    return "minmax"


def _fmt(x: float) -> str:
    return f"{x:g}"


def _write_image_u8(img: np.ndarray, dest: Path) -> None:
    suffix = dest.suffix.lower()
    with _atomic(dest) as tmp:
        if suffix == ".pgm":
            if img.ndim != 2:
                raise CliError(f"{dest}: PGM can only hold grayscale output")
            images.write_pgm(img, tmp)
        elif suffix == ".png":
            if img.ndim == 2:
                images.write_png_gray(img, tmp)
            else:
                images.write_png_rgb(img, tmp)
        else:
            raise CliError(f"{dest}: unsupported output extension {suffix!r} (use .pgm or .png)")


# ---------------------------------------------------------------- process


def cmd_process(args: argparse.Namespace) -> int:
    in_path = _require_file(args.input)
    out_path = Path(args.output)
    norm = _parse_norm(args.norm)
    params = DescriptorParams(Algorithm(args.algo), args.phi, args.max_lag)

    source = SpkFrameReader(in_path)
    amap = compute_descriptor(source, params)

    if out_path.suffix.lower() == ".f32m":
        with _atomic(out_path) as tmp:
            images.write_f32m(amap.values.astype(np.float32), tmp)
    else:
        unit = apply_exponent(normalize_map(amap.values, norm), args.alpha)
        if args.lut:
            lut = PseudocolorLut.from_csv(_require_file(args.lut))
            _write_image_u8(apply_pseudocolor(unit, lut), out_path)
        else:
            _write_image_u8(quantize_u8(unit), out_path)

    _write_sidecar(
        out_path,
        {
            "input": str(in_path),
            "input_sha256": _sha256(in_path),
            "algorithm": args.algo,
            "phi_degrees": args.phi,
            "alpha": args.alpha,
            "normalization": _norm_text(norm),
            "max_lag": args.max_lag,
            "lut": str(args.lut) if args.lut else None,
            "degenerate_terms": amap.degenerate_terms,
        },
    )
    return 0


# ---------------------------------------------------------------- sweep


def _sheet_pages(
    tiles: list[tuple[str, np.ndarray]], grid: tuple[int, int] | None
) -> list[np.ndarray]:
    """Tile labelled u8 images into contact-sheet pages (RGB arrays)."""
    from PIL import Image, ImageDraw, ImageFont

    font = ImageFont.load_default()
    h, w = tiles[0][1].shape
    scale = min(1.0, SHEET_TILE_MAX / max(h, w))
    tw, th = max(1, round(w * scale)), max(1, round(h * scale))

    if grid is None:
        per_page = min(len(tiles), SHEET_TILES_PER_PAGE)
        cols = math.ceil(math.sqrt(per_page))
        rows = math.ceil(per_page / cols)
    else:
        rows, cols = grid
    per_page = min(rows * cols, SHEET_TILES_PER_PAGE)

    pages = []
    for start in range(0, len(tiles), per_page):
        chunk = tiles[start : start + per_page]
        page_rows = math.ceil(len(chunk) / cols)
        sheet = Image.new("RGB", (cols * tw, page_rows * (th + LABEL_HEIGHT)), (24, 24, 24))
        draw = ImageDraw.Draw(sheet)
        for i, (label, img) in enumerate(chunk):
            r, c = divmod(i, cols)
            thumb = Image.fromarray(img, mode="L").resize((tw, th), Image.NEAREST)
            y0 = r * (th + LABEL_HEIGHT)
            sheet.paste(thumb, (c * tw, y0))
            draw.text((c * tw + 2, y0 + th + 1), label, fill=(230, 230, 230), font=font)
        pages.append(np.asarray(sheet))
    return pages


def cmd_sweep(args: argparse.Namespace) -> int:
    in_path = _require_file(args.input)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    norm = _parse_norm(args.norm)

    algos = [Algorithm(a.strip()) for a in args.algos.split(",") if a.strip()]
    phis = [float(p) for p in args.phis.split(",") if p.strip()]
    alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
    if not algos or not phis or not alphas:
        raise CliError("sweep needs non-empty --algos, --phis and --alphas")
    grid = None
    if args.grid:
        try:
            rows, cols = (int(v) for v in args.grid.lower().split("x"))
        except ValueError as e:
            raise CliError(f"bad --grid {args.grid!r}, expected ROWSxCOLS") from e
        if rows < 1 or cols < 1:
            raise CliError(f"bad --grid {args.grid!r}, dims must be >= 1")
        grid = (rows, cols)

    stack = read_stack(in_path)
    digest = _sha256(in_path)
    combos = list(itertools.product(algos, phis, alphas))

    def render(combo: tuple[Algorithm, float, float]) -> tuple[str, np.ndarray]:
        algo, phi, alpha = combo
        amap = compute_descriptor(stack, DescriptorParams(algo, phi, args.max_lag))
        img = quantize_u8(apply_exponent(normalize_map(amap.values, norm), alpha))
        name = f"{algo.value}_phi{_fmt(phi)}_a{_fmt(alpha)}.pgm"
        _write_image_u8(img, out_dir / name)
        _write_sidecar(
            out_dir / name,
            {
                "input": str(in_path),
                "input_sha256": digest,
                "algorithm": algo.value,
                "phi_degrees": phi,
                "alpha": alpha,
                "normalization": _norm_text(norm),
                "degenerate_terms": amap.degenerate_terms,
            },
        )
        return name, img

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        results = list(pool.map(render, combos))

    tiles = [
        (f"{algo.value} phi={_fmt(phi)} a={_fmt(alpha)}", img)
        for (algo, phi, alpha), (_, img) in zip(combos, results)
    ]
    pages = _sheet_pages(tiles, grid)
    sheet_names = []
    for i, page in enumerate(pages):
        name = "contact_sheet.png" if i == 0 else f"contact_sheet_{i + 1}.png"
        _write_image_u8(page, out_dir / name)
        sheet_names.append(name)
    _write_sidecar(
        out_dir / sheet_names[0],
        {
            "input": str(in_path),
            "input_sha256": digest,
            "algorithms": [a.value for a in algos],
            "phis": phis,
            "alphas": alphas,
            "normalization": _norm_text(norm),
            "pages": sheet_names,
        },
    )

    with _atomic(out_dir / "index.csv") as tmp:
        lines = ["algorithm,phi,alpha,file"]
        lines += [
            f"{algo.value},{_fmt(phi)},{_fmt(alpha)},{name}"
            for (algo, phi, alpha), (name, _) in zip(combos, results)
        ]
        tmp.write_text("\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------- compose


def _load_map(path: str) -> ActivityMap:
    p = _require_file(path)
    values = images.read_f32m(p).astype(np.float64)
    return ActivityMap(values, None, stack_label=p.stem)


def cmd_compose(args: argparse.Namespace) -> int:
    spec_path = _require_file(args.spec)
    try:
        spec = json.loads(spec_path.read_text())
    except json.JSONDecodeError as e:
        raise CliError(f"{spec_path}: invalid JSON ({e})") from e
    out_path = Path(args.output)

    provenance: dict = {"spec": str(spec_path)}
    if "preset" in spec:
        name = spec["preset"]
        if name not in PRESETS:
            raise CliError(f"unknown preset {name!r}, have {sorted(PRESETS)}")
        preset = PRESETS[name]
        stacks = spec.get("stacks") or {}
        if "stack" in spec:
            stacks = {ch: spec["stack"] for ch in "rgb"}
        missing = [ch for ch in "rgb" if ch not in stacks]
        if missing:
            raise CliError(f"preset compose needs a stack per channel, missing {missing}")
        channels = []
        for ch in "rgb":
            binding = preset.channels()[ch]
            source = SpkFrameReader(_require_file(stacks[ch]))
            amap = compute_descriptor(
                source, DescriptorParams(binding.algorithm, binding.phi_degrees)
            )
            channels.append((amap, DisplayParams(alpha=binding.alpha)))
        provenance.update(
            {"preset": name, "bindings": preset.as_dict(), "stacks": {c: str(stacks[c]) for c in "rgb"}}
        )
    else:
        missing = [ch for ch in "rgb" if ch not in spec]
        if missing:
            raise CliError(f"compose spec must define r, g and b channels, missing {missing}")
        channels = []
        binding_info = {}
        for ch in "rgb":
            entry = spec[ch]
            if not isinstance(entry, dict) or "map" not in entry:
                raise CliError(f"channel {ch!r} must be an object with a 'map' path")
            amap = _load_map(entry["map"])
            alpha = float(entry.get("alpha", 1.0))
            norm = _parse_norm(entry.get("norm", "minmax"))
            channels.append((amap, DisplayParams(alpha=alpha, normalization=norm)))
            binding_info[ch] = {"map": entry["map"], "alpha": alpha, "norm": _norm_text(norm)}
        provenance["channels"] = binding_info

    rgb = compose_rgb(CompositeSpec(*channels))
    if out_path.suffix.lower() != ".png":
        raise CliError(f"{out_path}: composites are written as PNG")
    _write_image_u8(rgb, out_path)
    _write_sidecar(out_path, provenance)
    return 0


# ---------------------------------------------------------------- edges


def cmd_edges(args: argparse.Namespace) -> int:
    in_path = _require_file(args.input)
    out_path = Path(args.output)
    params = EdgeParams(sigma=args.sigma, high_threshold=args.threshold, low_ratio=args.low_ratio)
    image = images.read_rgb_or_gray(in_path)
    edge_map = canny_edges(image, params)
    _write_image_u8(edge_map * np.uint8(255), out_path)
    _write_sidecar(
        out_path,
        {
            "input": str(in_path),
            "input_sha256": _sha256(in_path),
            "sigma": args.sigma,
            "high_threshold": args.threshold,
            "low_ratio": args.low_ratio,
        },
    )
    return 0


# ---------------------------------------------------------------- simulate


def cmd_simulate(args: argparse.Namespace) -> int:
    if (args.glyph is None) == (args.field is None):
        raise CliError("pass exactly one of --glyph or --field")
    if args.glyph is not None:
        field = glyph_field(args.glyph, args.size, args.size, args.rho_bg, args.rho_glyph)
    else:
        field = ActivityField(images.read_f32m(_require_file(args.field)).astype(np.float64))

    params = SimulationParams(
        frames=args.frames, grain_size=args.grain, seed=args.seed, mean_intensity=args.mean
    )
    stack, truth = generate_stack(field, params)

    out_path = Path(args.output)
    truth_path = Path(args.truth) if args.truth else out_path.with_suffix(".truth.f32m")
    with _atomic(out_path) as tmp:
        write_stack(stack, tmp)
    with _atomic(truth_path) as tmp:
        images.write_f32m(truth.rho.astype(np.float32), tmp)
    _write_sidecar(
        out_path,
        {
            "glyph": args.glyph,
            "field": str(args.field) if args.field else None,
            "frames": args.frames,
            "size": args.size,
            "grain_size": args.grain,
            "seed": args.seed,
            "mean_intensity": args.mean,
            "rho_background": args.rho_bg,
            "rho_glyph": args.rho_glyph,
            "truth": str(truth_path),
        },
    )
    return 0


# ---------------------------------------------------------------- serve


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        stack_paths=[_require_file(p) for p in args.stack],
        preview_factor=args.preview_factor,
        ui_dir=Path(args.ui) if args.ui else None,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speckletk",
        description="Dynamic-speckle activity maps, sweeps, RGB composites and a tuning service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="compute one activity map and write an image")
    p.add_argument("-i", "--input", required=True, help="SPK1 stack file")
    p.add_argument("-o", "--output", required=True, help="output image (.pgm/.png) or raw .f32m")
    p.add_argument("--algo", required=True, choices=[a.value for a in Algorithm])
    p.add_argument("--phi", type=float, default=0.0, help="tuning angle in degrees [0, 180]")
    p.add_argument("--alpha", type=float, default=1.0, help="display exponent")
    p.add_argument("--norm", default="minmax", help="minmax or fixed:lo:hi")
    p.add_argument("--lut", default=None, help="pseudocolor LUT CSV (256 x index,r,g,b)")
    p.add_argument("--max-lag", type=int, default=None, help="GD frame-pair lag cap")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("sweep", help="render a parameter grid plus contact sheet and index")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-O", "--out-dir", required=True)
    p.add_argument("--algos", required=True, help="comma list, e.g. avd,fujii,tau")
    p.add_argument("--phis", required=True, help="comma list of angles in degrees")
    p.add_argument("--alphas", default="1", help="comma list of display exponents")
    p.add_argument("--norm", default="minmax")
    p.add_argument("--grid", default=None, help="contact sheet ROWSxCOLS (default: auto)")
    p.add_argument("--threads", type=int, default=os.cpu_count())
    p.add_argument("--max-lag", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compose", help="fuse three maps or a preset into an RGB PNG")
    p.add_argument("--spec", required=True, help="JSON channel-binding spec")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("edges", help="Gaussian blur + Canny edge detection")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("-t", "--threshold", type=float, default=0.7, help="high threshold fraction")
    p.add_argument("--sigma", type=float, default=1.4)
    p.add_argument("--low-ratio", type=float, default=0.4)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("simulate", help="generate a synthetic stack with ground truth")
    p.add_argument("--glyph", choices=["disk", "rect", "stroke"], default=None)
    p.add_argument("--field", default=None, help="F32M file of per-pixel rho instead of a glyph")
    p.add_argument("--frames", type=int, default=200)
    p.add_argument("--size", type=int, default=128, help="square field side for --glyph")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rho-bg", type=float, default=0.99)
    p.add_argument("--rho-glyph", type=float, default=0.5)
    p.add_argument("--grain", type=float, default=2.0)
    p.add_argument("--mean", type=float, default=100.0)
    p.add_argument("-o", "--output", required=True, help="SPK1 output path")
    p.add_argument("--truth", default=None, help="ground-truth F32M path (default: <output>.truth.f32m)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the local tuning service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--stack", action="append", default=[], help="SPK1 stack to preload (repeatable)")
    p.add_argument("--preview-factor", type=int, default=2, help="preview spatial downsample factor")
    p.add_argument("--ui", default=None, help="static workbench directory to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, SpeckleTkError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
