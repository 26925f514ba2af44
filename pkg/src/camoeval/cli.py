"""Command-line surface: evaluate-color, evaluate-texture, segment, design.

Reports go to stdout as JSON (or an aligned table with --format table);
file artifacts are written atomically into --out-dir together with a run
manifest recording the full effective configuration. Exit codes: 0 on
success, 2 on I/O or decode failures, 3 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .color_hist import (
    QuantizationScheme,
    bhattacharyya,
    build_histogram,
    histogram_to_json,
    merge_histograms,
)
from .errors import CamoEvalError, MalformedImage, UnsupportedFormat
from .image_io import encode_png, load_image
from .segment import (
    KmeansConfig,
    edge_png_bytes,
    extract_edges,
    extract_patches,
    kmeans_segment,
    label_png_bytes,
)
from .synth import dominant_palette, evaluate_design, provenance_json, render_pattern
from .texture import GlcmConfig, texture_compare, texture_vector, texture_vector_to_json

SCHEMA_VERSION = 1

DEFAULTS = {
    "k": 4,
    "gray_levels": 16,
    "glcm_distance": 1,
    "h_bins": 16,
    "s_bins": 4,
    "v_bins": 4,
    "include_v": False,
    "palette_size": 5,
    "donor": 0,
    "min_area": 1,
    "color_space": "hsv",
    "format": "json",
    "width": None,
    "height": None,
}


class _ConfigError(Exception):
    """User-facing configuration problem (exit code 3)."""


def entry() -> None:
    sys.exit(main())


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_help()
        return 3
    ctx = _RunContext(args)
    try:
        ctx.config = _effective_config(args)
        args.handler(args, ctx)
    except (UnsupportedFormat, MalformedImage, OSError) as exc:
        _emit_error(exc)
        ctx.write_manifest(error=exc)
        return 2
    except (_ConfigError, CamoEvalError, ValueError) as exc:
        _emit_error(exc)
        ctx.write_manifest(error=exc)
        return 3
    ctx.write_manifest()
    return 0


def _emit_error(exc: Exception) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload), file=sys.stderr)


class _RunContext:
    """Collects outputs in memory and flushes them atomically on success."""

    def __init__(self, args: argparse.Namespace):
        self.command = getattr(args, "command", "")
        self.inputs: list[str] = []
        self.config: dict = {}
        self.out_dir: Path | None = Path(args.out_dir) if getattr(args, "out_dir", None) else None
        self.staged: dict[Path, bytes] = {}

    def stage(self, name: str, data: bytes | str) -> Path:
        assert self.out_dir is not None
        path = self.out_dir / name
        self.staged[path] = data.encode("utf-8") if isinstance(data, str) else data
        return path

    def flush(self) -> None:
        if not self.staged:
            return
        assert self.out_dir is not None
        self.out_dir.mkdir(parents=True, exist_ok=True)
        for path, data in self.staged.items():
            _atomic_write(path, data)

    def write_manifest(self, error: Exception | None = None) -> None:
        if self.out_dir is None:
            return
        manifest = {
            "schemaVersion": SCHEMA_VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "config": self.config,
            "outputs": [str(p) for p in self.staged] if error is None else [],
            "toolVersion": __version__,
        }
        if error is not None:
            manifest["error"] = {"type": type(error).__name__, "message": str(error)}
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            _atomic_write(self.out_dir / "manifest.json", (json.dumps(manifest, indent=2) + "\n").encode())
        except OSError:
            pass  # a manifest failure must not mask the primary outcome


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _default_seed() -> int:
    raw = os.environ.get("CAMO_EVAL_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise _ConfigError(f"CAMO_EVAL_SEED must be an integer, got {raw!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="camoeval", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command")

    def add_common(p: argparse.ArgumentParser, with_out_dir: bool = True):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--format", choices=["json", "table"], default=None)
        p.add_argument("--seed", type=int, default=None)
        if with_out_dir:
            p.add_argument("--out-dir", default=None, help="directory for file artifacts + manifest")

    def add_scheme(p: argparse.ArgumentParser):
        p.add_argument("--h-bins", type=int, default=None)
        p.add_argument("--s-bins", type=int, default=None)
        p.add_argument("--v-bins", type=int, default=None)
        p.add_argument("--include-v", action="store_true", default=None)

    def add_glcm(p: argparse.ArgumentParser):
        p.add_argument("--gray-levels", type=int, default=None)
        p.add_argument("--glcm-distance", type=int, default=None)

    p = sub.add_parser("evaluate-color", help="HS-histogram Bhattacharyya similarity of two images")
    p.add_argument("camo")
    p.add_argument("background")
    add_scheme(p)
    add_common(p)
    p.add_argument("--emit-histograms", action="store_true", help="write both histograms as JSON (needs --out-dir)")
    p.set_defaults(handler=cmd_evaluate_color)

    p = sub.add_parser("evaluate-texture", help="GLCM texture vectors and order-of-magnitude comparison")
    p.add_argument("camo")
    p.add_argument("background")
    add_glcm(p)
    add_common(p)
    p.set_defaults(handler=cmd_evaluate_texture)

    p = sub.add_parser("segment", help="k-means clustering, edge mask and patch extraction")
    p.add_argument("background")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--color-space", choices=["rgb", "hsv"], default=None)
    p.add_argument("--min-area", type=int, default=None)
    add_common(p)
    p.set_defaults(handler=cmd_segment)

    p = sub.add_parser("design", help="synthesize a composite pattern from 1+ environments and evaluate it")
    p.add_argument("backgrounds", nargs="+")
    p.add_argument("--palette-size", type=int, default=None)
    p.add_argument("--donor", type=int, default=None, help="index into backgrounds used for patch geometry")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--color-space", choices=["rgb", "hsv"], default=None)
    p.add_argument("--min-area", type=int, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    add_scheme(p)
    add_glcm(p)
    add_common(p)
    p.set_defaults(handler=cmd_design)

    return parser


def _effective_config(args: argparse.Namespace) -> dict:
    """Resolve flags > config file > defaults into one flat dict."""
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise _ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise _ConfigError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS) - {"seed"}
        if unknown:
            raise _ConfigError(f"unknown config keys: {sorted(unknown)}")

    cfg = {}
    for key, default in DEFAULTS.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            cfg[key] = flag_val
        elif key in file_cfg:
            cfg[key] = file_cfg[key]
        else:
            cfg[key] = default
    seed_flag = getattr(args, "seed", None)
    if seed_flag is not None:
        cfg["seed"] = seed_flag
    elif "seed" in file_cfg:
        cfg["seed"] = int(file_cfg["seed"])
    else:
        cfg["seed"] = _default_seed()
    return cfg


def _scheme_from(cfg: dict) -> QuantizationScheme:
    try:
        return QuantizationScheme(
            h_bins=cfg["h_bins"], s_bins=cfg["s_bins"], v_bins=cfg["v_bins"], include_v=bool(cfg["include_v"])
        )
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc


def _glcm_from(cfg: dict) -> GlcmConfig:
    try:
        return GlcmConfig(gray_levels=cfg["gray_levels"], distance=cfg["glcm_distance"])
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc


def _print_report(report: dict, fmt: str, table_lines: list[str]) -> None:
    if fmt == "table":
        print("\n".join(table_lines))
    else:
        print(json.dumps(report, indent=2))


def cmd_evaluate_color(args: argparse.Namespace, ctx: _RunContext) -> None:
    cfg = ctx.config
    ctx.inputs = [args.camo, args.background]
    scheme = _scheme_from(cfg)
    camo = load_image(args.camo)
    background = load_image(args.background)
    p = build_histogram(camo, scheme)
    q = build_histogram(background, scheme)
    score = bhattacharyya(p, q)

    if args.emit_histograms:
        if ctx.out_dir is None:
            raise _ConfigError("--emit-histograms requires --out-dir")
        ctx.stage("camo_histogram.json", json.dumps(histogram_to_json(p), indent=2) + "\n")
        ctx.stage("background_histogram.json", json.dumps(histogram_to_json(q), indent=2) + "\n")
    ctx.flush()

    report = {
        "schemaVersion": SCHEMA_VERSION,
        "percent": score.percent,
        "coefficient": score.coefficient,
        "distance": score.distance,
    }
    table = [
        f"{'metric':<12}{'value':>14}",
        f"{'percent':<12}{score.percent:>14.4f}",
        f"{'coefficient':<12}{score.coefficient:>14.6f}",
        f"{'distance':<12}{score.distance:>14.6f}",
    ]
    _print_report(report, cfg["format"], table)


def cmd_evaluate_texture(args: argparse.Namespace, ctx: _RunContext) -> None:
    cfg = ctx.config
    ctx.inputs = [args.camo, args.background]
    glcm_cfg = _glcm_from(cfg)
    camo = load_image(args.camo)
    background = load_image(args.background)
    v1 = texture_vector(camo, glcm_cfg)
    v2 = texture_vector(background, glcm_cfg)
    comparison = texture_compare(v1, v2)

    header = "a1,b1,a2,b2,a3,b3,a4,b4"
    if ctx.out_dir is not None:
        ctx.stage("camo_texture.csv", header + "\n" + v1.csv_row() + "\n")
        ctx.stage("background_texture.csv", header + "\n" + v2.csv_row() + "\n")
        ctx.stage(
            "texture_comparison.json",
            json.dumps({"schemaVersion": SCHEMA_VERSION, "comparison": comparison.to_json()}, indent=2) + "\n",
        )
    ctx.flush()

    report = {
        "schemaVersion": SCHEMA_VERSION,
        "camoRow": v1.csv_row(),
        "backgroundRow": v2.csv_row(),
        "camo": texture_vector_to_json(v1, glcm_cfg),
        "background": texture_vector_to_json(v2, glcm_cfg),
        "comparison": comparison.to_json(),
    }
    table = [header, v1.csv_row(), v2.csv_row(), ""]
    table.append(f"{'feature':<14}{'ratio':>12}  same order of magnitude")
    for name, entry in comparison.to_json().items():
        ratio = "nan" if entry["ratio"] is None else f"{entry['ratio']:.4f}"
        table.append(f"{name:<14}{ratio:>12}  {entry['sameOrderOfMagnitude']}")
    _print_report(report, cfg["format"], table)


def cmd_segment(args: argparse.Namespace, ctx: _RunContext) -> None:
    cfg = ctx.config
    ctx.inputs = [args.background]
    if ctx.out_dir is None:
        raise _ConfigError("segment requires --out-dir")
    image = load_image(args.background)
    try:
        km = KmeansConfig(k=cfg["k"], seed=cfg["seed"], color_space=cfg["color_space"])
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc
    if cfg["min_area"] < 1:
        raise _ConfigError("min_area must be >= 1")
    segmap = kmeans_segment(image, km)
    edges = extract_edges(segmap)
    patches = extract_patches(segmap, image, min_area=cfg["min_area"])

    ctx.stage("labels.png", label_png_bytes(segmap, image))
    ctx.stage("labels.json", json.dumps({"schemaVersion": SCHEMA_VERSION, **segmap.sidecar()}, indent=2) + "\n")
    ctx.stage("edges.png", edge_png_bytes(edges))
    patches_doc = {
        "schemaVersion": SCHEMA_VERSION,
        "k": km.k,
        "minArea": cfg["min_area"],
        "patches": [
            {
                "clusterId": p.cluster_id,
                "area": p.area,
                "boundingBox": list(p.bbox),
                "meanColor": list(p.mean_color),
            }
            for p in patches
        ],
    }
    ctx.stage("patches.json", json.dumps(patches_doc, indent=2) + "\n")
    ctx.flush()

    report = {
        "schemaVersion": SCHEMA_VERSION,
        "k": km.k,
        "inertia": segmap.inertia,
        "patchCount": len(patches),
        "outputs": [str(p) for p in ctx.staged],
    }
    table = [f"k={km.k}  inertia={segmap.inertia:.6g}  patches={len(patches)}"]
    table += [f"wrote {p}" for p in ctx.staged]
    _print_report(report, cfg["format"], table)


def cmd_design(args: argparse.Namespace, ctx: _RunContext) -> None:
    cfg = ctx.config
    ctx.inputs = list(args.backgrounds)
    if ctx.out_dir is None:
        raise _ConfigError("design requires --out-dir")
    scheme = _scheme_from(cfg)
    glcm_cfg = _glcm_from(cfg)
    donor_idx = cfg["donor"]
    if not 0 <= donor_idx < len(args.backgrounds):
        raise _ConfigError(f"--donor {donor_idx} out of range for {len(args.backgrounds)} backgrounds")

    images = [load_image(path) for path in args.backgrounds]
    histograms = [build_histogram(img, scheme) for img in images]
    merged = merge_histograms(histograms)
    palette = dominant_palette(merged, images, palette_size=cfg["palette_size"])

    donor_img = images[donor_idx]
    try:
        km = KmeansConfig(k=cfg["k"], seed=cfg["seed"], color_space=cfg["color_space"])
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc
    segmap = kmeans_segment(donor_img, km)
    patches = extract_patches(segmap, donor_img, min_area=cfg["min_area"])
    width = cfg["width"] or donor_img.width
    height = cfg["height"] or donor_img.height
    pattern = render_pattern(
        patches, palette, width=width, height=height, seed=cfg["seed"], donor=args.backgrounds[donor_idx]
    )
    reports = evaluate_design(pattern, images, scheme, glcm_cfg)

    ctx.stage("pattern.png", encode_png(pattern.image))
    ctx.stage("provenance.json", json.dumps(provenance_json(pattern, scheme, glcm_cfg), indent=2) + "\n")
    evaluations = []
    for path, rep in zip(args.backgrounds, reports):
        evaluations.append(
            {
                "environment": path,
                "percent": rep.similarity.percent,
                "coefficient": rep.similarity.coefficient,
                "distance": rep.similarity.distance,
                "patternTexture": list(rep.pattern_texture.as_row()),
                "environmentTexture": list(rep.environment_texture.as_row()),
                "comparison": rep.comparison.to_json(),
            }
        )
    eval_doc = {"schemaVersion": SCHEMA_VERSION, "evaluations": evaluations}
    ctx.stage("evaluation.json", json.dumps(eval_doc, indent=2) + "\n")
    ctx.flush()

    report = {
        "schemaVersion": SCHEMA_VERSION,
        "paletteSize": palette.size,
        "donor": args.backgrounds[donor_idx],
        "evaluations": evaluations,
        "outputs": [str(p) for p in ctx.staged],
    }
    width_col = max(len(e["environment"]) for e in evaluations)
    table = [f"{'environment':<{width_col + 2}}{'percent':>10}  energy-ok  entropy-ok"]
    for e in evaluations:
        table.append(
            f"{e['environment']:<{width_col + 2}}{e['percent']:>10.4f}"
            f"  {str(e['comparison']['energy']['sameOrderOfMagnitude']):<9}"
            f"  {str(e['comparison']['entropy']['sameOrderOfMagnitude'])}"
        )
    _print_report(report, cfg["format"], table)
