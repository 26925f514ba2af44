"""Composite camouflage synthesis and end-to-end design evaluation.

The palette comes from the highest-frequency bins of a merged
multi-environment histogram; patch geometry is borrowed from a donor
segmentation and recolored so edge-adjacent patches never share a color.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .color_hist import (
    ColorHistogram,
    QuantizationScheme,
    SimilarityScore,
    bhattacharyya,
    build_histogram,
    quantize_image,
)
from .errors import EmptyHistogram, EmptyPalette, NoPatches, PaletteTooLarge
from .image_io import RasterImage
from .segment import Patch, patch_grid
from .texture import GlcmConfig, TextureComparison, TextureVector, texture_compare, texture_vector

_MAX_REJECTION_DRAWS = 16


@dataclass(frozen=True)
class PaletteEntry:
    color: tuple[int, int, int]
    weight: float
    bin_index: int


@dataclass(frozen=True)
class Palette:
    """Dominant colors sorted by weight descending (ties by bin index)."""

    entries: tuple[PaletteEntry, ...]

    def __post_init__(self):
        total = sum(e.weight for e in self.entries)
        if self.entries and abs(total - 1.0) > 1e-9:
            raise ValueError(f"palette weights sum to {total!r}, expected 1")

    @property
    def size(self) -> int:
        return len(self.entries)

    def colors_array(self) -> np.ndarray:
        return np.asarray([e.color for e in self.entries], dtype=np.uint8)

    def weights_array(self) -> np.ndarray:
        return np.asarray([e.weight for e in self.entries], dtype=np.float64)

    def to_json(self) -> list[dict]:
        return [
            {"color": list(e.color), "weight": e.weight, "binIndex": e.bin_index}
            for e in self.entries
        ]


@dataclass(frozen=True)
class PatternProvenance:
    palette: Palette
    donor: str
    seed: int


@dataclass(frozen=True)
class CamoPattern:
    image: RasterImage
    provenance: PatternProvenance

    @property
    def width(self) -> int:
        return self.image.width

    @property
    def height(self) -> int:
        return self.image.height


@dataclass(frozen=True)
class DesignEvaluation:
    """Color and texture comparison of the pattern against one environment."""

    similarity: SimilarityScore
    pattern_texture: TextureVector
    environment_texture: TextureVector
    comparison: TextureComparison


def dominant_palette(
    merged: ColorHistogram,
    images: Sequence[RasterImage],
    palette_size: int = 5,
) -> Palette:
    """Pick the top histogram bins and color each by the mean RGB of its member pixels."""
    if palette_size < 1:
        raise ValueError("palette_size must be >= 1")
    if merged.scheme is None:
        raise ValueError("merged histogram must carry its quantization scheme")
    values = merged.values
    occupied = np.nonzero(values)[0]
    if occupied.size == 0:
        raise EmptyHistogram("merged histogram has no mass")
    if palette_size > occupied.size:
        raise PaletteTooLarge(f"palette_size {palette_size} exceeds {occupied.size} occupied bins")

    top = sorted(occupied.tolist(), key=lambda i: (-values[i], i))[:palette_size]

    bins = merged.bin_count
    sums = np.zeros((bins, 3), dtype=np.float64)
    counts = np.zeros(bins, dtype=np.int64)
    for img in images:
        flat = quantize_image(img, merged.scheme).ravel()
        px = img.pixels.reshape(-1, 3).astype(np.float64)
        counts += np.bincount(flat, minlength=bins)
        for c in range(3):
            sums[:, c] += np.bincount(flat, weights=px[:, c], minlength=bins)

    selected = values[top]
    weights = selected / selected.sum()
    entries = []
    for idx, w in zip(top, weights):
        if counts[idx] == 0:
            raise ValueError(
                f"bin {idx} has merged mass but no pixels in the supplied images; "
                "was the histogram built with a different scheme?"
            )
        mean = np.rint(sums[idx] / counts[idx]).astype(np.uint8)
        entries.append(PaletteEntry(color=(int(mean[0]), int(mean[1]), int(mean[2])), weight=float(w), bin_index=int(idx)))
    return Palette(entries=tuple(entries))


def _scaled_patch_grid(patches: Sequence[Patch], width: int, height: int) -> np.ndarray:
    donor_w = max(p.bbox[2] for p in patches)
    donor_h = max(p.bbox[3] for p in patches)
    grid = patch_grid(list(patches), donor_w, donor_h)
    sy = (np.arange(height) * donor_h) // height
    sx = (np.arange(width) * donor_w) // width
    return grid[np.ix_(sy, sx)]


def _patch_adjacency(grid: np.ndarray, n_patches: int) -> list[set[int]]:
    neighbors: list[set[int]] = [set() for _ in range(n_patches)]
    a, b = grid[:, :-1], grid[:, 1:]
    pairs = np.stack([a.ravel(), b.ravel()], axis=1)
    c, d = grid[:-1, :], grid[1:, :]
    pairs = np.concatenate([pairs, np.stack([c.ravel(), d.ravel()], axis=1)])
    mask = (pairs[:, 0] != pairs[:, 1]) & (pairs[:, 0] >= 0) & (pairs[:, 1] >= 0)
    for i, j in np.unique(pairs[mask], axis=0):
        neighbors[int(i)].add(int(j))
        neighbors[int(j)].add(int(i))
    return neighbors


def render_pattern(
    patches: Sequence[Patch],
    palette: Palette,
    width: int,
    height: int,
    seed: int = 0,
    donor: str = "unnamed",
) -> CamoPattern:
    """Recolor donor patch geometry with palette colors.

    Patch masks are nearest-neighbor scaled to the target size; colors are
    drawn by weight with rejection so edge-adjacent patches differ whenever
    the palette allows it. Any uncovered cell takes the top palette color.
    """
    if palette.size == 0:
        raise EmptyPalette("palette has no entries")
    if not patches:
        raise NoPatches("no donor patches to recolor")
    if width < 1 or height < 1:
        raise ValueError("pattern dimensions must be >= 1")

    grid = _scaled_patch_grid(patches, width, height)
    neighbors = _patch_adjacency(grid, len(patches))

    rng = np.random.default_rng(seed)
    weights = palette.weights_array()
    probs = weights / weights.sum()
    n_colors = palette.size
    assigned = np.full(len(patches), -1, dtype=np.int64)
    last_used = np.full(n_colors, -1, dtype=np.int64)

    for i in range(len(patches)):
        forbidden = {int(assigned[j]) for j in neighbors[i] if assigned[j] >= 0}
        candidates = [c for c in range(n_colors) if c not in forbidden]
        if not candidates:
            # neighbors already exhaust the palette; constraint is locally unsatisfiable
            candidates = list(range(n_colors))
        choice = -1
        for _ in range(_MAX_REJECTION_DRAWS):
            draw = int(rng.choice(n_colors, p=probs))
            if draw in candidates:
                choice = draw
                break
        if choice < 0:
            # least recently used candidate, ties to the heaviest entry
            choice = min(candidates, key=lambda c: (int(last_used[c]), c))
        assigned[i] = choice
        last_used[choice] = i

    colors = palette.colors_array()
    safe = np.where(grid >= 0, grid, 0)
    color_idx = np.where(grid >= 0, assigned[safe], 0)
    pixels = colors[color_idx]
    return CamoPattern(
        image=RasterImage(pixels),
        provenance=PatternProvenance(palette=palette, donor=donor, seed=seed),
    )


def evaluate_design(
    pattern: CamoPattern,
    environments: Sequence[RasterImage],
    scheme: QuantizationScheme | None = None,
    glcm_config: GlcmConfig | None = None,
) -> list[DesignEvaluation]:
    """Color similarity and texture comparison against each environment."""
    if not environments:
        raise ValueError("need at least one environment image")
    scheme = scheme or QuantizationScheme()
    glcm_config = glcm_config or GlcmConfig()
    pattern_hist = build_histogram(pattern.image, scheme)
    pattern_tex = texture_vector(pattern.image, glcm_config)
    reports = []
    for env in environments:
        env_hist = build_histogram(env, scheme)
        env_tex = texture_vector(env, glcm_config)
        reports.append(
            DesignEvaluation(
                similarity=bhattacharyya(pattern_hist, env_hist),
                pattern_texture=pattern_tex,
                environment_texture=env_tex,
                comparison=texture_compare(pattern_tex, env_tex),
            )
        )
    return reports


def provenance_json(
    pattern: CamoPattern,
    scheme: QuantizationScheme,
    glcm_config: GlcmConfig,
) -> dict:
    prov = pattern.provenance
    return {
        "schemaVersion": 1,
        "paletteSize": prov.palette.size,
        "palette": prov.palette.to_json(),
        "donor": prov.donor,
        "seed": prov.seed,
        "scheme": scheme.to_json(),
        "glcmConfig": glcm_config.to_json(),
    }
