"""K-means pixel clustering, label-boundary edges and patch extraction.

Clustering runs in a configurable color feature space; HSV is embedded as
(s*cos h, s*sin h, v) so hue wraps continuously. Initialization is seeded
k-means++ and the best of several restarts (by inertia) is kept, so results
are fully deterministic for a fixed config.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import TooFewPixels
from .image_io import RasterImage, image_to_hsv

COLOR_SPACES = ("rgb", "hsv")

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=int)

# tolerance for the Lloyd monotonicity sanity check (float accumulation slack)
_MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class KmeansConfig:
    k: int = 4
    max_iterations: int = 100
    tolerance: float = 1e-6
    seed: int = 0
    color_space: str = "hsv"
    restarts: int = 3

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.color_space not in COLOR_SPACES:
            raise ValueError(f"color_space must be one of {COLOR_SPACES}")


@dataclass(frozen=True)
class SegmentationMap:
    width: int
    height: int
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    config: KmeansConfig
    inertia_history: tuple[float, ...]

    def __post_init__(self):
        labels = np.asarray(self.labels)
        labels.setflags(write=False)
        centroids = np.asarray(self.centroids, dtype=np.float64)
        centroids.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "centroids", centroids)

    def sidecar(self) -> dict:
        return {
            "k": self.config.k,
            "seed": self.config.seed,
            "colorSpace": self.config.color_space,
            "centroids": [[float(c) for c in row] for row in self.centroids],
            "inertia": float(self.inertia),
        }


@dataclass(frozen=True)
class EdgeMask:
    width: int
    height: int
    edges: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.edges, dtype=bool)
        arr.setflags(write=False)
        object.__setattr__(self, "edges", arr)


@dataclass(frozen=True)
class Patch:
    """One 4-connected region of uniform cluster label.

    ``mask`` is local to ``bbox`` = (x0, y0, x1, y1) with half-open ends,
    so mask.shape == (y1 - y0, x1 - x0).
    """

    cluster_id: int
    mask: np.ndarray
    area: int
    bbox: tuple[int, int, int, int]
    mean_color: tuple[float, float, float]

    def __post_init__(self):
        arr = np.asarray(self.mask, dtype=bool)
        arr.setflags(write=False)
        object.__setattr__(self, "mask", arr)


def pixel_features(image: RasterImage, color_space: str) -> np.ndarray:
    """Per-pixel feature vectors, shape (n_pixels, 3)."""
    if color_space == "rgb":
        return image.pixels.reshape(-1, 3).astype(np.float64) / 255.0
    h, s, v = image_to_hsv(image)
    hr = np.deg2rad(h)
    feats = np.stack([s * np.cos(hr), s * np.sin(hr), v], axis=-1)
    return feats.reshape(-1, 3)


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    centroids[0] = points[int(rng.integers(n))]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centroids[j] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _lloyd_run(points: np.ndarray, config: KmeansConfig, seed: int):
    rng = np.random.default_rng(seed)
    k = config.k
    centroids = _kmeans_pp_init(points, k, rng)
    history: list[float] = []
    for _ in range(config.max_iterations):
        d2 = _squared_distances(points, centroids)
        labels = np.argmin(d2, axis=1)
        min_d2 = d2[np.arange(points.shape[0]), labels]
        inertia = float(min_d2.sum())
        if history:
            assert inertia <= history[-1] + _MONOTONE_SLACK * max(history[-1], 1.0), (
                f"Lloyd inertia increased: {history[-1]} -> {inertia}"
            )
        history.append(inertia)

        new_centroids = np.empty_like(centroids)
        empty = []
        for j in range(k):
            members = points[labels == j]
            if members.shape[0] == 0:
                empty.append(j)
                new_centroids[j] = centroids[j]
            else:
                new_centroids[j] = members.mean(axis=0)
        if empty:
            # re-seed each empty cluster with the point farthest from its centroid
            claim_d2 = min_d2.copy()
            for j in empty:
                idx = int(np.argmax(claim_d2))
                new_centroids[j] = points[idx]
                claim_d2[idx] = -1.0
        shift = float(((new_centroids - centroids) ** 2).sum())
        centroids = new_centroids
        if shift < config.tolerance:
            break

    # final assignment, then exact member means so the centroid invariant holds
    d2 = _squared_distances(points, centroids)
    labels = np.argmin(d2, axis=1)
    for j in range(k):
        members = points[labels == j]
        if members.shape[0] > 0:
            centroids[j] = members.mean(axis=0)
    final_d2 = ((points - centroids[labels]) ** 2).sum(axis=1)
    inertia = float(final_d2.sum())
    return labels, centroids, inertia, tuple(history)


def kmeans_segment(image: RasterImage, config: KmeansConfig | None = None) -> SegmentationMap:
    """Cluster pixels into k color groups; deterministic for a fixed config."""
    config = config or KmeansConfig()
    points = pixel_features(image, config.color_space)
    if points.shape[0] < config.k:
        raise TooFewPixels(f"{points.shape[0]} pixels < k={config.k}")
    best = None
    for r in range(config.restarts):
        run = _lloyd_run(points, config, config.seed + r)
        if best is None or run[2] < best[2]:
            best = run
    labels, centroids, inertia, history = best
    return SegmentationMap(
        width=image.width,
        height=image.height,
        labels=labels.reshape(image.height, image.width).astype(np.int32),
        centroids=centroids,
        inertia=inertia,
        config=config,
        inertia_history=history,
    )


def extract_edges(segmap: SegmentationMap) -> EdgeMask:
    """Mark pixels whose label differs from any 4-neighbor; borders alone are not edges."""
    labels = segmap.labels
    edges = np.zeros(labels.shape, dtype=bool)
    horiz = labels[:, :-1] != labels[:, 1:]
    edges[:, :-1] |= horiz
    edges[:, 1:] |= horiz
    vert = labels[:-1, :] != labels[1:, :]
    edges[:-1, :] |= vert
    edges[1:, :] |= vert
    return EdgeMask(width=segmap.width, height=segmap.height, edges=edges)


def extract_patches(
    segmap: SegmentationMap,
    image: RasterImage | None = None,
    min_area: int = 1,
) -> list[Patch]:
    """4-connected components of uniform label with area >= min_area.

    Sorted by area descending, ties by bbox (y0, x0). Mean colors come from
    ``image`` when given (black otherwise), since the segmentation map does
    not retain source pixels.
    """
    if min_area < 1:
        raise ValueError("min_area must be >= 1")
    labels = segmap.labels
    patches: list[Patch] = []
    for cluster_id in range(int(labels.max()) + 1):
        cluster_mask = labels == cluster_id
        if not cluster_mask.any():
            continue
        comp, n_comp = ndimage.label(cluster_mask, structure=FOUR_CONNECTED)
        for c in range(1, n_comp + 1):
            mask = comp == c
            area = int(mask.sum())
            if area < min_area:
                continue
            ys, xs = np.nonzero(mask)
            y0, y1 = int(ys.min()), int(ys.max()) + 1
            x0, x1 = int(xs.min()), int(xs.max()) + 1
            if image is not None:
                mean = image.pixels[mask].mean(axis=0)
                mean_color = (float(mean[0]), float(mean[1]), float(mean[2]))
            else:
                mean_color = (0.0, 0.0, 0.0)
            patches.append(
                Patch(
                    cluster_id=cluster_id,
                    mask=mask[y0:y1, x0:x1],
                    area=area,
                    bbox=(x0, y0, x1, y1),
                    mean_color=mean_color,
                )
            )
    patches.sort(key=lambda p: (-p.area, p.bbox[1], p.bbox[0]))
    return patches


def patch_grid(patches: list[Patch], width: int, height: int) -> np.ndarray:
    """Rasterize patches back onto the canvas: cell = patch index, -1 where uncovered."""
    grid = np.full((height, width), -1, dtype=np.int32)
    for i, p in enumerate(patches):
        x0, y0, x1, y1 = p.bbox
        region = grid[y0:y1, x0:x1]
        region[p.mask] = i
    return grid


def cluster_mean_colors(segmap: SegmentationMap, image: RasterImage) -> np.ndarray:
    """Mean source RGB per cluster, shape (k, 3) uint8; black for empty clusters."""
    k = segmap.config.k
    out = np.zeros((k, 3), dtype=np.uint8)
    flat_labels = segmap.labels.ravel()
    flat_px = image.pixels.reshape(-1, 3)
    for j in range(k):
        members = flat_px[flat_labels == j]
        if members.shape[0]:
            out[j] = np.rint(members.mean(axis=0)).astype(np.uint8)
    return out


def label_png_bytes(segmap: SegmentationMap, image: RasterImage | None = None) -> bytes:
    """Indexed PNG whose pixel values are cluster labels.

    The attached palette holds mean cluster colors when the source image is
    supplied, evenly spaced grays otherwise.
    """
    if segmap.config.k > 256:
        raise ValueError("cannot export more than 256 cluster labels as indexed PNG")
    im = Image.fromarray(segmap.labels.astype(np.uint8), mode="P")
    if image is not None:
        palette = cluster_mean_colors(segmap, image)
    else:
        k = segmap.config.k
        grays = np.linspace(0, 255, k).astype(np.uint8) if k > 1 else np.array([0], dtype=np.uint8)
        palette = np.repeat(grays[:, None], 3, axis=1)
    full = np.zeros((256, 3), dtype=np.uint8)
    full[: palette.shape[0]] = palette
    im.putpalette(full.ravel().tolist())
    buf = io.BytesIO()
    im.save(buf, format="PNG", compress_level=6, optimize=False)
    return buf.getvalue()


def edge_png_bytes(mask: EdgeMask) -> bytes:
    """Black/white PNG: 255 where a pixel is an edge."""
    arr = np.where(mask.edges, 255, 0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG", compress_level=6, optimize=False)
    return buf.getvalue()
