"""Deterministic synthetic test imagery.

Stands in for unavailable field photographs of the four battle environments
(woodland, sand, desert, snow). Each environment persona is a small color
set with one dominant tone plus a shared neutral, so cross-environment
histogram similarity is low but never zero while self-similarity stays 1.
Regenerating any spec is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import BadSpec
from .image_io import RasterImage, encode_png

GENERATORS = ("constant", "two-halves", "stripes", "checkerboard", "seeded-blobs")

# color list + blob-count weights per environment persona
ENVIRONMENT_PERSONAS: dict[str, tuple[list[tuple[int, int, int]], list[float]]] = {
    "woodland": (
        [(48, 96, 48), (88, 116, 52), (70, 50, 30), (132, 126, 116)],
        [0.5, 0.2, 0.2, 0.1],
    ),
    "sand": (
        [(205, 178, 128), (222, 198, 160), (168, 146, 116), (132, 126, 116)],
        [0.5, 0.25, 0.15, 0.1],
    ),
    "desert": (
        [(188, 118, 58), (160, 100, 50), (130, 85, 45), (132, 126, 116)],
        [0.5, 0.22, 0.18, 0.1],
    ),
    "snow": (
        [(235, 238, 242), (205, 210, 218), (175, 180, 190), (132, 126, 116)],
        [0.5, 0.25, 0.15, 0.1],
    ),
}


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    generator: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "generator": self.generator,
            "params": dict(self.params),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FixtureSpec":
        return cls(
            name=obj["name"],
            generator=obj["generator"],
            params=obj.get("params", {}),
            seed=int(obj.get("seed", 0)),
        )


def generate_fixture(spec: FixtureSpec) -> RasterImage:
    """Render a fixture spec; identical specs always yield identical pixels."""
    if spec.generator not in GENERATORS:
        raise BadSpec(f"unknown generator {spec.generator!r}")
    try:
        fn = _GENERATOR_FNS[spec.generator]
        return fn(dict(spec.params), spec.seed)
    except (KeyError, TypeError) as exc:
        raise BadSpec(f"invalid params for {spec.generator}: {exc}") from exc


def _size(params: dict) -> tuple[int, int]:
    w, h = int(params["width"]), int(params["height"])
    if w < 1 or h < 1:
        raise BadSpec("fixture dimensions must be >= 1")
    return w, h


def _color(value) -> np.ndarray:
    arr = np.asarray(value, dtype=np.int64)
    if arr.shape != (3,) or arr.min() < 0 or arr.max() > 255:
        raise BadSpec(f"bad color {value!r}")
    return arr.astype(np.uint8)


def _gen_constant(params: dict, seed: int) -> RasterImage:
    w, h = _size(params)
    color = _color(params["color"])
    return RasterImage(np.broadcast_to(color, (h, w, 3)).copy())


def _gen_two_halves(params: dict, seed: int) -> RasterImage:
    w, h = _size(params)
    left = _color(params["left"])
    right = _color(params["right"])
    px = np.empty((h, w, 3), dtype=np.uint8)
    px[:, : w // 2] = left
    px[:, w // 2 :] = right
    return RasterImage(px)


def _gen_stripes(params: dict, seed: int) -> RasterImage:
    w, h = _size(params)
    thickness = int(params.get("thickness", 4))
    if thickness < 1:
        raise BadSpec("stripe thickness must be >= 1")
    orientation = params.get("orientation", "horizontal")
    colors = np.stack([_color(c) for c in params["colors"]])
    if orientation == "horizontal":
        idx = (np.arange(h) // thickness) % len(colors)
        px = np.repeat(colors[idx][:, None, :], w, axis=1)
    elif orientation == "vertical":
        idx = (np.arange(w) // thickness) % len(colors)
        px = np.repeat(colors[idx][None, :, :], h, axis=0)
    else:
        raise BadSpec(f"unknown stripe orientation {orientation!r}")
    return RasterImage(px)


def _gen_checkerboard(params: dict, seed: int) -> RasterImage:
    w, h = _size(params)
    block = int(params.get("block", 2))
    if block < 1:
        raise BadSpec("checkerboard block must be >= 1")
    colors = np.stack([_color(c) for c in params["colors"]])
    yy, xx = np.mgrid[0:h, 0:w]
    idx = ((yy // block) + (xx // block)) % len(colors)
    return RasterImage(colors[idx])


def _blob_counts(weights: np.ndarray, n_blobs: int) -> np.ndarray:
    # largest-remainder allocation with at least one blob per color
    raw = weights / weights.sum() * n_blobs
    counts = np.maximum(np.floor(raw).astype(int), 1)
    frac_order = np.argsort(-(raw - np.floor(raw)), kind="stable")
    i = 0
    while counts.sum() < n_blobs:
        counts[frac_order[i % len(counts)]] += 1
        i += 1
    while counts.sum() > n_blobs:
        j = int(np.argmax(counts))
        if counts[j] <= 1:
            raise BadSpec("n_blobs too small for one blob per color")
        counts[j] -= 1
    return counts


def _gen_seeded_blobs(params: dict, seed: int) -> RasterImage:
    w, h = _size(params)
    if "persona" in params:
        colors_raw, weights_raw = ENVIRONMENT_PERSONAS[params["persona"]]
    else:
        colors_raw, weights_raw = params["colors"], params["weights"]
    colors = np.stack([_color(c) for c in colors_raw])
    weights = np.asarray(weights_raw, dtype=np.float64)
    if len(weights) != len(colors) or (weights <= 0).any():
        raise BadSpec("weights must be positive, one per color")
    n_blobs = int(params.get("n_blobs", 18))
    if n_blobs < len(colors):
        raise BadSpec("need at least one blob per color")
    if n_blobs > w * h:
        raise BadSpec("more blobs than pixels")

    rng = np.random.default_rng(seed)
    counts = _blob_counts(weights, n_blobs)
    color_idx = np.repeat(np.arange(len(colors)), counts)
    rng.shuffle(color_idx)
    flat_sites = rng.choice(w * h, size=n_blobs, replace=False)
    site_y = flat_sites // w
    site_x = flat_sites % w

    yy, xx = np.mgrid[0:h, 0:w]
    d2 = (yy[:, :, None] - site_y) ** 2 + (xx[:, :, None] - site_x) ** 2
    nearest = d2.argmin(axis=2)  # ties resolve to the lowest site index
    return RasterImage(colors[color_idx[nearest]])


_GENERATOR_FNS = {
    "constant": _gen_constant,
    "two-halves": _gen_two_halves,
    "stripes": _gen_stripes,
    "checkerboard": _gen_checkerboard,
    "seeded-blobs": _gen_seeded_blobs,
}


def _env_spec(persona: str, seed: int) -> FixtureSpec:
    return FixtureSpec(
        name=f"{persona}_64",
        generator="seeded-blobs",
        params={"width": 64, "height": 64, "persona": persona, "n_blobs": 18},
        seed=seed,
    )


STANDARD_FIXTURES: tuple[FixtureSpec, ...] = (
    _env_spec("woodland", 7),
    _env_spec("sand", 11),
    _env_spec("desert", 13),
    _env_spec("snow", 17),
    FixtureSpec(
        name="stripes_h_64",
        generator="stripes",
        params={
            "width": 64, "height": 64, "orientation": "horizontal",
            "thickness": 4, "colors": [[40, 40, 40], [200, 200, 200]],
        },
    ),
    FixtureSpec(
        name="stripes_v_64",
        generator="stripes",
        params={
            "width": 64, "height": 64, "orientation": "vertical",
            "thickness": 4, "colors": [[40, 40, 40], [200, 200, 200]],
        },
    ),
    FixtureSpec(
        name="checker_8",
        generator="checkerboard",
        params={"width": 8, "height": 8, "block": 2, "colors": [[200, 40, 40], [40, 40, 200]]},
    ),
    FixtureSpec(
        name="checker_64",
        generator="checkerboard",
        params={"width": 64, "height": 64, "block": 16, "colors": [[200, 40, 40], [40, 40, 200]]},
    ),
    FixtureSpec(name="red", generator="constant", params={"width": 4, "height": 4, "color": [255, 0, 0]}),
    FixtureSpec(name="blue", generator="constant", params={"width": 4, "height": 4, "color": [0, 0, 255]}),
    FixtureSpec(name="green_64", generator="constant", params={"width": 64, "height": 64, "color": [0, 128, 0]}),
    FixtureSpec(
        name="halves_rb_64",
        generator="two-halves",
        params={"width": 64, "height": 64, "left": [255, 0, 0], "right": [0, 0, 255]},
    ),
)

ENVIRONMENT_FIXTURES = ("woodland_64", "sand_64", "desert_64", "snow_64")


def standard_fixture(name: str) -> FixtureSpec:
    for spec in STANDARD_FIXTURES:
        if spec.name == name:
            return spec
    raise KeyError(f"no standard fixture named {name!r}")


def write_fixture_set(directory: str | Path) -> list[Path]:
    """Render every standard fixture into PNGs plus a specs.json manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for spec in STANDARD_FIXTURES:
        path = directory / f"{spec.name}.png"
        path.write_bytes(encode_png(generate_fixture(spec)))
        written.append(path)
    specs_path = directory / "specs.json"
    specs_path.write_text(json.dumps([s.to_json() for s in STANDARD_FIXTURES], indent=2) + "\n")
    written.append(specs_path)
    return written
