"""Photo decoding and 2x2 montage composition.

Four view photos per side are merged into one composite: exterior tiles
are resized to 224x224, background-cropped, and center-cropped/padded to
224x145 so the 2x2 canvas is exactly 448 wide by 290 high; interior tiles
are resized to 224x150 giving a 448x300 canvas. Quadrant order is
row-major over the view tuples in :mod:`autorater.corpus.types`, so
region-level attribution aggregation is well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from autorater.corpus.types import EXTERIOR_VIEWS, INTERIOR_VIEWS, ImageRef

WHITE_EPS = 0.02


@dataclass(frozen=True)
class ComposeConfig:
    """Tile sizes (height, width) per kind. The composed canvas is 2x tile.

    Defaults give the production 290x448 exterior and 300x448 interior
    canvases. Smaller tiles are used by the synthetic desk-scale benchmark;
    the quadrant layout is preserved at any size.
    """

    exterior_tile_hw: tuple[int, int] = (145, 224)
    interior_tile_hw: tuple[int, int] = (150, 224)
    exterior_resize: int = 224  # square resize applied before background crop

    def canvas_hw(self, kind: str) -> tuple[int, int]:
        th, tw = self.tile_hw(kind)
        return 2 * th, 2 * tw

    def tile_hw(self, kind: str) -> tuple[int, int]:
        if kind == "exterior":
            return self.exterior_tile_hw
        if kind == "interior":
            return self.interior_tile_hw
        raise ValueError(f"unknown image kind {kind!r}")


class ImageError(ValueError):
    """Missing view, unreadable file, or undecodable image data."""


def decode_image(ref: ImageRef, base_dir: Path | None = None) -> np.ndarray:
    """Resolve an image reference to a float32 H x W x 3 array in [0, 1]."""
    if isinstance(ref, np.ndarray):
        arr = np.asarray(ref)
        if arr.ndim == 2:
            arr = np.stack([arr] * 3, axis=-1)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ImageError(f"in-memory image must be HxWx3, got shape {arr.shape}")
        arr = arr.astype(np.float32)
        if arr.max(initial=0.0) > 1.0:
            arr = arr / 255.0
        return np.clip(arr, 0.0, 1.0)
    path = Path(ref)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    except FileNotFoundError:
        raise ImageError(f"image file not found: {path}")
    except Exception as exc:  # PIL raises a zoo of decode errors
        raise ImageError(f"cannot decode image {path}: {exc}")
    return arr


def probe_image(ref: ImageRef, base_dir: Path | None = None) -> str | None:
    """Return a problem description if the reference cannot be decoded."""
    try:
        decode_image(ref, base_dir)
        return None
    except ImageError as exc:
        return str(exc)


def _resize(arr: np.ndarray, hw: tuple[int, int]) -> np.ndarray:
    h, w = hw
    img = Image.fromarray((np.clip(arr, 0.0, 1.0) * 255).round().astype(np.uint8))
    out = np.asarray(img.resize((w, h), Image.BILINEAR), dtype=np.float32) / 255.0
    return out


def crop_white_background(arr: np.ndarray, eps: float = WHITE_EPS) -> np.ndarray:
    """Trim border rows/columns whose pixels all sit within ``eps`` of white."""
    near_white = (arr >= 1.0 - eps).all(axis=2)
    keep_rows = np.where(~near_white.all(axis=1))[0]
    keep_cols = np.where(~near_white.all(axis=0))[0]
    if keep_rows.size == 0 or keep_cols.size == 0:
        return arr  # fully white: leave as-is rather than emit an empty image
    return arr[keep_rows[0] : keep_rows[-1] + 1, keep_cols[0] : keep_cols[-1] + 1]


def _fit_tile(arr: np.ndarray, tile_hw: tuple[int, int], pad_value: float) -> np.ndarray:
    """Center-crop dimensions larger than the tile; pad smaller ones."""
    th, tw = tile_hw
    h, w = arr.shape[:2]
    if h > th:
        top = (h - th) // 2
        arr = arr[top : top + th]
    if w > tw:
        left = (w - tw) // 2
        arr = arr[:, left : left + tw]
    h, w = arr.shape[:2]
    if h < th or w < tw:
        canvas = np.full((th, tw, 3), pad_value, dtype=np.float32)
        top = (th - h) // 2
        left = (tw - w) // 2
        canvas[top : top + h, left : left + w] = arr
        arr = canvas
    return arr


def prepare_tile(arr: np.ndarray, kind: str, config: ComposeConfig) -> np.ndarray:
    if kind == "exterior":
        side = config.exterior_resize
        arr = _resize(arr, (side, side))
        arr = crop_white_background(arr)
        return _fit_tile(arr, config.exterior_tile_hw, pad_value=1.0)
    return _resize(arr, config.interior_tile_hw)


def compose_images(
    images: dict[str, ImageRef],
    kind: str,
    config: ComposeConfig | None = None,
    base_dir: Path | None = None,
) -> np.ndarray:
    """Compose the four view photos of one side into a single montage.

    Returns a float32 (2*tile_h) x (2*tile_w) x 3 array in [0, 1]:
    290x448x3 for exterior and 300x448x3 for interior at the default
    configuration.
    """
    config = config or ComposeConfig()
    views = EXTERIOR_VIEWS if kind == "exterior" else INTERIOR_VIEWS if kind == "interior" else None
    if views is None:
        raise ValueError(f"unknown image kind {kind!r}")
    missing = [v for v in views if v not in images]
    if missing:
        raise ImageError(f"missing {kind} views: {missing}")

    tiles = [prepare_tile(decode_image(images[v], base_dir), kind, config) for v in views]
    th, tw = config.tile_hw(kind)
    canvas = np.zeros((2 * th, 2 * tw, 3), dtype=np.float32)
    for i, tile in enumerate(tiles):
        r, c = divmod(i, 2)
        canvas[r * th : (r + 1) * th, c * tw : (c + 1) * tw] = tile
    return canvas


def quadrant_slices(canvas_hw: tuple[int, int], kind: str) -> dict[str, tuple[slice, slice]]:
    """View name -> (row slice, col slice) of its quadrant on the canvas."""
    views = EXTERIOR_VIEWS if kind == "exterior" else INTERIOR_VIEWS
    h, w = canvas_hw
    th, tw = h // 2, w // 2
    out = {}
    for i, view in enumerate(views):
        r, c = divmod(i, 2)
        out[view] = (slice(r * th, (r + 1) * th), slice(c * tw, (c + 1) * tw))
    return out
