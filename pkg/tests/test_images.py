import numpy as np
import pytest
from PIL import Image

from autorater.corpus.images import (
    ComposeConfig,
    ImageError,
    compose_images,
    crop_white_background,
    quadrant_slices,
)
from autorater.corpus.types import EXTERIOR_VIEWS, INTERIOR_VIEWS


def make_views(views, shape, value=0.5):
    return {v: np.full(shape + (3,), value, dtype=np.float32) for v in views}


def test_exterior_montage_shape_from_square_photos():
    images = make_views(EXTERIOR_VIEWS, (776, 776))
    out = compose_images(images, "exterior")
    assert out.shape == (290, 448, 3)
    assert out.dtype == np.float32
    assert 0.0 <= out.min() and out.max() <= 1.0


def test_interior_montage_shape_from_landscape_photos():
    images = make_views(INTERIOR_VIEWS, (517, 776))
    out = compose_images(images, "interior")
    assert out.shape == (300, 448, 3)


def test_all_black_inputs_compose_to_zero():
    images = make_views(EXTERIOR_VIEWS, (776, 776), value=0.0)
    out = compose_images(images, "exterior")
    assert out.shape == (290, 448, 3)
    np.testing.assert_array_equal(out, np.zeros_like(out))


def test_missing_view_raises():
    images = make_views(EXTERIOR_VIEWS[:3], (64, 64))
    with pytest.raises(ImageError, match="side"):
        compose_images(images, "exterior")


def test_undecodable_file_raises(tmp_path):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not an image")
    images = {v: str(bad) for v in EXTERIOR_VIEWS}
    with pytest.raises(ImageError, match="decode"):
        compose_images(images, "exterior", base_dir=tmp_path)


def test_quadrant_layout_row_major():
    tiles = {}
    for i, view in enumerate(EXTERIOR_VIEWS):
        arr = np.zeros((776, 776, 3), dtype=np.float32)
        arr[:] = (i + 1) / 10.0
        tiles[view] = arr
    out = compose_images(tiles, "exterior")
    slices = quadrant_slices(out.shape[:2], "exterior")
    for i, view in enumerate(EXTERIOR_VIEWS):
        rows, cols = slices[view]
        assert np.allclose(out[rows, cols], (i + 1) / 10.0, atol=0.01), view


def test_white_background_cropping():
    arr = np.ones((100, 100, 3), dtype=np.float32)
    arr[40:60, 30:70] = 0.2  # content block
    cropped = crop_white_background(arr)
    assert cropped.shape == (20, 40, 3)
    all_white = np.ones((10, 10, 3), dtype=np.float32)
    assert crop_white_background(all_white).shape == (10, 10, 3)  # left intact


def test_compose_from_files(tmp_path):
    paths = {}
    for view in INTERIOR_VIEWS:
        p = tmp_path / f"{view}.png"
        Image.fromarray(np.full((517, 776, 3), 128, dtype=np.uint8)).save(p)
        paths[view] = f"{view}.png"
    out = compose_images(paths, "interior", base_dir=tmp_path)
    assert out.shape == (300, 448, 3)
    assert np.allclose(out, 128 / 255.0, atol=0.01)


def test_desk_scale_config_preserves_layout():
    cfg = ComposeConfig(exterior_tile_hw=(32, 48), interior_tile_hw=(32, 48), exterior_resize=48)
    images = make_views(EXTERIOR_VIEWS, (48, 48), value=0.3)
    out = compose_images(images, "exterior", cfg)
    assert out.shape == (64, 96, 3)
