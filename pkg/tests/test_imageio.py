import numpy as np
import pytest

from unfoldir.errors import ImageIOError
from unfoldir.imageio import read_image, write_image


def test_known_ppm_bytes(tmp_path):
    p = tmp_path / "k.ppm"
    pix = bytes([255, 0, 0, 0, 255, 0, 0, 0, 255, 51, 102, 153])
    p.write_bytes(b"P6\n# comment\n2 2\n255\n" + pix)
    img = read_image(p)
    assert img.shape == (3, 2, 2)
    np.testing.assert_array_equal(img[:, 0, 0], [1, 0, 0])
    np.testing.assert_array_equal(img[:, 1, 1], [0.2, 0.4, 0.6])


@pytest.mark.parametrize("suffix,channels", [(".ppm", 3), (".png", 3), (".png", 1), (".pgm", 1)])
def test_round_trip(tmp_path, suffix, channels, rng):
    data = rng.integers(0, 256, (channels, 7, 9)) / 255.0
    p = tmp_path / f"x{suffix}"
    write_image(data, p)
    back = read_image(p)
    np.testing.assert_array_equal(back, data)
    write_image(back, p)
    np.testing.assert_array_equal(read_image(p), back)


def test_write_quantises_and_clips(tmp_path):
    p = tmp_path / "q.ppm"
    write_image(np.array([[-0.5, 0.5, 1.7]]).reshape(1, 1, 3).repeat(3, 0), p)
    # pixels are interleaved per row: (0,0,0) (128,128,128) (255,255,255)
    assert p.read_bytes()[-9:] == bytes([0] * 3 + [128] * 3 + [255] * 3)
    np.testing.assert_array_equal(read_image(p)[0, 0], [0.0, 128 / 255, 1.0])


def test_truncated_ppm(tmp_path):
    p = tmp_path / "t.ppm"
    p.write_bytes(b"P6\n4 4\n255\n" + bytes(10))
    with pytest.raises(ImageIOError) as info:
        read_image(p)
    assert info.value.offset == len(b"P6\n4 4\n255\n") + 10


@pytest.mark.parametrize("payload,offset", [
    (b"P3\n1 1\n255\n", 0),
    (b"P6\n1 x\n255\n", 5),
    (b"P6\n1 1\n65535\n\x00", 13),
])
def test_bad_headers(tmp_path, payload, offset):
    p = tmp_path / "b.ppm"
    p.write_bytes(payload)
    with pytest.raises(ImageIOError) as info:
        read_image(p)
    assert info.value.offset == offset


def test_truncated_png(tmp_path, rng):
    p = tmp_path / "a.png"
    write_image(rng.random((3, 16, 16)), p)
    data = p.read_bytes()
    p.write_bytes(data[:60])
    with pytest.raises(ImageIOError) as info:
        read_image(p)
    assert 8 <= info.value.offset < 60


def test_missing_file(tmp_path):
    with pytest.raises(ImageIOError):
        read_image(tmp_path / "nope.png")


def test_unknown_extension(tmp_path):
    with pytest.raises(ImageIOError):
        write_image(np.zeros((3, 2, 2)), tmp_path / "x.jpg")
