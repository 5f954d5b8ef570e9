import numpy as np
import pytest

from ompsrc.errors import ImageFormatError
from ompsrc.imageio import read_image, read_pgm, write_pgm


def test_pgm_round_trip(tmp_path):
    levels = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    write_pgm(tmp_path / "a.pgm", levels / 255.0)
    raw = (tmp_path / "a.pgm").read_bytes()
    assert raw.startswith(b"P5\n4 3\n255\n")
    np.testing.assert_array_equal(read_pgm(tmp_path / "a.pgm") * 255, levels)


def test_header_comments_and_whitespace(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5 # made by hand\n2\t1\n# max\n255\n\x00\xff")
    np.testing.assert_array_equal(read_pgm(tmp_path / "c.pgm"), [[0.0, 1.0]])


def test_sixteen_bit(tmp_path):
    (tmp_path / "w.pgm").write_bytes(b"P5 2 1 1000\n" + bytes([0, 0, 3, 232]))
    np.testing.assert_allclose(read_pgm(tmp_path / "w.pgm"), [[0.0, 1.0]])


@pytest.mark.parametrize("payload, message", [
    (b"P2\n1 1\n255\n0", "not a binary PGM"),
    (b"P5\n2 2\n255\n\x00", "truncated"),
    (b"P5\n2 x\n255\n\x00\x00", "not a number"),
    (b"P5\n2", "header"),
    (b"P5\n0 2\n255\n", "empty"),
])
def test_corrupt_files(tmp_path, payload, message):
    (tmp_path / "bad.pgm").write_bytes(payload)
    with pytest.raises(ImageFormatError, match=message):
        read_image(tmp_path / "bad.pgm")


def test_other_formats_through_pillow(tmp_path):
    Image = pytest.importorskip("PIL.Image")
    Image.fromarray(np.array([[0, 255], [51, 102]], dtype=np.uint8)).save(tmp_path / "a.png")
    np.testing.assert_allclose(read_image(tmp_path / "a.png"), [[0, 1], [0.2, 0.4]])
