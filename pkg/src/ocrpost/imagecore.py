"""Raster representation, PGM/PNG I/O, Sobel edges and Otsu binarization."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "ImageError",
    "ImageReadError",
    "MalformedHeaderError",
    "UnsupportedFormatError",
    "GrayImage",
    "EdgeImage",
    "load_image",
    "save_pgm",
    "encode_pgm",
    "decode_pgm",
    "sobel",
    "otsu_threshold",
    "binarize",
]

INK = 0
BACKGROUND = 255

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()


class ImageError(ValueError):
    """Base class for image decoding failures."""


class ImageReadError(ImageError):
    """The file could not be opened or read."""


class MalformedHeaderError(ImageError):
    """The PGM header is truncated or not parseable."""


class UnsupportedFormatError(ImageError):
    """Valid file, but a maxval / bit depth / mode we do not handle."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale raster, stored as a read-only (height, width) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D pixel grid, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(arr))

    @classmethod
    def from_bytes(cls, height: int, width: int, data: bytes | list[int]) -> "GrayImage":
        buf = np.frombuffer(bytes(data), dtype=np.uint8)
        if buf.size != height * width:
            raise ValueError(f"expected {height * width} pixels, got {buf.size}")
        return cls(buf.reshape(height, width))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"GrayImage({self.height}x{self.width})"


@dataclass(frozen=True, eq=False)
class EdgeImage:
    """Per-pixel gradient magnitudes (float64, non-negative)."""

    magnitudes: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.magnitudes, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D grid, got shape {arr.shape}")
        if arr.size and arr.min() < 0:
            raise ValueError("gradient magnitudes must be non-negative")
        object.__setattr__(self, "magnitudes", _frozen(arr))

    @property
    def height(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def width(self) -> int:
        return self.magnitudes.shape[1]


# --- PGM ---------------------------------------------------------------------

_TOKEN = re.compile(rb"\S+")


def decode_pgm(data: bytes) -> GrayImage:
    """Decode a binary (P5) PGM with maxval 255.

    Header tokens are whitespace separated; ``#`` starts a comment running to
    the end of the line. Exactly one whitespace byte separates the maxval from
    the raster.
    """
    pos = 0
    tokens: list[bytes] = []
    n = len(data)
    while len(tokens) < 4:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise MalformedHeaderError("truncated PGM header")
        if data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            if eol < 0:
                raise MalformedHeaderError("unterminated comment in PGM header")
            pos = eol + 1
            continue
        m = _TOKEN.match(data, pos)
        tok = m.group(0)
        if b"#" in tok:
            tok = tok[: tok.index(b"#")]
            pos += len(tok)
        else:
            pos = m.end()
        tokens.append(tok)

    magic, w_tok, h_tok, max_tok = tokens
    if magic != b"P5":
        raise MalformedHeaderError(f"not a binary PGM (magic {magic!r})")
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError:
        raise MalformedHeaderError("non-numeric PGM dimensions") from None
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"invalid PGM dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormatError(f"unsupported PGM maxval {maxval} (only 255)")
    if pos >= n or not data[pos : pos + 1].isspace():
        raise MalformedHeaderError("missing whitespace after PGM maxval")
    pos += 1
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise MalformedHeaderError(
            f"PGM raster truncated: expected {width * height} bytes, got {len(raster)}"
        )
    return GrayImage.from_bytes(height, width, raster)


def encode_pgm(img: GrayImage) -> bytes:
    return b"P5\n%d %d\n255\n" % (img.width, img.height) + img.tobytes()


def save_pgm(img: GrayImage, path: str | os.PathLike) -> None:
    Path(path).write_bytes(encode_pgm(img))


# --- PNG (via Pillow) --------------------------------------------------------

def _luma(rgb: np.ndarray) -> np.ndarray:
    # round-half-up of 0.299R + 0.587G + 0.114B, in exact integer arithmetic
    r, g, b = (rgb[..., i].astype(np.int64) for i in range(3))
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


def _decode_with_pillow(path: Path) -> GrayImage:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                return GrayImage(np.asarray(im, dtype=np.uint8))
            if mode in ("RGB", "RGBA"):
                return GrayImage(_luma(np.asarray(im)))
            if mode == "LA":
                return GrayImage(np.asarray(im)[..., 0])
            if mode in ("P", "PA"):
                return GrayImage(_luma(np.asarray(im.convert("RGB"))))
            if mode == "1":
                return GrayImage(np.asarray(im.convert("L"), dtype=np.uint8))
            raise UnsupportedFormatError(f"unsupported image mode {mode!r}")
    except UnidentifiedImageError as exc:
        raise MalformedHeaderError(f"unrecognised image format: {path}") from exc


def load_image(path: str | os.PathLike) -> GrayImage:
    """Read a P5 PGM (maxval 255) or a gray/RGB PNG into a :class:`GrayImage`.

    Raises:
        ImageReadError: the file is missing or unreadable.
        MalformedHeaderError: the header cannot be parsed.
        UnsupportedFormatError: a maxval, bit depth or colour mode we do not support.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageReadError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if data[:2] == b"P5":
        return decode_pgm(data)
    if data[:2] in (b"P1", b"P2", b"P3", b"P4", b"P6"):
        raise UnsupportedFormatError(f"unsupported netpbm variant {data[:2].decode()}")
    return _decode_with_pillow(path)


# --- filters -----------------------------------------------------------------

def _correlate3(padded: np.ndarray, kernel: np.ndarray, h: int, w: int) -> np.ndarray:
    out = np.zeros((h, w), dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            k = kernel[dy, dx]
            if k:
                out += k * padded[dy : dy + h, dx : dx + w]
    return out


def sobel(img: GrayImage) -> EdgeImage:
    """Euclidean Sobel gradient magnitude with replicate padding at the borders."""
    h, w = img.height, img.width
    padded = np.pad(img.pixels.astype(np.float64), 1, mode="edge")
    gx = _correlate3(padded, SOBEL_X, h, w)
    gy = _correlate3(padded, SOBEL_Y, h, w)
    return EdgeImage(np.hypot(gx, gy))


def otsu_threshold(img: GrayImage) -> int:
    """Otsu's threshold ``t`` such that pixels ``< t`` form the dark class.

    Returns the smallest ``t`` in 1..255 maximising between-class variance;
    a single-valued image yields ``t`` just above that value (all background).
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)[:-1]  # weight of class {< t} for t = 1..255
    s0 = np.cumsum(hist * levels)[:-1]
    w1 = total - w0
    s1 = (hist * levels).sum() - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        between = w0 * w1 * (s0 / w0 - s1 / w1) ** 2
    between = np.where((w0 > 0) & (w1 > 0), between, -1.0)
    if between.max() < 0:
        return min(int(img.pixels.max()) + 1, 255)
    return int(np.argmax(between)) + 1


def binarize(img: GrayImage, threshold: int | None = None) -> GrayImage:
    """Ink mask: ``pixel < threshold`` becomes 0 (ink), everything else 255.

    ``threshold`` defaults to :func:`otsu_threshold`.
    """
    if threshold is None:
        threshold = otsu_threshold(img)
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {threshold}")
    return GrayImage(np.where(img.pixels < threshold, INK, BACKGROUND).astype(np.uint8))
