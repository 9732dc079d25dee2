"""Binary raster containers: FPT1 tensors and 8-bit class-code PNGs.

FPT1 layout (all little-endian)::

    offset  size        content
    0       4           magic b"FPT1"
    4       4           u32 channels
    8       4           u32 height
    12      4           u32 width
    16      4*C*H*W     f32 values, row-major within each channel
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError

FPT1_MAGIC = b"FPT1"
_HEADER = struct.Struct("<4sIII")


def encode_fpt1(tensor: np.ndarray) -> bytes:
    arr = np.asarray(tensor)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise FormatError(f"FPT1 holds C x H x W tensors, got shape {arr.shape}")
    c, h, w = arr.shape
    body = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return _HEADER.pack(FPT1_MAGIC, c, h, w) + body


def decode_fpt1(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise FormatError("truncated FPT1 header")
    magic, c, h, w = _HEADER.unpack_from(data)
    if magic != FPT1_MAGIC:
        raise FormatError(f"bad FPT1 magic {magic!r}")
    expected = _HEADER.size + 4 * c * h * w
    if len(data) != expected:
        raise FormatError(f"FPT1 size mismatch: expected {expected} bytes, got {len(data)}")
    arr = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(c, h, w)
    return arr.astype(np.float32)


def write_fpt1(path, tensor) -> None:
    Path(path).write_bytes(encode_fpt1(tensor))


def read_fpt1(path) -> np.ndarray:
    return decode_fpt1(Path(path).read_bytes())


def encode_png(codes: np.ndarray) -> bytes:
    arr = np.asarray(codes)
    if arr.ndim != 2:
        raise FormatError(f"class-code PNG must be 2-D, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise FormatError("class codes must fit in 8 bits")
    buf = io.BytesIO()
    Image.fromarray(arr.astype(np.uint8)).save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def write_png(path, codes) -> None:
    Path(path).write_bytes(encode_png(codes))


def read_png(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "P", "I", "I;16"):
                raise FormatError(f"{path}: expected single-channel PNG, got mode {im.mode}")
            return np.asarray(im, dtype=np.uint8).copy()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
