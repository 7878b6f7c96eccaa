"""Image file helpers: header-only dimension probing and a tiny PNG writer.

Only PNG and JPEG headers are parsed -- the platform never decodes pixels.
The writer exists for demo data and test fixtures.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

from .errors import DataRootCorrupt

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


def read_image_size(path: Path | str) -> tuple[int, int]:
    """Return (width, height) from a PNG or JPEG header."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(26)
        if head[:8] == b"\x89PNG\r\n\x1a\n":
            if head[12:16] != b"IHDR":
                raise DataRootCorrupt(f"{path}: PNG missing IHDR")
            width, height = struct.unpack(">II", head[16:24])
            return int(width), int(height)
        if head[:2] == b"\xff\xd8":
            return _jpeg_size(fh, path)
    raise DataRootCorrupt(f"{path}: not a PNG or JPEG file")


def _jpeg_size(fh, path: Path) -> tuple[int, int]:
    # scan segment markers until a start-of-frame carrying the dimensions
    fh.seek(2)
    while True:
        marker = fh.read(2)
        if len(marker) < 2 or marker[0] != 0xFF:
            raise DataRootCorrupt(f"{path}: malformed JPEG marker stream")
        code = marker[1]
        if code in (0xD8, 0x01) or 0xD0 <= code <= 0xD7:
            continue
        length = struct.unpack(">H", fh.read(2))[0]
        if 0xC0 <= code <= 0xCF and code not in (0xC4, 0xC8, 0xCC):
            data = fh.read(5)
            height, width = struct.unpack(">HH", data[1:5])
            return int(width), int(height)
        fh.seek(length - 2, 1)


def write_png(path: Path | str, width: int, height: int,
              rgb: tuple[int, int, int] = (96, 96, 96)) -> Path:
    """Write a solid-color RGB PNG. Deterministic bytes for fixed inputs."""
    path = Path(path)

    def chunk(tag: bytes, data: bytes) -> bytes:
        return (struct.pack(">I", len(data)) + tag + data
                + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF))

    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    row = b"\x00" + bytes(rgb) * width
    idat = zlib.compress(row * height, level=9)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr)
                     + chunk(b"IDAT", idat) + chunk(b"IEND", b""))
    return path
