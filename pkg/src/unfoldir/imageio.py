"""Image files: binary PPM/PGM (P6/P5, 8-bit) and 8-bit PNG.

Intensities map as v/255 on read and round(v*255), clipped, on write.
Parsing errors raise :class:`ImageIOError` carrying the byte offset at
which the file stopped making sense.
"""
from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ImageIOError
from .image import as_image

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_WS = b" \t\r\n"


def _parse_pnm(data: bytes, path) -> np.ndarray:
    if len(data) < 2 or data[:2] not in (b"P6", b"P5"):
        raise ImageIOError(path, 0, "not a binary PPM/PGM (expected P6 or P5 magic)")
    channels = 3 if data[:2] == b"P6" else 1
    pos = 2
    values = []
    while len(values) < 3:
        # whitespace and comments between header tokens
        while pos < len(data) and (data[pos] in _WS or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < len(data) and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and 48 <= data[pos] <= 57:
            pos += 1
        if pos == start:
            raise ImageIOError(path, pos, "malformed header (expected a decimal number)")
        values.append(int(data[start:pos]))
    if pos >= len(data) or data[pos] not in _WS:
        raise ImageIOError(path, pos, "missing whitespace after header")
    pos += 1
    width, height, maxval = values
    if width < 1 or height < 1:
        raise ImageIOError(path, pos, "zero image dimension")
    if maxval != 255:
        raise ImageIOError(path, pos, f"unsupported maxval {maxval} (only 8-bit)")
    need = width * height * channels
    if len(data) - pos < need:
        raise ImageIOError(path, len(data), f"truncated pixel data ({len(data) - pos} of {need} bytes)")
    pix = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    return pix.reshape(height, width, channels)


def _check_png_chunks(data: bytes, path) -> None:
    pos = len(PNG_SIGNATURE)
    while True:
        if pos + 8 > len(data):
            raise ImageIOError(path, pos, "truncated PNG chunk header")
        length, ctype = struct.unpack(">I4s", data[pos:pos + 8])
        end = pos + 12 + length
        if end > len(data):
            raise ImageIOError(path, pos, f"truncated PNG chunk {ctype.decode('latin-1')!r}")
        if ctype == b"IEND":
            return
        pos = end


def read_image(path) -> np.ndarray:
    """Read an image as a ``(C, H, W)`` float64 array in [0, 1]."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageIOError(path, 0, exc.strerror or str(exc)) from exc
    if data[:2] in (b"P6", b"P5"):
        pix = _parse_pnm(data, path)
    elif data[:8] == PNG_SIGNATURE:
        _check_png_chunks(data, path)
        try:
            with Image.open(io.BytesIO(data)) as im:
                mode = im.mode
                pix = np.asarray(im) if mode in ("L", "RGB") else None
        except Exception as exc:  # Pillow raises a zoo of types
            raise ImageIOError(path, len(PNG_SIGNATURE), f"corrupt PNG ({exc})") from exc
        if pix is None:
            raise ImageIOError(path, len(PNG_SIGNATURE), f"unsupported PNG mode {mode} (8-bit L/RGB only)")
        if pix.ndim == 2:
            pix = pix[:, :, None]
    else:
        raise ImageIOError(path, 0, "unsupported format (expected PPM P6/P5 or PNG)")
    return as_image(np.transpose(pix, (2, 0, 1)).astype(np.float64) / 255.0)


def to_bytes8(img) -> np.ndarray:
    """Quantise a (C, H, W) image to an (H, W, C) uint8 array."""
    img = as_image(img)
    q = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    return np.ascontiguousarray(np.transpose(q, (1, 2, 0)))


def write_image(img, path) -> None:
    path = Path(path)
    pix = to_bytes8(img)
    h, w, c = pix.shape
    suffix = path.suffix.lower()
    if suffix in (".ppm", ".pgm", ".pnm"):
        magic = b"P6" if c == 3 else b"P5"
        path.write_bytes(magic + f"\n{w} {h}\n255\n".encode() + pix.tobytes())
    elif suffix == ".png":
        im = Image.fromarray(pix[:, :, 0] if c == 1 else pix, mode="L" if c == 1 else "RGB")
        buf = io.BytesIO()
        im.save(buf, format="PNG")
        path.write_bytes(buf.getvalue())
    else:
        raise ImageIOError(path, 0, f"unsupported output extension {suffix!r}")


STAGE_FIELDS = ("l_hat", "l", "r_hat", "r")


def format_metrics(traces) -> str:
    """Line-oriented metrics document, one ``key=value`` record per stage."""
    lines = []
    for t in traces:
        isic = "nan" if t.isic is None else repr(t.isic)
        lines.append(" ".join([
            f"stage={t.stage_index}",
            f"energy={t.energy!r}",
            f"isic={isic}",
            "cg_iterations=" + ",".join(str(r.iterations) for r in t.cg_reports),
            "residuals=" + ",".join(repr(r.relative_residual) for r in t.cg_reports),
        ]))
    return "\n".join(lines) + "\n"


def write_trace(traces, trace_dir) -> list[Path]:
    """Write four images per stage plus ``metrics.txt`` into ``trace_dir``."""
    trace_dir = Path(trace_dir)
    trace_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for t in traces:
        for name in STAGE_FIELDS:
            p = trace_dir / f"stage{t.stage_index}_{name}.png"
            write_image(np.clip(getattr(t, name), 0.0, 1.0), p)
            written.append(p)
    metrics = trace_dir / "metrics.txt"
    metrics.write_text(format_metrics(traces))
    written.append(metrics)
    return written
