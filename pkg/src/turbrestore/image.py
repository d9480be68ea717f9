"""Dense scalar images and bit-exact PGM file I/O.

Images are 2-D C-contiguous float64 arrays indexed [row, col] = [y, x],
nominal intensity range [0, 1].  Quantization happens only at file I/O;
in-memory math is double precision throughout.  All sampling uses the
clamp/replicate boundary convention.
"""

import os
import re

import numpy as np


class PgmParseError(ValueError):
    """Malformed PGM input; ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def as_image(a, name="image"):
    """Validate and canonicalize a 2-D intensity array."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be at least 1x1, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def check_sequence(frames, name="sequence"):
    """Validate a non-empty list of same-shaped images."""
    if len(frames) == 0:
        raise ValueError(f"{name} is empty")
    frames = [as_image(f, f"{name}[{i}]") for i, f in enumerate(frames)]
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise ValueError(
                f"{name}[{i}] has shape {f.shape}, expected {shape}")
    return frames


# ---------------------------------------------------------------------------
# PGM (P2 ASCII / P5 binary, maxval 255 or 65535, '#' comments in the header)

def _read_header_token(buf, pos):
    """Return (token, new_pos), skipping whitespace and '#' comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise PgmParseError("unexpected end of file in header", pos)
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    return buf[start:pos], pos


def _header_int(buf, pos, what):
    token, end = _read_header_token(buf, pos)
    if not re.fullmatch(rb"\d+", token):
        raise PgmParseError(f"malformed {what} {token!r} in header", pos)
    return int(token), end


def load_pgm(path):
    """Load a PGM file, scaling intensities to [0, 1] by 1/maxval."""
    with open(path, "rb") as fh:
        buf = fh.read()

    if len(buf) < 2:
        raise PgmParseError("file too short for a PGM magic number", 0)
    magic = buf[0:2]
    if magic not in (b"P2", b"P5"):
        raise PgmParseError(f"unsupported magic number {magic!r}", 0)

    pos = 2
    width, pos = _header_int(buf, pos, "width")
    height, pos = _header_int(buf, pos, "height")
    maxval, pos = _header_int(buf, pos, "maxval")
    if width < 1 or height < 1:
        raise PgmParseError(f"invalid dimensions {width}x{height}", pos)
    if maxval not in (255, 65535):
        raise PgmParseError(f"unsupported maxval {maxval}", pos)

    count = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(buf) or not buf[pos:pos + 1].isspace():
            raise PgmParseError("missing whitespace before binary raster", pos)
        pos += 1
        itemsize = 1 if maxval == 255 else 2
        need = count * itemsize
        if len(buf) - pos < need:
            raise PgmParseError(
                f"truncated payload: expected {need} raster bytes, "
                f"got {len(buf) - pos}", len(buf))
        dtype = np.dtype(np.uint8) if maxval == 255 else np.dtype(">u2")
        raw = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
        data = raw.astype(np.float64)
    else:
        samples = np.empty(count, dtype=np.float64)
        for i in range(count):
            try:
                token, pos = _read_header_token(buf, pos)
            except PgmParseError:
                raise PgmParseError(
                    f"truncated payload: expected {count} samples, got {i}",
                    len(buf)) from None
            if not re.fullmatch(rb"\d+", token):
                raise PgmParseError(f"malformed sample {token!r}", pos)
            value = int(token)
            if value > maxval:
                raise PgmParseError(
                    f"sample {value} exceeds maxval {maxval}", pos)
            samples[i] = value
        data = samples

    img = (data / float(maxval)).reshape(height, width)
    return np.ascontiguousarray(img)


def save_pgm(img, path, depth=16):
    """Write a binary (P5) PGM; values are clamped to [0,1] and quantized."""
    img = as_image(img)
    if depth not in (8, 16):
        raise ValueError(f"depth must be 8 or 16, got {depth}")
    maxval = 255 if depth == 8 else 65535
    q = np.floor(np.clip(img, 0.0, 1.0) * maxval + 0.5)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode("ascii")
    if depth == 8:
        payload = q.astype(np.uint8).tobytes()
    else:
        payload = q.astype(np.uint16).astype(">u2").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_sequence(directory):
    """Read every *.pgm in a directory in lexical order."""
    names = sorted(n for n in os.listdir(directory) if n.endswith(".pgm"))
    if not names:
        raise ValueError(f"no .pgm frames found in {directory}")
    frames = []
    shape = None
    for name in names:
        frame = load_pgm(os.path.join(directory, name))
        if shape is None:
            shape = frame.shape
        elif frame.shape != shape:
            raise ValueError(
                f"frame {name} has size {frame.shape[1]}x{frame.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}")
        frames.append(frame)
    return frames


def save_sequence(frames, directory, depth=16, prefix="frame"):
    """Write frames as zero-padded numbered PGM files."""
    os.makedirs(directory, exist_ok=True)
    for i, frame in enumerate(frames):
        save_pgm(frame, os.path.join(directory, f"{prefix}_{i:04d}.pgm"),
                 depth=depth)


# ---------------------------------------------------------------------------
# sampling and filtering

def bilinear_sample(img, x, y):
    """Sample at real (x=col, y=row); coordinates are clamped to the grid."""
    img = as_image(img)
    h, w = img.shape
    sx = min(max(float(x), 0.0), w - 1.0)
    sy = min(max(float(y), 0.0), h - 1.0)
    x0 = int(np.floor(sx))
    y0 = int(np.floor(sy))
    fx = sx - x0
    fy = sy - y0
    x1 = min(x0 + 1, w - 1)
    y1 = min(y0 + 1, h - 1)
    return ((1.0 - fy) * (1.0 - fx) * img[y0, x0]
            + (1.0 - fy) * fx * img[y0, x1]
            + fy * (1.0 - fx) * img[y1, x0]
            + fy * fx * img[y1, x1])


def temporal_mean(frames):
    """Per-pixel arithmetic mean over a frame sequence."""
    frames = check_sequence(frames)
    return np.mean(np.stack(frames, axis=0), axis=0)


def separable_filter(img, kernel):
    """Correlate rows then columns with a 1-D kernel, replicate boundary."""
    img = np.asarray(img, dtype=np.float64)
    k = np.asarray(kernel, dtype=np.float64)
    r = len(k) // 2
    h, w = img.shape
    p = np.pad(img, ((0, 0), (r, r)), mode="edge")
    out = np.zeros_like(img)
    for j in range(len(k)):
        out += k[j] * p[:, j:j + w]
    p = np.pad(out, ((r, r), (0, 0)), mode="edge")
    out = np.zeros_like(img)
    for j in range(len(k)):
        out += k[j] * p[j:j + h, :]
    return out


_BINOMIAL5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def gaussian_downsample(img):
    """Blur with the 5-tap binomial kernel and keep every second pixel."""
    img = as_image(img)
    if img.shape[0] < 2 or img.shape[1] < 2:
        raise ValueError(f"image too small to downsample: {img.shape}")
    return np.ascontiguousarray(separable_filter(img, _BINOMIAL5)[::2, ::2])


def upsample2(img, shape):
    """Bilinear 2x upsample to an explicit target shape.

    Output pixel (x, y) reads the source at (x/2, y/2) with clamping, the
    inverse mapping of the pyramid's every-second-pixel grid.
    """
    img = as_image(img)
    h, w = shape
    sy = np.minimum(np.arange(h, dtype=np.float64) / 2.0, img.shape[0] - 1.0)
    sx = np.minimum(np.arange(w, dtype=np.float64) / 2.0, img.shape[1] - 1.0)
    y0 = np.floor(sy).astype(np.intp)
    x0 = np.floor(sx).astype(np.intp)
    fy = (sy - y0)[:, None]
    fx = (sx - x0)[None, :]
    y1 = np.minimum(y0 + 1, img.shape[0] - 1)
    x1 = np.minimum(x0 + 1, img.shape[1] - 1)
    top = (1.0 - fx) * img[np.ix_(y0, x0)] + fx * img[np.ix_(y0, x1)]
    bot = (1.0 - fx) * img[np.ix_(y1, x0)] + fx * img[np.ix_(y1, x1)]
    return (1.0 - fy) * top + fy * bot
