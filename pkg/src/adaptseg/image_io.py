"""Raster image loading and saving.

All computation in this package runs on double-precision channel planes;
8-bit files are lifted to floats exactly once at load time.  Supported
formats: 8-bit PNG (RGB, RGBA, palette, grayscale) and binary PPM (P6) /
PGM (P5).  Alpha channels are discarded, never premultiplied.
"""

from dataclasses import dataclass, field

import numpy as np
from PIL import Image


class ImageFormatError(ValueError):
    """Unsupported or malformed image file."""


@dataclass
class ImageBuffer:
    """A fixed-size pixel grid with 1 or 3 real-valued channel planes.

    Planes are flat row-major float64 arrays of length width*height with
    values in [0, 255].  Instances are treated as immutable after
    construction and are safe to share across threads.
    """

    width: int
    height: int
    channel_count: int
    planes: list = field(repr=False)
    source_depth: int = 8

    def __post_init__(self):
        if self.channel_count not in (1, 3):
            raise ValueError(f"channel_count must be 1 or 3, got {self.channel_count}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if len(self.planes) != self.channel_count:
            raise ValueError("plane count does not match channel_count")
        n = self.width * self.height
        for k, plane in enumerate(self.planes):
            if plane.shape != (n,):
                raise ValueError(f"plane {k} has {plane.shape}, expected ({n},)")

    @property
    def pixel_count(self):
        return self.width * self.height

    @property
    def channel_names(self):
        return ("R", "G", "B") if self.channel_count == 3 else ("L",)

    def norm(self):
        """Euclidean norm of the data over all channels and pixels."""
        return float(np.sqrt(sum(float(p @ p) for p in self.planes)))


def image_from_array(arr):
    """Build an ImageBuffer from a (height, width) or (height, width, 3) array."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 2:
        h, w = arr.shape
        planes = [np.ascontiguousarray(arr.reshape(-1))]
        return ImageBuffer(w, h, 1, planes)
    if arr.ndim == 3 and arr.shape[2] == 3:
        h, w, _ = arr.shape
        planes = [np.ascontiguousarray(arr[:, :, k].reshape(-1)) for k in range(3)]
        return ImageBuffer(w, h, 3, planes)
    raise ValueError(f"expected HxW or HxWx3 array, got shape {arr.shape}")


def _decode(source, label):
    try:
        with Image.open(source) as im:
            im.load()
            mode = im.mode
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise ImageFormatError(f"{label}: bit depth above 8 is not supported")
            if mode == "RGBA":
                im = im.convert("RGB")  # drops alpha
            elif mode in ("LA", "PA"):
                im = im.convert("L")
            elif mode == "P":
                im = im.convert("RGB")
            elif mode == "1":
                im = im.convert("L")
            elif mode not in ("RGB", "L"):
                raise ImageFormatError(f"{label}: unsupported mode {mode!r}")
            arr = np.asarray(im, dtype=np.uint8)
    except ImageFormatError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"{label}: cannot read image ({exc})") from exc
    if arr.size == 0:
        raise ImageFormatError(f"{label}: zero-dimension image")
    return image_from_array(arr)


def load_image(path):
    """Load an 8-bit PNG/PPM/PGM file into an ImageBuffer.

    Raises ImageFormatError for unreadable files, bit depths above 8, or
    zero-dimension images.
    """
    return _decode(path, str(path))


def load_image_bytes(data):
    """Decode an in-memory image (e.g. an HTTP upload)."""
    import io

    return _decode(io.BytesIO(data), "<upload>")


def quantize(values):
    """8-bit quantization: round half away from zero, then clamp to [0, 255].

    numpy's default rounding is half-to-even, so the tie rule is spelled
    out with copysign.
    """
    v = np.asarray(values, dtype=np.float64)
    rounded = np.floor(np.abs(v) + 0.5) * np.copysign(1.0, v)
    return np.clip(rounded, 0.0, 255.0).astype(np.uint8)


def _to_uint8_array(img, colors):
    """Validate per-channel color planes against img and quantize them."""
    if len(colors) != img.channel_count:
        raise ValueError("colors channel count does not match image")
    n = img.pixel_count
    out = np.empty((img.height, img.width, img.channel_count), dtype=np.uint8)
    for k, plane in enumerate(colors):
        plane = np.asarray(plane, dtype=np.float64).reshape(-1)
        if plane.shape != (n,):
            raise ValueError(f"colors plane {k} has wrong length")
        out[:, :, k] = quantize(plane).reshape(img.height, img.width)
    return out


def save_image(img, colors, path):
    """Quantize per-channel color planes and write them as an 8-bit PNG.

    colors is a sequence of flat float planes matching img's dimensions;
    3 channels write RGB, 1 channel writes grayscale.
    """
    arr = _to_uint8_array(img, colors)
    if img.channel_count == 1:
        pil = Image.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(arr, mode="RGB")
    try:
        pil.save(path, format="PNG")
    except OSError as exc:
        raise OSError(f"{path}: cannot write image ({exc})") from exc


def encode_png_bytes(img, colors):
    """Like save_image but returns the PNG as bytes (for HTTP responses)."""
    import io

    arr = _to_uint8_array(img, colors)
    if img.channel_count == 1:
        pil = Image.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(arr, mode="RGB")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()
