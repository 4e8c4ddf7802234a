"""Reference compute kernels behind the benchmark callbacks.

These run for validation only; executor timing never depends on them.
"""

from __future__ import annotations

import hashlib
import math
import struct
from typing import Iterator, Sequence

import numpy as np

# -- odd-even transposition sort ------------------------------------------------


def odd_even_stages(values: Sequence[int] | np.ndarray) -> Iterator[np.ndarray]:
    """Yield the array after each of the n compare-exchange stages.

    Even stages compare pairs (0,1), (2,3), ...; odd stages (1,2), (3,4), ...
    The yielded array is the same object every time and is updated in place.
    """
    a = np.array(values, dtype=np.uint32)
    n = a.size
    for stage in range(n):
        s = stage & 1
        lo = a[s : n - 1 : 2]
        hi = a[s + 1 : n : 2]
        small = np.minimum(lo, hi)
        large = np.maximum(lo, hi)
        lo[...] = small
        hi[...] = large
        yield a


def odd_even_sort(values: Sequence[int] | np.ndarray) -> np.ndarray:
    a = np.array(values, dtype=np.uint32)
    for a in odd_even_stages(a):
        pass
    return a


# -- Sobel ------------------------------------------------------------------------

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.int32)
SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.int32)


class InvalidImage(ValueError):
    pass


def sobel(image: np.ndarray) -> np.ndarray:
    """Per-channel |Gx| + |Gy| clamped to 8 bits; the one-pixel border is 0.

    Accepts (H, W) or (H, W, C) uint8 arrays.
    """
    img = np.asarray(image)
    if img.ndim not in (2, 3):
        raise InvalidImage(f"expected (H, W) or (H, W, C) image, got shape {img.shape}")
    h, w = img.shape[:2]
    if h < 3 or w < 3:
        raise InvalidImage(f"image must be at least 3x3, got {h}x{w}")
    src = img.astype(np.int32)
    gx = np.zeros((h - 2, w - 2) + img.shape[2:], dtype=np.int32)
    gy = np.zeros_like(gx)
    for dy in range(3):
        for dx in range(3):
            window = src[dy : dy + h - 2, dx : dx + w - 2]
            if SOBEL_X[dy, dx]:
                gx += SOBEL_X[dy, dx] * window
            if SOBEL_Y[dy, dx]:
                gy += SOBEL_Y[dy, dx] * window
    out = np.zeros(img.shape, dtype=np.uint8)
    out[1:-1, 1:-1] = np.clip(np.abs(gx) + np.abs(gy), 0, 255).astype(np.uint8)
    return out


def sobel_bytes(payload: bytes, width: int, height: int) -> bytes:
    img = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return sobel(img).tobytes()


# -- Q8.6 fixed point -----------------------------------------------------------

Q86_FRAC = 6
Q86_BITS = 14
_Q86_MASK = (1 << Q86_BITS) - 1


def q86_to_float(raw: int) -> float:
    """Decode a 14-bit two's-complement Q8.6 word."""
    raw &= _Q86_MASK
    if raw & (1 << (Q86_BITS - 1)):
        raw -= 1 << Q86_BITS
    return raw / (1 << Q86_FRAC)


def q86_from_float(value: float) -> int:
    """Encode to 14-bit two's complement, rounding to nearest and saturating to [-128, 128)."""
    scaled = math.floor(value * (1 << Q86_FRAC) + 0.5)
    scaled = max(-(1 << (Q86_BITS - 1)), min((1 << (Q86_BITS - 1)) - 1, scaled))
    return scaled & _Q86_MASK


def q86_signed(raw: int) -> int:
    raw &= _Q86_MASK
    return raw - (1 << Q86_BITS) if raw & (1 << (Q86_BITS - 1)) else raw


def pack_angles(x_deg: float, y_deg: float) -> int:
    """Low half-word carries the x-axis angle, high half-word the y-axis angle."""
    return (q86_from_float(y_deg) << 16) | q86_from_float(x_deg)


def unpack_angles(packed: int) -> tuple[int, int]:
    return q86_signed(packed & 0xFFFF), q86_signed((packed >> 16) & 0xFFFF)


# -- shift-add arctan (CORDIC) -----------------------------------------------------

FRAC = 16
ITERATIONS = 18
ONE = 1 << FRAC
ATAN_TABLE = tuple(int(round(math.atan(2.0**-i) * ONE)) for i in range(ITERATIONS))
_GAIN = math.prod(math.sqrt(1 + 2.0 ** (-2 * i)) for i in range(ITERATIONS))
INV_GAIN = int(round(ONE / _GAIN))
GAIN = int(round(ONE * _GAIN))
PI = int(round(math.pi * ONE))
HALF_PI = int(round(math.pi / 2 * ONE))
DEG_TO_RAD = int(round(math.pi / 180 * ONE))


def cordic_vector(x: int, y: int) -> tuple[int, int]:
    """Rotate (x, y) onto the positive x axis; x must be >= 0.

    Returns (gain-scaled magnitude, angle) with the angle in FRAC-bit radians.
    """
    if x < 0:
        raise ValueError("vectoring mode needs x >= 0")
    if y == 0:
        # exact answer; iterating would leave a one-LSB residual in the angle
        return (x * GAIN) >> FRAC, 0
    z = 0
    for i in range(ITERATIONS):
        # every iteration must run: the gain correction assumes all of them
        if y >= 0:
            x, y, z = x + (y >> i), y - (x >> i), z + ATAN_TABLE[i]
        else:
            x, y, z = x - (y >> i), y + (x >> i), z - ATAN_TABLE[i]
    return x, z


def cordic_sincos(angle: int) -> tuple[int, int]:
    """(cos, sin) of a FRAC-bit radian angle, both FRAC-bit fixed point."""
    flip = False
    while angle > HALF_PI:
        angle -= PI
        flip = not flip
    while angle < -HALF_PI:
        angle += PI
        flip = not flip
    x, y, z = INV_GAIN, 0, angle
    for i in range(ITERATIONS):
        if z >= 0:
            x, y, z = x - (y >> i), y + (x >> i), z - ATAN_TABLE[i]
        else:
            x, y, z = x + (y >> i), y - (x >> i), z + ATAN_TABLE[i]
    return (-x, -y) if flip else (x, y)


def fixed_arctan(raw: int) -> int:
    """arctan of a Q8.6 value, returned as Q8.6 radians."""
    _, z = cordic_vector(ONE, q86_signed(raw) << (FRAC - Q86_FRAC))
    shift = FRAC - Q86_FRAC
    return ((z + (1 << (shift - 1))) >> shift) & _Q86_MASK


def cordic_atan(value: float) -> float:
    """Convenience wrapper: quantize to Q8.6, run the fixed-point arctan, decode."""
    return q86_to_float(fixed_arctan(q86_from_float(value)))


# -- inverse kinematics -------------------------------------------------------------

PWM_MAX = 1023
_ANCHOR = int(round(ONE / math.sqrt(2)))


def _mul(a: int, b: int) -> int:
    return (a * b) >> FRAC


def servo_angle(x_raw: int, y_raw: int) -> int:
    """Elevation of a platform anchor after rotating by the two tilt angles (FRAC-bit radians).

    The anchor sits at 45 degrees between the x and y axes so that both tilts
    move it. Rotation is about y first, then x.
    """
    alpha = (q86_signed(x_raw) * DEG_TO_RAD) >> Q86_FRAC
    beta = (q86_signed(y_raw) * DEG_TO_RAD) >> Q86_FRAC
    cos_a, sin_a = cordic_sincos(alpha)
    cos_b, sin_b = cordic_sincos(beta)
    px = _mul(_ANCHOR, cos_b)
    pz0 = -_mul(_ANCHOR, sin_b)
    py = _mul(_ANCHOR, cos_a) - _mul(pz0, sin_a)
    pz = _mul(_ANCHOR, sin_a) + _mul(pz0, cos_a)
    mag, _ = cordic_vector(abs(px), py)
    radius = _mul(mag, INV_GAIN)
    _, theta = cordic_vector(radius, pz)
    return theta


def inverse_kinematics(packed: int) -> int:
    """Packed Q8.6 tilt angles (degrees) in, 10-bit pulse-width code out.

    The servo angle range [-90, +90] degrees maps linearly onto [0, 1023].
    """
    x_raw, y_raw = packed & 0xFFFF, (packed >> 16) & 0xFFFF
    theta = servo_angle(x_raw, y_raw)
    code = ((theta + HALF_PI) * PWM_MAX + HALF_PI) // PI
    return max(0, min(PWM_MAX, code)) & 0x3FF


# -- SHA-256 ------------------------------------------------------------------------


def hash_image(payload: bytes) -> tuple[int, ...]:
    """SHA-256 digest as eight big-endian 32-bit words."""
    return struct.unpack(">8I", hashlib.sha256(payload).digest())


def synthetic_image(seed: int, width: int = 1920, height: int = 1080, channels: int = 3) -> bytes:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=width * height * channels, dtype=np.uint8).tobytes()
