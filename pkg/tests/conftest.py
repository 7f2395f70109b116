"""Shared fixtures: synthetic sequences, planted shifts, Y4M files."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import pytest

from fastme.frame import LumaPlane
from fastme.video_io import write_y4m


def box_blur(arr: np.ndarray, radius: int) -> np.ndarray:
    """Separable box blur (tests stay scipy-free)."""
    k = 2 * radius + 1
    kernel = np.ones(k) / k
    out = arr.astype(np.float64)
    for axis in (0, 1):
        pad = [(radius, radius) if a == axis else (0, 0) for a in (0, 1)]
        padded = np.pad(out, pad, mode="edge")
        out = np.apply_along_axis(
            lambda m: np.convolve(m, kernel, mode="valid"), axis, padded
        )
    return out


def smooth_texture(width: int, height: int, seed: int, contrast: float = 30.0,
                   radius: int = 4) -> np.ndarray:
    """Smooth random field around mid-gray, uint8."""
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, 1.0, (height, width))
    sm = box_blur(noise, radius)
    sm = sm / max(sm.std(), 1e-9) * contrast + 128.0
    return np.clip(sm, 0, 255).astype(np.uint8)


def planted_shift_pair(
    width: int = 160,
    height: int = 128,
    dx: int = 2,
    dy: int = 3,
    seed: int = 11,
) -> tuple[LumaPlane, LumaPlane]:
    """(current, reference) where every current block matches ref at (dx, dy).

    Both frames are crops of one textured canvas, so interior matches are
    exact (SAD 0) without synthetic zero-fill.
    """
    canvas = smooth_texture(width + abs(dx) + 8, height + abs(dy) + 8, seed,
                            contrast=40.0, radius=2)
    ref = canvas[0:height, 0:width].copy()
    cur = canvas[dy : dy + height, dx : dx + width].copy()
    return LumaPlane(cur), LumaPlane(ref)


def make_sequence(
    n_frames: int,
    width: int = 352,
    height: int = 288,
    seed: int = 5,
    pan: tuple[int, int] = (1, 0),
    object_step: tuple[int, int] = (2, 1),
    noise_sigma: float = 6.0,
) -> list[LumaPlane]:
    """Gentle test sequence: global pan, one moving low-contrast object, noise.

    Motion amplitudes and spatial gradients are kept small relative to the
    noise floor so that an uncompensated prediction stays within a few dB of
    the compensated one.
    """
    margin_x = abs(pan[0]) * n_frames + 8
    margin_y = abs(pan[1]) * n_frames + 8
    canvas = smooth_texture(width + margin_x, height + margin_y, seed,
                            contrast=24.0, radius=6)
    obj = smooth_texture(48, 48, seed + 1).astype(np.int16) - 128
    rng = np.random.default_rng(seed + 2)

    frames = []
    for t in range(n_frames):
        ox = pan[0] * t
        oy = pan[1] * t
        frame = canvas[oy : oy + height, ox : ox + width].astype(np.int16)
        # Object texture rides its own trajectory; offset added on top of the
        # panning base so both layers carry recoverable motion.
        px = (40 + object_step[0] * t) % (width - 48)
        py = (60 + object_step[1] * t) % (height - 48)
        frame[py : py + 48, px : px + 48] += obj // 3
        noisy = frame + rng.normal(0.0, noise_sigma, frame.shape)
        frames.append(LumaPlane(np.clip(noisy, 0, 255).astype(np.uint8)))
    return frames


def write_y4m_file(path: Path, frames: list[LumaPlane]) -> Path:
    with open(path, "wb") as fh:
        write_y4m(fh, frames)
    return path


@pytest.fixture(scope="session")
def short_sequence() -> list[LumaPlane]:
    """10-frame CIF fixture used by the oracle/audit criteria."""
    return make_sequence(10)


@pytest.fixture(scope="session")
def long_sequence() -> list[LumaPlane]:
    """30-frame CIF fixture used by the reduction/PSNR criteria."""
    return make_sequence(30)


@pytest.fixture(scope="session")
def short_y4m(tmp_path_factory, short_sequence) -> Path:
    path = tmp_path_factory.mktemp("video") / "fixture10.y4m"
    return write_y4m_file(path, short_sequence)


@pytest.fixture(scope="session")
def long_y4m(tmp_path_factory, long_sequence) -> Path:
    path = tmp_path_factory.mktemp("video") / "fixture30.y4m"
    return write_y4m_file(path, long_sequence)


def y4m_bytes(frames: list[LumaPlane]) -> bytes:
    buf = io.BytesIO()
    write_y4m(buf, frames)
    return buf.getvalue()
