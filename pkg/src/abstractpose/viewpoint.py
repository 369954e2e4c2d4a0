"""Subject-relative viewpoint heatmaps.

The camera grid is re-indexed so that column 0 is the camera directly behind
the subject (the seam), then the camera index is stamped as a Gaussian that
wraps around the left/right edges of a square heatmap.  Rows do not wrap.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import EnvConfig, SyntheticEnvironment
from .errors import DegenerateOrientationError, NoDetectionError


@dataclass(frozen=True)
class CodecParams:
    sigma: float = 2.0
    kernel_width: int = 13
    heatmap_size: int = 64

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.kernel_width <= self.heatmap_size:
            raise ValueError("kernel_width must lie in (0, heatmap_size]")


def gaussian(x, y, mu_x, mu_y, sigma):
    return np.exp(-((x - mu_x) ** 2 + (y - mu_y) ** 2) / (2.0 * sigma ** 2))


@dataclass(frozen=True, eq=False)
class CameraIndexPermutation:
    positions: np.ndarray   # T', (X, Y, 3)
    rotations: np.ndarray   # R', (X, Y, 3, 3)
    shift: int              # original column that became column 0
    index: np.ndarray       # original column for every rotated column

    def to_relative(self, i_orig: int) -> int:
        return int((i_orig - self.shift) % len(self.index))

    def to_original(self, i_rel: int) -> int:
        return int(self.index[i_rel])


def horizontal_forward(F_s) -> np.ndarray:
    F = np.asarray(F_s, dtype=float)
    Fp = F - F[2] * np.array([0.0, 0.0, 1.0])
    n = np.linalg.norm(Fp)
    if n < 1e-6:
        raise DegenerateOrientationError("subject forward vector is vertical")
    return Fp / n


def rotate_camera_array(env: SyntheticEnvironment, F_s) -> CameraIndexPermutation:
    Fsp = horizontal_forward(F_s)
    # every row of a column shares its azimuth; row 0 is representative
    Fc = env.camera_forwards[:, 0, :].copy()
    Fc[:, 2] = 0.0
    Fc /= np.linalg.norm(Fc, axis=1, keepdims=True)
    D = Fc @ Fsp
    S = int(np.argmax(D))
    X = env.config.grid_cols
    index = (np.arange(X) + S) % X
    T = env.positions[index]
    R = env.rotations[index]
    return CameraIndexPermutation(T, R, S, index)


def _check_index(i, j, config: EnvConfig):
    if not (0 <= i < config.grid_cols and 0 <= j < config.grid_rows):
        raise IndexError(f"viewpoint index ({i}, {j}) outside {config.grid_cols}x{config.grid_rows}")


def heatmap_center(i: int, j: int, config: EnvConfig) -> tuple[int, int]:
    """(mu_x, mu_y) heatmap cell of subject-relative camera (i, j)."""
    _check_index(i, j, config)
    step = config.heatmap_size // config.grid_cols
    return i * step, config.seam_row_span[0] + j


def wrapped_viewpoint_map(mu_x: int, mu_y: int, params: CodecParams) -> np.ndarray:
    """Gaussian at (mu_x, mu_y) whose columns wrap around the heatmap edge.

    Column offsets use the first matching case of: direct, shifted left by
    the width, shifted right by the width; cells where no case applies (or
    whose row is ``kernel_width`` or more away) are zero.
    """
    n, W = params.heatmap_size, params.kernel_width
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    dx = np.select(
        [np.abs(mu_x - cols) < W, np.abs(cols - n - mu_x) < W, np.abs(mu_x - n - cols) < W],
        [cols - mu_x, cols - n - mu_x, cols + n - mu_x],
        default=n + W,
    )
    dy = rows - mu_y
    hm = gaussian(dx, dy, 0, 0, params.sigma)
    hm[(np.abs(dx) >= W) | (np.abs(dy) >= W)] = 0.0
    return hm.astype(np.float32)


def encode_viewpoint(i: int, j: int, params: CodecParams, config: EnvConfig) -> np.ndarray:
    """(I_w, I_w) heatmap for subject-relative camera (i, j)."""
    if params.heatmap_size != config.heatmap_size:
        raise ValueError("codec and environment disagree on the heatmap size")
    mu_x, mu_y = heatmap_center(i, j, config)
    return wrapped_viewpoint_map(mu_x, mu_y, params)


def viewpoint_for_camera(env: SyntheticEnvironment, F_s, i_orig: int, j: int) -> tuple[int, int]:
    """Subject-relative index of room camera (i_orig, j)."""
    env.check_index(i_orig, j)
    return rotate_camera_array(env, F_s).to_relative(i_orig), j


def decode_viewpoint(hmap: np.ndarray, config: EnvConfig, refine: bool = False):
    """Argmax cell -> subject-relative camera index (i, j).

    Ties go to the smallest (row, col).  Rows outside the seam band are
    clamped to the nearest camera row.  With ``refine`` the column is instead
    a wrapped circular centroid of the argmax row (a float).
    """
    hm = np.asarray(hmap, dtype=float)
    if hm.ndim == 3:
        hm = hm[0]
    if not np.all(np.isfinite(hm)):
        raise ValueError("heatmap contains non-finite values")
    if not np.any(hm > 0):
        raise NoDetectionError("viewpoint heatmap has no positive cell")
    row, col = np.unravel_index(int(np.argmax(hm)), hm.shape)
    step = config.heatmap_size // config.grid_cols
    X = config.grid_cols
    j = int(np.clip(row - config.seam_row_span[0], 0, config.grid_rows - 1))
    if refine:
        w = np.clip(hm[row], 0, None)
        ang = 2 * np.pi * np.arange(hm.shape[1]) / hm.shape[1]
        c = np.arctan2(w @ np.sin(ang), w @ np.cos(ang)) % (2 * np.pi)
        return float(c / (2 * np.pi) * X) % X, j
    i = int(np.floor(col / step + 0.5)) % X
    return i, j
