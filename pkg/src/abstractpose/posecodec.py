"""Camera-frame bone directions <-> toroidally wrapped Gaussian heatmaps.

Each bone direction becomes a pair of angles (azimuth, elevation) in degrees,
both binned from [-180, 180) onto 128 cells.  Azimuth is the column, elevation
the row; the Gaussian stamp wraps around both edges.
"""
from __future__ import annotations

import numpy as np

from .errors import MissingBoneError
from .viewpoint import CodecParams

POSE_HEATMAP_SIZE = 128
UNIT_TOL = 1e-6


def pose_params(sigma: float = 2.0, kernel_width: int = 13) -> CodecParams:
    return CodecParams(sigma=sigma, kernel_width=kernel_width, heatmap_size=POSE_HEATMAP_SIZE)


def bones_to_camera_frame(unit_vectors, R) -> np.ndarray:
    """World bone directions (13, 3) -> camera frame, i.e. R^T v per bone."""
    return np.asarray(unit_vectors, float) @ np.asarray(R, float)


def vectors_to_angles(vectors) -> np.ndarray:
    """(K, 3) -> (K, 2) of (theta, phi) degrees in [-180, 180)."""
    v = np.asarray(vectors, float)
    theta = np.degrees(np.arctan2(v[:, 1], v[:, 0]))
    phi = np.degrees(np.arctan2(v[:, 2], np.hypot(v[:, 0], v[:, 1])))
    ang = np.column_stack([theta, phi])
    return (ang + 180.0) % 360.0 - 180.0


def angles_to_vectors(angles) -> np.ndarray:
    a = np.radians(np.asarray(angles, float))
    th, ph = a[:, 0], a[:, 1]
    return np.column_stack([np.cos(ph) * np.cos(th), np.cos(ph) * np.sin(th), np.sin(ph)])


def angles_to_bins(angles, n: int = POSE_HEATMAP_SIZE) -> np.ndarray:
    a = np.asarray(angles, float)
    return np.floor((a + 180.0) / 360.0 * n).astype(np.int64) % n


def bins_to_angles(bins, n: int = POSE_HEATMAP_SIZE) -> np.ndarray:
    """Bin centres in degrees."""
    return -180.0 + (np.asarray(bins, float) + 0.5) * (360.0 / n)


def quantization_angle_deg(n: int = POSE_HEATMAP_SIZE) -> float:
    """Largest angle between a direction and its decoded bin-centre direction.

    Bin centres never sit on the equator, so the worst case is a half-bin
    error on both axes at the equator: arccos(cos^2(half bin)).
    """
    half = np.radians(180.0 / n)
    return float(np.degrees(np.arccos(np.cos(half) ** 2)))


def kernel_offsets(kernel_width: int) -> np.ndarray:
    """Integer offsets k with |k| <= kernel_width / 2."""
    h = kernel_width // 2
    return np.arange(-h, h + 1)


def stamp_wrapped(mu_row: int, mu_col: int, params: CodecParams) -> np.ndarray:
    """One channel with a Gaussian at (mu_row, mu_col), wrapped on both axes."""
    n = params.heatmap_size
    k = kernel_offsets(params.kernel_width)
    hm = np.zeros((n, n), dtype=np.float32)
    g = np.exp(-(k[:, None] ** 2 + k[None, :] ** 2) / (2.0 * params.sigma ** 2))
    hm[np.ix_((mu_row + k) % n, (mu_col + k) % n)] = g
    return hm


def encode_pose(vectors_cam, params: CodecParams | None = None) -> np.ndarray:
    """(13, 3) camera-frame unit vectors -> (13, n, n) heatmaps."""
    if params is None:
        params = pose_params()
    v = np.asarray(vectors_cam, float)
    norms = np.linalg.norm(v, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise ValueError("encode_pose expects unit vectors")
    bins = angles_to_bins(vectors_to_angles(v), params.heatmap_size)
    out = np.zeros((len(v), params.heatmap_size, params.heatmap_size), dtype=np.float32)
    for b, (col, row) in enumerate(bins):
        out[b] = stamp_wrapped(row, col, params)
    return out


def decode_pose_angles(hmaps) -> np.ndarray:
    """Per-channel argmax -> (K, 2) bin-centre angles (theta, phi)."""
    hm = np.asarray(hmaps)
    if not np.all(np.isfinite(hm)):
        raise ValueError("heatmaps contain non-finite values")
    n_ch, n, _ = hm.shape
    flat = hm.reshape(n_ch, -1)
    empty = [k for k in range(n_ch) if not np.any(flat[k] > 0)]
    if empty:
        raise MissingBoneError(empty)
    idx = np.argmax(flat, axis=1)
    rows, cols = np.divmod(idx, n)
    return np.column_stack([bins_to_angles(cols, n), bins_to_angles(rows, n)])


def decode_pose(hmaps) -> np.ndarray:
    """(K, n, n) heatmaps -> (K, 3) camera-frame unit vectors."""
    return angles_to_vectors(decode_pose_angles(hmaps))
