"""Spherical camera rig ("synthetic room").

Cameras sit on a sphere centred at the world origin, ``grid_cols`` azimuth
steps by ``grid_rows`` elevation steps, all looking at a shared fixed point
on the z axis.  World z is up.

Rotation convention: ``rotations[i, j]`` maps camera coordinates to world
coordinates; its columns are the camera's right, down and look axes
expressed in the world frame (OpenCV style, right-handed, +z = look).  A
world point ``p`` therefore has camera coordinates ``R.T @ (p - T)``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateCameraError

UP = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class CameraIntrinsics:
    focal_length: float = 280.0
    principal_point: tuple[float, float] = (128.0, 128.0)
    image_size: tuple[int, int] = (256, 256)  # (width, height)

    def __post_init__(self):
        object.__setattr__(self, "principal_point", tuple(float(v) for v in self.principal_point))
        object.__setattr__(self, "image_size", tuple(int(v) for v in self.image_size))
        if not self.focal_length > 0:
            raise ConfigError("focal_length must be positive")
        w, h = self.image_size
        cx, cy = self.principal_point
        if w < 1 or h < 1:
            raise ConfigError("image_size must be positive")
        if not (0 <= cx <= w and 0 <= cy <= h):
            raise ConfigError("principal point lies outside the image")

    @classmethod
    def square(cls, size: int, focal_length: float | None = None) -> "CameraIntrinsics":
        """Centred principal point; focal length scales with the default 280 px @ 256 px."""
        if focal_length is None:
            focal_length = 280.0 * size / 256.0
        return cls(focal_length, (size / 2.0, size / 2.0), (size, size))


@dataclass(frozen=True)
class EnvConfig:
    grid_cols: int = 64
    grid_rows: int = 5
    radius: float = 5569.0
    fixed_point_scale: float = 0.4
    seam_row_span: tuple[int, int] = (25, 30)
    heatmap_size: int = 64
    elevation_range_deg: tuple[float, float] = (10.0, 70.0)
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)

    def __post_init__(self):
        object.__setattr__(self, "seam_row_span", tuple(int(v) for v in self.seam_row_span))
        object.__setattr__(self, "elevation_range_deg", tuple(float(v) for v in self.elevation_range_deg))
        self.validate()

    def validate(self):
        if self.grid_cols < 1 or self.grid_rows < 1:
            raise ConfigError("grid must have at least one row and one column")
        if not self.radius > 0:
            raise ConfigError("radius must be positive")
        if not 0 < self.fixed_point_scale < 0.5:
            raise ConfigError("fixed_point_scale must lie in (0, 0.5)")
        lo, hi = self.seam_row_span
        if not 0 <= lo <= hi < self.heatmap_size:
            raise ConfigError("seam_row_span must fit inside [0, heatmap_size)")
        if hi - lo + 1 < self.grid_rows:
            raise ConfigError("seam_row_span has fewer rows than the camera grid")
        if self.heatmap_size % self.grid_cols:
            raise ConfigError("heatmap_size must be a multiple of grid_cols")
        e0, e1 = self.elevation_range_deg
        if not (-90.0 < e0 <= e1 < 90.0):
            raise ConfigError("elevations must lie strictly between -90 and 90 degrees")

    def to_dict(self) -> dict:
        return {
            "grid_cols": self.grid_cols,
            "grid_rows": self.grid_rows,
            "radius_mm": self.radius,
            "fixed_point_scale": self.fixed_point_scale,
            "seam_row_span": list(self.seam_row_span),
            "heatmap_size": self.heatmap_size,
            "elevation_range_deg": list(self.elevation_range_deg),
            "intrinsics": {k: list(v) if isinstance(v, tuple) else v
                           for k, v in asdict(self.intrinsics).items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnvConfig":
        kw = {}
        for key, name in [("grid_cols", "grid_cols"), ("grid_rows", "grid_rows"),
                          ("radius_mm", "radius"), ("fixed_point_scale", "fixed_point_scale"),
                          ("seam_row_span", "seam_row_span"), ("heatmap_size", "heatmap_size"),
                          ("elevation_range_deg", "elevation_range_deg")]:
            if key in d:
                kw[name] = d[key]
        if "intrinsics" in d:
            kw["intrinsics"] = CameraIntrinsics(**d["intrinsics"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path) -> "EnvConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class SyntheticEnvironment:
    positions: np.ndarray   # (X, Y, 3) mm
    rotations: np.ndarray   # (X, Y, 3, 3) camera -> world
    fixed_point: np.ndarray  # (3,)
    config: EnvConfig

    @property
    def intrinsics(self) -> CameraIntrinsics:
        return self.config.intrinsics

    @property
    def shape(self) -> tuple[int, int]:
        return self.config.grid_cols, self.config.grid_rows

    @property
    def camera_forwards(self) -> np.ndarray:
        """Unit look vectors, shape (X, Y, 3)."""
        return self.rotations[..., :, 2]

    def check_index(self, i: int, j: int):
        X, Y = self.shape
        if not (0 <= i < X and 0 <= j < Y):
            raise IndexError(f"camera index ({i}, {j}) outside {X}x{Y} grid")

    def world_to_camera(self, points: np.ndarray, i: int, j: int) -> np.ndarray:
        """Map (K, 3) world points into the frame of camera (i, j)."""
        self.check_index(i, j)
        R = self.rotations[i, j]
        return (np.asarray(points, dtype=float) - self.positions[i, j]) @ R


def look_at_rotation(position: np.ndarray, target: np.ndarray) -> np.ndarray:
    look = np.asarray(target, float) - np.asarray(position, float)
    norm = np.linalg.norm(look)
    if norm == 0:
        raise DegenerateCameraError("camera coincides with its target")
    look = look / norm
    right = np.cross(-UP, look)
    rn = np.linalg.norm(right)
    if rn < 1e-9:
        raise DegenerateCameraError("look vector is parallel to the z axis")
    right /= rn
    down = np.cross(look, right)
    down /= np.linalg.norm(down)
    right = np.cross(down, look)
    return np.column_stack([right, down, look])


def build_environment(config: EnvConfig | None = None) -> SyntheticEnvironment:
    if config is None:
        config = EnvConfig()
    config.validate()
    X, Y = config.grid_cols, config.grid_rows
    azim = 2.0 * np.pi * np.arange(X) / X
    elev = np.deg2rad(np.linspace(*config.elevation_range_deg, Y))
    az, el = np.meshgrid(azim, elev, indexing="ij")
    positions = config.radius * np.stack(
        [np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)
    fixed_point = config.fixed_point_scale / (X * Y) * positions.reshape(-1, 3).sum(axis=0)

    rotations = np.empty((X, Y, 3, 3))
    for i in range(X):
        for j in range(Y):
            try:
                rotations[i, j] = look_at_rotation(positions[i, j], fixed_point)
            except DegenerateCameraError as exc:
                raise DegenerateCameraError(f"camera ({i}, {j}): {exc}") from exc

    positions.setflags(write=False)
    rotations.setflags(write=False)
    fixed_point.setflags(write=False)
    return SyntheticEnvironment(positions, rotations, fixed_point, config)


def camera_rotation(env: SyntheticEnvironment, i: int, j: int) -> np.ndarray:
    env.check_index(i, j)
    return env.rotations[i, j]
