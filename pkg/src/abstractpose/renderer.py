"""Abstract "robot" images: opaque colour-coded cuboids painted far to near."""
from __future__ import annotations

import colorsys
from dataclasses import dataclass, field

import numpy as np

from .env import CameraIntrinsics, SyntheticEnvironment
from .errors import DegenerateBoneError, DegenerateHullError
from .geometry import convex_hull, draw_segment, fill_convex, project_points, snap
from .skeleton import MIN_BONE_LENGTH, Pose, body_frame

BACKGROUND_ID = -1

LIMB_PARTS = (
    ("r_upper_arm", "RShoulder", "RElbow"),
    ("r_forearm", "RElbow", "RWrist"),
    ("l_upper_arm", "LShoulder", "LElbow"),
    ("l_forearm", "LElbow", "LWrist"),
    ("r_thigh", "RHip", "RKnee"),
    ("r_shin", "RKnee", "RAnkle"),
    ("l_thigh", "LHip", "LKnee"),
    ("l_shin", "LKnee", "LAnkle"),
)
PART_NAMES = tuple(p[0] for p in LIMB_PARTS) + ("torso",)
HEAD_PART = "head"


def hue_palette(n: int) -> np.ndarray:
    """``n`` fully saturated colours evenly spaced on the hue wheel."""
    rgb = [colorsys.hsv_to_rgb(k / n, 1.0, 1.0) for k in range(n)]
    return np.rint(np.array(rgb) * 255).astype(np.uint8)


def _default_palette():
    # hue order interleaves sides so left/right limbs never share neighbouring hues
    base = hue_palette(9)
    order = [0, 4, 2, 6, 1, 5, 3, 7, 8]
    return base[order]


@dataclass(frozen=True, eq=False)
class RenderConfig:
    limb_half_width: float = 40.0
    torso_depth: float = 120.0
    palette: np.ndarray = field(default_factory=_default_palette)
    background: tuple[int, int, int] = (0, 0, 0)
    separate_head: bool = False
    head_color: tuple[int, int, int] = (255, 255, 255)

    def __post_init__(self):
        pal = np.asarray(self.palette, dtype=np.uint8)
        object.__setattr__(self, "palette", pal)
        if not self.limb_half_width > 0:
            raise ValueError("limb_half_width must be positive")
        if self.torso_depth < 0:
            raise ValueError("torso_depth must be non-negative")
        colors = [tuple(c) for c in self.part_colors]
        if len(pal) < len(PART_NAMES):
            raise ValueError(f"palette needs {len(PART_NAMES)} colours")
        if len(set(colors)) != len(colors):
            raise ValueError("palette colours must be pairwise distinct")
        if tuple(self.background) in colors:
            raise ValueError("background colour clashes with the palette")

    @property
    def part_names(self) -> tuple[str, ...]:
        return PART_NAMES + ((HEAD_PART,) if self.separate_head else ())

    @property
    def part_colors(self) -> np.ndarray:
        cols = np.asarray(self.palette, dtype=np.uint8)[: len(PART_NAMES)]
        if self.separate_head:
            cols = np.vstack([cols, np.asarray(self.head_color, dtype=np.uint8)])
        return cols

    def part_id(self, name: str) -> int:
        return self.part_names.index(name)


@dataclass(frozen=True, eq=False)
class Cuboid:
    corners: np.ndarray  # (8, 3)
    part: int
    distance: float      # midpoint distance to the camera centre


@dataclass(eq=False)
class AbstractImage:
    pixels: np.ndarray      # (H, W, 3) uint8
    provenance: np.ndarray  # (H, W) int16, BACKGROUND_ID where empty

    def census(self) -> set[int]:
        """Part ids visible in the raster."""
        ids = np.unique(self.provenance)
        return set(int(k) for k in ids if k != BACKGROUND_ID)

    def color_census(self, background=(0, 0, 0)) -> int:
        px = self.pixels.reshape(-1, 3).astype(np.uint32)
        packed = np.unique((px[:, 0] << 16) | (px[:, 1] << 8) | px[:, 2])
        bg = (int(background[0]) << 16) | (int(background[1]) << 8) | int(background[2])
        return int(np.count_nonzero(packed != bg))


def _box(origin, axes, extents):
    """8 corners of origin + sum(s_k * extent_k * axis_k) for s_k in {-1, +1}, last axis in {0, 1}."""
    a0, a1, a2 = axes
    e0, e1, e2 = extents
    out = []
    for t in (0.0, 1.0):
        for s0 in (-1.0, 1.0):
            for s1 in (-1.0, 1.0):
                out.append(origin + s0 * e0 * a0 + s1 * e1 * a1 + t * e2 * a2)
    return np.array(out)


def limb_cuboid(a, b, half_width: float, reference=(0.0, 0.0, 1.0),
                fallback=(1.0, 0.0, 0.0)) -> np.ndarray:
    """Square-section cuboid around segment a->b.

    The cross-section axes come from crossing the bone with ``reference``;
    ``fallback`` is used instead when the bone is within ~2.6 degrees of it.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    axis = b - a
    length = np.linalg.norm(axis)
    if length <= MIN_BONE_LENGTH:
        raise DegenerateBoneError("limb shorter than 1 mm")
    axis /= length
    ref = np.asarray(reference, float)
    if abs(axis @ ref) > 0.999 * np.linalg.norm(ref):
        ref = np.asarray(fallback, float)
    u = np.cross(axis, ref)
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    return _box(a, (u, v, axis), (half_width, half_width, length))


def torso_cuboid(pose: Pose, depth: float) -> np.ndarray:
    """Slab from the hips up to shoulder level, as wide as the wider of shoulders/hips."""
    right, forward, up = body_frame(pose)
    mid_hip = 0.5 * (pose["RHip"] + pose["LHip"])
    mid_sh = 0.5 * (pose["RShoulder"] + pose["LShoulder"])
    height = (mid_sh - mid_hip) @ up
    half_w = 0.5 * max(abs((pose["RShoulder"] - pose["LShoulder"]) @ right),
                       abs((pose["RHip"] - pose["LHip"]) @ right))
    return _box(mid_hip, (right, forward, up), (half_w, 0.5 * depth, height))


def build_cuboids(pose_cam: Pose, config: RenderConfig, reference=(0.0, 0.0, 1.0)) -> list[Cuboid]:
    """Cuboids for every part, in part-id order, with distances to the camera origin."""
    out = []
    for k, (_, ja, jb) in enumerate(LIMB_PARTS):
        a, b = pose_cam[ja], pose_cam[jb]
        corners = limb_cuboid(a, b, config.limb_half_width, reference)
        out.append(Cuboid(corners, k, float(np.linalg.norm(0.5 * (a + b)))))
    torso_id = PART_NAMES.index("torso")
    corners = torso_cuboid(pose_cam, config.torso_depth)
    out.append(Cuboid(corners, torso_id, float(np.linalg.norm(corners.mean(axis=0)))))
    head_id = config.part_id(HEAD_PART) if config.separate_head else torso_id
    a, b = pose_cam["Neck"], pose_cam["Head"]
    out.append(Cuboid(limb_cuboid(a, b, config.limb_half_width, reference), head_id,
                      float(np.linalg.norm(0.5 * (a + b)))))
    return out


def paint_order(cuboids: list[Cuboid]) -> list[int]:
    """Indices into ``cuboids``, farthest first; ties keep list order."""
    d = np.array([c.distance for c in cuboids])
    return [int(k) for k in np.argsort(-d, kind="stable")]


def projected_hulls(cuboids, intrinsics: CameraIntrinsics) -> list[np.ndarray]:
    """Integer sub-pixel hull polygon per cuboid."""
    hulls = []
    for cub in cuboids:
        pts = snap(project_points(cub.corners, intrinsics))
        try:
            hulls.append(convex_hull(pts))
        except DegenerateHullError:
            # zero-area silhouette: keep the two extreme points, drawn as a line
            uniq = np.unique(pts, axis=0)
            hulls.append(uniq[[0, -1]])
    return hulls


def render_abstract(pose_cam: Pose, intrinsics: CameraIntrinsics, config: RenderConfig | None = None,
                    drop=(), reference=(0.0, 0.0, 1.0)) -> AbstractImage:
    """Paint the abstract image of a camera-frame pose.

    ``drop`` lists part ids (or names) to leave out.  ``reference`` is the
    limb cross-section seed axis expressed in camera coordinates.
    Raises ``BehindCameraError`` if any painted part reaches behind the camera.
    """
    if config is None:
        config = RenderConfig()
    names = config.part_names
    dropped = {names.index(d) if isinstance(d, str) else int(d) for d in drop}
    cuboids = [c for c in build_cuboids(pose_cam, config, reference) if c.part not in dropped]
    return rasterize(cuboids, intrinsics, config)


def rasterize(cuboids: list[Cuboid], intrinsics: CameraIntrinsics, config: RenderConfig) -> AbstractImage:
    """Painter's algorithm over whole parts: fill each hull, farthest part first."""
    hulls = projected_hulls(cuboids, intrinsics)
    w, h = intrinsics.image_size
    provenance = np.full((h, w), BACKGROUND_ID, dtype=np.int16)
    mask = np.zeros((h, w), dtype=bool)
    for k in paint_order(cuboids):
        mask[:] = False
        if len(hulls[k]) >= 3:
            fill_convex(mask, hulls[k])
        else:
            draw_segment(mask, hulls[k][0], hulls[k][-1])
        provenance[mask] = cuboids[k].part

    pixels = np.empty((h, w, 3), dtype=np.uint8)
    pixels[:] = np.asarray(config.background, dtype=np.uint8)
    fg = provenance != BACKGROUND_ID
    pixels[fg] = config.part_colors[provenance[fg]]
    return AbstractImage(pixels, provenance)


def render_with_missing_parts(pose_cam: Pose, intrinsics: CameraIntrinsics,
                              config: RenderConfig | None = None, drop=(),
                              reference=(0.0, 0.0, 1.0)) -> AbstractImage:
    return render_abstract(pose_cam, intrinsics, config, drop=drop, reference=reference)


def render_view(pose_world: Pose, env: SyntheticEnvironment, i: int, j: int,
                config: RenderConfig | None = None, drop=()) -> AbstractImage:
    """Render a world pose, root moved to the origin, from camera (i, j)."""
    centred = pose_world.transformed(translation=-pose_world.root)
    cam = Pose(env.world_to_camera(centred.joints, i, j))
    up_in_cam = env.rotations[i, j].T @ np.array([0.0, 0.0, 1.0])
    return render_abstract(cam, env.intrinsics, config, drop=drop, reference=up_in_cam)
