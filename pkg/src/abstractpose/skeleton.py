"""14-joint skeleton: topology, bone decomposition and the body forward vector."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateBoneError, DegenerateOrientationError, FormatError

JOINT_NAMES = (
    "Head", "Neck",
    "RShoulder", "RElbow", "RWrist",
    "LShoulder", "LElbow", "LWrist",
    "RHip", "RKnee", "RAnkle",
    "LHip", "LKnee", "LAnkle",
)
J = {name: k for k, name in enumerate(JOINT_NAMES)}
ROOT = J["Neck"]

PARENT = {
    "Head": "Neck",
    "RShoulder": "Neck", "RElbow": "RShoulder", "RWrist": "RElbow",
    "LShoulder": "Neck", "LElbow": "LShoulder", "LWrist": "LElbow",
    "RHip": "Neck", "RKnee": "RHip", "RAnkle": "RKnee",
    "LHip": "Neck", "LKnee": "LHip", "LAnkle": "LKnee",
}

MIN_BONE_LENGTH = 1.0  # mm


def _dfs_bone_order(parent: dict[str, str], root: str) -> tuple[tuple[int, int], ...]:
    """Preorder walk from ``root``, siblings in joint-index order."""
    children: dict[str, list[str]] = {}
    for c, p in parent.items():
        children.setdefault(p, []).append(c)
    out = []

    def visit(p):
        for c in sorted(children.get(p, []), key=J.__getitem__):
            out.append((J[c], J[p]))
            visit(c)

    visit(root)
    return tuple(out)


@dataclass(frozen=True)
class SkeletonTopology:
    joint_names: tuple[str, ...]
    parent: tuple[int, ...]          # parent[k] = -1 for the root
    bone_order: tuple[tuple[int, int], ...]  # (child, parent)
    part_bones: dict                 # part name -> tuple of bone indices
    root: int

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    @property
    def n_bones(self) -> int:
        return len(self.bone_order)

    def bone_index(self, child: str, parent: str) -> int:
        return self.bone_order.index((J[child], J[parent]))

    def chain(self, joint: int) -> list[int]:
        """Bone indices on the path from the root down to ``joint``."""
        by_child = {c: b for b, (c, _) in enumerate(self.bone_order)}
        out = []
        while joint != self.root:
            out.append(by_child[joint])
            joint = self.parent[joint]
        return out[::-1]

    def validate(self):
        n = self.n_joints
        roots = [k for k in range(n) if self.parent[k] < 0]
        if roots != [self.root]:
            raise ValueError("topology must have exactly one root")
        if len(self.bone_order) != n - 1:
            raise ValueError("a spanning tree over N joints has N-1 bones")
        seen = {self.root}
        for c, p in self.bone_order:
            if p not in seen or self.parent[c] != p:
                raise ValueError("bone_order is not a parent-first traversal")
            seen.add(c)
        if len(seen) != n:
            raise ValueError("bone_order does not span all joints")


def _make_topology() -> SkeletonTopology:
    parent = tuple(J[PARENT[n]] if n in PARENT else -1 for n in JOINT_NAMES)
    order = _dfs_bone_order(PARENT, "Neck")

    def b(c, p):
        return order.index((J[c], J[p]))

    parts = {
        "r_upper_arm": (b("RElbow", "RShoulder"),),
        "r_forearm": (b("RWrist", "RElbow"),),
        "l_upper_arm": (b("LElbow", "LShoulder"),),
        "l_forearm": (b("LWrist", "LElbow"),),
        "r_thigh": (b("RKnee", "RHip"),),
        "r_shin": (b("RAnkle", "RKnee"),),
        "l_thigh": (b("LKnee", "LHip"),),
        "l_shin": (b("LAnkle", "LKnee"),),
        "torso": (b("RShoulder", "Neck"), b("LShoulder", "Neck"),
                  b("RHip", "Neck"), b("LHip", "Neck"), b("Head", "Neck")),
    }
    topo = SkeletonTopology(JOINT_NAMES, parent, order, parts, ROOT)
    topo.validate()
    return topo


TOPOLOGY = _make_topology()


@dataclass(frozen=True, eq=False)
class Pose:
    joints: np.ndarray  # (14, 3) mm
    topology: SkeletonTopology = TOPOLOGY

    def __post_init__(self):
        joints = np.asarray(self.joints, dtype=float)
        if joints.shape != (self.topology.n_joints, 3):
            raise ValueError(f"expected ({self.topology.n_joints}, 3) joints, got {joints.shape}")
        if not np.all(np.isfinite(joints)):
            raise ValueError("pose contains non-finite coordinates")
        object.__setattr__(self, "joints", joints)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.joints[J[name]]

    @property
    def root(self) -> np.ndarray:
        return self.joints[self.topology.root]

    def transformed(self, rotation=None, translation=None, scale=1.0) -> "Pose":
        pts = self.joints * scale
        if rotation is not None:
            pts = pts @ np.asarray(rotation).T
        if translation is not None:
            pts = pts + translation
        return Pose(pts, self.topology)

    def bone_lengths(self) -> np.ndarray:
        c, p = np.array(self.topology.bone_order).T
        return np.linalg.norm(self.joints[c] - self.joints[p], axis=1)


@dataclass(frozen=True, eq=False)
class BoneDecomposition:
    unit_vectors: np.ndarray  # (13, 3)
    lengths: np.ndarray       # (13,)
    topology: SkeletonTopology = TOPOLOGY


def decompose_pose(pose: Pose) -> BoneDecomposition:
    topo = pose.topology
    c, p = np.array(topo.bone_order).T
    vec = pose.joints[c] - pose.joints[p]
    lengths = np.linalg.norm(vec, axis=1)
    bad = np.flatnonzero(lengths <= MIN_BONE_LENGTH)
    if bad.size:
        names = [f"{topo.joint_names[p[k]]}->{topo.joint_names[c[k]]}" for k in bad]
        raise DegenerateBoneError(f"bone(s) shorter than {MIN_BONE_LENGTH} mm: {names}")
    return BoneDecomposition(vec / lengths[:, None], lengths, topo)


def compose_pose(decomp: BoneDecomposition, root_position=(0.0, 0.0, 0.0)) -> Pose:
    topo = decomp.topology
    joints = np.zeros((topo.n_joints, 3))
    joints[topo.root] = root_position
    units = np.asarray(decomp.unit_vectors, float)
    lengths = np.asarray(decomp.lengths, float)
    # bone_order is a preorder walk, so parents are always placed first
    for b, (c, p) in enumerate(topo.bone_order):
        joints[c] = joints[p] + lengths[b] * units[b]
    return Pose(joints, topo)


def _unit(v, what):
    n = np.linalg.norm(v)
    if n < 1e-9:
        raise DegenerateOrientationError(f"{what} is degenerate")
    return v / n


def body_frame(pose: Pose) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal (right, forward, up) of the subject; right x forward = up.

    Built from the hip axis and spine; falls back to the shoulder axis when
    the hips coincide.
    """
    mid_hip = 0.5 * (pose["RHip"] + pose["LHip"])
    up = _unit(pose["Neck"] - mid_hip, "spine")
    across = pose["RHip"] - pose["LHip"]
    if np.linalg.norm(across) < MIN_BONE_LENGTH:
        across = pose["RShoulder"] - pose["LShoulder"]
    right = _unit(across, "hip/shoulder axis")
    forward = np.cross(up, right)
    if np.linalg.norm(forward) < 1e-6:
        raise DegenerateOrientationError("hip axis is parallel to the spine")
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, up)
    return right, forward, up


def forward_vector(pose: Pose) -> np.ndarray:
    return body_frame(pose)[1]


def t_pose(lengths=None) -> Pose:
    """Upright subject at the origin facing +y, arms along +-x, legs down."""
    L = dict(head=200.0, shoulder=180.0, upper_arm=280.0, forearm=250.0,
             hip_x=100.0, hip_z=500.0, thigh=450.0, shin=420.0)
    if lengths:
        L.update(lengths)
    joints = np.zeros((14, 3))
    joints[J["Head"]] = (0, 0, L["head"])
    for side, s in (("R", 1.0), ("L", -1.0)):
        joints[J[side + "Shoulder"]] = (s * L["shoulder"], 0, 0)
        joints[J[side + "Elbow"]] = (s * (L["shoulder"] + L["upper_arm"]), 0, 0)
        joints[J[side + "Wrist"]] = (s * (L["shoulder"] + L["upper_arm"] + L["forearm"]), 0, 0)
        joints[J[side + "Hip"]] = (s * L["hip_x"], 0, -L["hip_z"])
        joints[J[side + "Knee"]] = (s * L["hip_x"], 0, -L["hip_z"] - L["thigh"])
        joints[J[side + "Ankle"]] = (s * L["hip_x"], 0, -L["hip_z"] - L["thigh"] - L["shin"])
    return Pose(joints)


def spread_eagle() -> Pose:
    """Arms raised diagonally, legs apart; nothing overlaps when seen from the front."""
    joints = t_pose().joints.copy()
    for side, s in (("R", 1.0), ("L", -1.0)):
        sh = joints[J[side + "Shoulder"]]
        arm = np.array([s * np.cos(np.radians(35)), 0.0, np.sin(np.radians(35))])
        joints[J[side + "Elbow"]] = sh + 280.0 * arm
        joints[J[side + "Wrist"]] = sh + 530.0 * arm
        hip = joints[J[side + "Hip"]]
        leg = np.array([s * np.sin(np.radians(25)), 0.0, -np.cos(np.radians(25))])
        joints[J[side + "Knee"]] = hip + 450.0 * leg
        joints[J[side + "Ankle"]] = hip + 870.0 * leg
    return Pose(joints)


# -- persistence --------------------------------------------------------------

def load_poses(path) -> list[Pose]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not isinstance(data, list):
        raise FormatError(f"{path}: expected a JSON array of frames")
    poses = []
    for k, frame in enumerate(data):
        try:
            poses.append(Pose(np.asarray(frame["joints"], dtype=float)))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: frame {k}: {exc}") from exc
    return poses


def save_poses(path, poses):
    frames = [{"joints": p.joints.tolist()} for p in poses]
    Path(path).write_text(json.dumps(frames))


def load_bone_lengths(path, topology: SkeletonTopology = TOPOLOGY) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    lengths = np.asarray(data, dtype=float)
    if lengths.shape != (topology.n_bones,) or np.any(lengths <= 0):
        raise FormatError(f"{path}: expected {topology.n_bones} positive bone lengths")
    return lengths
