"""Pose reconstruction from decoded codes, alignment metrics and the
ground-truth-vs-predicted configuration harness."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .env import SyntheticEnvironment
from .errors import AbstractPoseError
from .posecodec import (bones_to_camera_frame, decode_pose, encode_pose, pose_params,
                        quantization_angle_deg)
from .skeleton import BoneDecomposition, Pose, TOPOLOGY, compose_pose, decompose_pose, forward_vector
from .viewpoint import CodecParams, decode_viewpoint, encode_viewpoint, rotate_camera_array


@dataclass(frozen=True, eq=False)
class Reconstruction:
    pose: Pose
    camera_indicator: np.ndarray  # unit vector from the subject towards the camera


def canonical_forward(env: SyntheticEnvironment) -> np.ndarray:
    """A subject forward that puts the seam at the room's own column 0."""
    f = env.camera_forwards[0, 0].copy()
    f[2] = 0.0
    return f / np.linalg.norm(f)


def reconstruct(vp_index, bone_vectors_cam, env: SyntheticEnvironment, preset_lengths) -> Reconstruction:
    i, j = vp_index
    env.check_index(i, j)
    v = np.asarray(bone_vectors_cam, float)
    if np.any(np.abs(np.linalg.norm(v, axis=1) - 1.0) > 1e-6):
        raise ValueError("bone vectors must be unit length")
    perm = rotate_camera_array(env, canonical_forward(env))
    R = perm.rotations[i, j]
    world = v @ R.T
    pose = compose_pose(BoneDecomposition(world, np.asarray(preset_lengths, float)))
    T = perm.positions[i, j]
    return Reconstruction(pose, T / np.linalg.norm(T))


# -- metrics ------------------------------------------------------------------

def _centred(pose: Pose) -> np.ndarray:
    return pose.joints - pose.root


def mpjpe(pred: Pose, gt: Pose) -> float:
    return float(np.mean(np.linalg.norm(_centred(pred) - _centred(gt), axis=1)))


def per_joint_error(pred: Pose, gt: Pose) -> np.ndarray:
    return np.linalg.norm(_centred(pred) - _centred(gt), axis=1)


def kabsch(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Rotation R (det +1) minimising sum |R a_k - b_k|^2 for paired rows."""
    H = A.T @ B
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    D = np.diag([1.0, 1.0, d if d != 0 else 1.0])
    return Vt.T @ D @ U.T


def rotation_align(pred: Pose, gt: Pose) -> np.ndarray:
    """Root-centred prediction rotated onto the root-centred ground truth."""
    P, G = _centred(pred), _centred(gt)
    return P @ kabsch(P, G).T


def rotation_aligned_mpjpe(pred: Pose, gt: Pose) -> float:
    return float(np.mean(np.linalg.norm(rotation_align(pred, gt) - _centred(gt), axis=1)))


def procrustes_align(pred: Pose, gt: Pose) -> np.ndarray:
    """Similarity (rotation, isotropic scale, translation) alignment of pred onto gt."""
    P, G = pred.joints, gt.joints
    mp, mg = P.mean(axis=0), G.mean(axis=0)
    P0, G0 = P - mp, G - mg
    var = np.sum(P0 ** 2)
    if var < 1e-12:
        raise AbstractPoseError("cannot Procrustes-align a pose whose joints coincide")
    H = P0.T @ G0
    U, s, Vt = np.linalg.svd(H)
    d = 1.0 if np.linalg.det(Vt.T @ U.T) >= 0 else -1.0
    D = np.diag([1.0, 1.0, d])
    R = Vt.T @ D @ U.T
    scale = np.trace(np.diag(s) @ D) / var
    return scale * P0 @ R.T + mg


def pa_mpjpe(pred: Pose, gt: Pose) -> float:
    return float(np.mean(np.linalg.norm(procrustes_align(pred, gt) - gt.joints, axis=1)))


@dataclass
class FrameReport:
    mpjpe: float
    pa_mpjpe: float
    rot_mpjpe: float
    per_joint: np.ndarray

    def to_dict(self) -> dict:
        return {"mpjpe": self.mpjpe, "pa_mpjpe": self.pa_mpjpe, "rot_mpjpe": self.rot_mpjpe,
                "per_joint": [float(x) for x in self.per_joint]}


def evaluate_pair(pred: Pose, gt: Pose) -> FrameReport:
    return FrameReport(mpjpe(pred, gt), pa_mpjpe(pred, gt), rotation_aligned_mpjpe(pred, gt),
                       per_joint_error(pred, gt))


@dataclass
class EvalReport:
    frames: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (frame index, reason)

    @property
    def mpjpe(self) -> float:
        return _mean([f.mpjpe for f in self.frames])

    @property
    def pa_mpjpe(self) -> float:
        return _mean([f.pa_mpjpe for f in self.frames])

    @property
    def rot_mpjpe(self) -> float:
        return _mean([f.rot_mpjpe for f in self.frames])

    @property
    def per_joint(self) -> np.ndarray:
        if not self.frames:
            return np.full(TOPOLOGY.n_joints, np.nan)
        return np.mean([f.per_joint for f in self.frames], axis=0)

    def to_dict(self) -> dict:
        return {
            "frames": [f.to_dict() for f in self.frames],
            "skipped": [{"frame": k, "reason": r} for k, r in self.skipped],
            "aggregate": {
                "count": len(self.frames),
                "mpjpe": self.mpjpe,
                "pa_mpjpe": self.pa_mpjpe,
                "rot_mpjpe": self.rot_mpjpe,
                "per_joint": [float(x) for x in self.per_joint],
            },
        }


def _mean(xs):
    return float(np.mean(xs)) if xs else float("nan")


# -- quantisation bound ---------------------------------------------------------

def quantization_bound_mm(lengths, topology=TOPOLOGY, angle_deg: float | None = None) -> float:
    """Worst-case joint error from pose binning alone, over the deepest chain.

    Each bone can tilt by at most ``angle_deg``, moving its child by the chord
    2 L sin(angle/2); errors along a chain add up at worst.
    """
    if angle_deg is None:
        angle_deg = quantization_angle_deg()
    chord = 2.0 * np.sin(np.radians(angle_deg) / 2.0)
    lengths = np.asarray(lengths, float)
    return float(max(chord * lengths[topology.chain(j)].sum() for j in range(topology.n_joints)))


# -- configuration harness -----------------------------------------------------

@dataclass(frozen=True)
class Configuration:
    """Which stages use ground truth.  1: both, 2: viewpoint only, 3: neither."""
    gt_viewpoint: bool
    gt_pose: bool


CONFIGURATIONS = {
    1: Configuration(gt_viewpoint=True, gt_pose=True),
    2: Configuration(gt_viewpoint=True, gt_pose=False),
    3: Configuration(gt_viewpoint=False, gt_pose=False),
}


def encode_frame(pose: Pose, env: SyntheticEnvironment, i_orig: int, j: int,
                 vp_params: CodecParams, pose_params_: CodecParams):
    """Ground-truth targets for one frame seen from room camera (i_orig, j).

    Returns (relative viewpoint index, viewpoint heatmap, pose heatmaps).
    """
    F_s = forward_vector(pose)
    perm = rotate_camera_array(env, F_s)
    i_rel = perm.to_relative(i_orig)
    vp_map = encode_viewpoint(i_rel, j, vp_params, env.config)
    bones = decompose_pose(pose).unit_vectors
    cam = bones_to_camera_frame(bones, env.rotations[i_orig, j])
    return (i_rel, j), vp_map, encode_pose(cam, pose_params_)


def run_configuration(config: Configuration, pose: Pose, env: SyntheticEnvironment,
                      i_orig: int, j: int, preset_lengths, vp_params: CodecParams | None = None,
                      pose_params_: CodecParams | None = None, predictor=None) -> tuple[Reconstruction, FrameReport]:
    """Reconstruct one frame and score it against ``pose``.

    ``predictor(vp_map, pose_maps) -> (vp_map, pose_maps)`` stands in for the
    networks; by default it returns the clean encodings unchanged.
    """
    vp_params = vp_params or CodecParams(heatmap_size=env.config.heatmap_size)
    pose_params_ = pose_params_ or pose_params()
    gt_index, vp_map, pose_maps = encode_frame(pose, env, i_orig, j, vp_params, pose_params_)
    pred_vp, pred_pose = (vp_map, pose_maps) if predictor is None else predictor(vp_map, pose_maps)
    index = gt_index if config.gt_viewpoint else decode_viewpoint(pred_vp, env.config)
    vectors = decode_pose(pose_maps if config.gt_pose else pred_pose)
    rec = reconstruct(index, vectors, env, preset_lengths)
    return rec, evaluate_pair(rec.pose, pose)
