"""Shared test fixtures: random valid poses and the nominal bone-length preset."""
import numpy as np

from abstractpose.skeleton import TOPOLOGY, J, BoneDecomposition, compose_pose

_NOMINAL = {
    ("Head", "Neck"): 200.0,
    ("RShoulder", "Neck"): 180.0, ("RElbow", "RShoulder"): 280.0, ("RWrist", "RElbow"): 250.0,
    ("LShoulder", "Neck"): 180.0, ("LElbow", "LShoulder"): 280.0, ("LWrist", "LElbow"): 250.0,
    ("RHip", "Neck"): 510.0, ("RKnee", "RHip"): 450.0, ("RAnkle", "RKnee"): 420.0,
    ("LHip", "Neck"): 510.0, ("LKnee", "LHip"): 450.0, ("LAnkle", "LKnee"): 420.0,
}
NOMINAL_LENGTHS = np.array([_NOMINAL[(TOPOLOGY.joint_names[c], TOPOLOGY.joint_names[p])]
                            for c, p in TOPOLOGY.bone_order])


def _unit(v):
    return v / np.linalg.norm(v)


def random_unit(rng, n=None):
    v = rng.normal(size=(3,) if n is None else (n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_rotation(rng):
    q = rng.normal(size=4)
    a, b, c, d = q / np.linalg.norm(q)
    return np.array([
        [a*a + b*b - c*c - d*d, 2*(b*c - a*d), 2*(b*d + a*c)],
        [2*(b*c + a*d), a*a - b*b + c*c - d*d, 2*(c*d - a*b)],
        [2*(b*d - a*c), 2*(c*d + a*b), a*a - b*b - c*c + d*d],
    ])


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def random_pose(rng, lengths=NOMINAL_LENGTHS, root=(0.0, 0.0, 0.0)):
    """Roughly upright subject, random yaw, limbs in random directions."""
    yaw = rng.uniform(0, 2 * np.pi)
    up = _unit(np.array([0.0, 0.0, 1.0]) + 0.25 * rng.normal(size=3) * [1, 1, 0])
    right = _unit(np.cross(rot_z(yaw) @ [0.0, 1.0, 0.0], up))
    dirs = {}
    dirs[("Head", "Neck")] = _unit(up + 0.3 * rng.normal(size=3))
    for side, s in (("R", 1.0), ("L", -1.0)):
        dirs[(side + "Shoulder", "Neck")] = _unit(s * right + 0.15 * rng.normal(size=3))
        dirs[(side + "Hip", "Neck")] = _unit(-up + s * 0.2 * right + 0.05 * rng.normal(size=3))
        for c, p in (("Elbow", "Shoulder"), ("Wrist", "Elbow"), ("Knee", "Hip"), ("Ankle", "Knee")):
            dirs[(side + c, side + p)] = random_unit(rng)
    units = np.array([dirs[(TOPOLOGY.joint_names[c], TOPOLOGY.joint_names[p])]
                      for c, p in TOPOLOGY.bone_order])
    return compose_pose(BoneDecomposition(units, np.asarray(lengths, float)), root)


# acceptance results, printed by the terminal-summary hook in conftest.py
ACCEPTANCE_RESULTS = {}
