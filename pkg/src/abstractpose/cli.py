"""Command-line entry point.

Every command reads a JSON manifest (``--manifest``); command-line flags
override manifest keys.  Relative paths in a manifest resolve against the
manifest's directory.

Randomness (random cameras, dropped parts) comes from numpy's PCG64 seeded
with ``SeedSequence([seed, frame_index])``, so results do not depend on the
worker count.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .env import EnvConfig, build_environment
from .errors import AbstractPoseError
from .evaluation import (CONFIGURATIONS, EvalReport, FrameReport, encode_frame, evaluate_pair,
                         quantization_bound_mm, reconstruct, run_configuration)
from .posecodec import decode_pose, pose_params
from .renderer import PART_NAMES, RenderConfig, render_view
from .skeleton import TOPOLOGY, decompose_pose, forward_vector, load_bone_lengths, load_poses
from .viewpoint import CodecParams, decode_viewpoint

log = logging.getLogger("abstractpose")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


@dataclass
class RunManifest:
    poses: Path | None = None
    env: Path | None = None
    codec: dict = field(default_factory=dict)
    render: dict = field(default_factory=dict)
    out_dir: Path = Path("out")
    seed: int = 0
    camera: str = "random"
    drop: int = 0
    max_drop: int = 4
    lengths: Path | None = None
    pred: Path | None = None
    heatmaps: Path | None = None
    noise: float = 0.0
    workers: int = 1

    PATH_KEYS = ("poses", "env", "out_dir", "lengths", "pred", "heatmaps")

    @classmethod
    def load(cls, path) -> "RunManifest":
        path = Path(path)
        data = json.loads(path.read_text())
        return cls.from_dict(data, base=path.parent)

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path(".")) -> "RunManifest":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown manifest key(s): {sorted(unknown)}")
        m = cls(**data)
        for key in cls.PATH_KEYS:
            v = getattr(m, key)
            if v is not None:
                setattr(m, key, base / Path(v))
        return m

    def environment(self):
        config = EnvConfig.load(self.env) if self.env else EnvConfig()
        return build_environment(config)

    def codec_params(self, heatmap_size):
        return CodecParams(sigma=self.codec.get("sigma", 2.0),
                           kernel_width=self.codec.get("kernel_width", 13),
                           heatmap_size=heatmap_size)

    def render_config(self):
        return RenderConfig(**self.render)

    def require(self, *keys):
        for k in keys:
            if getattr(self, k) is None:
                raise ValueError(f"manifest is missing '{k}'")


def frame_rng(seed: int, frame: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, frame])))


def select_cameras(choice: str, env, rng) -> list[tuple[int, int]]:
    X, Y = env.shape
    if choice == "random":
        return [(int(rng.integers(X)), int(rng.integers(Y)))]
    if choice == "all":
        return [(i, j) for i in range(X) for j in range(Y)]
    try:
        i, j = (int(s) for s in choice.split(","))
    except ValueError:
        raise ValueError(f"--camera expects 'i,j', 'random' or 'all', got {choice!r}") from None
    env.check_index(i, j)
    return [(i, j)]


def _stem(frame, i, j):
    return f"frame{frame:05d}_cam{i:02d}_{j}"


def _map_frames(fn, tasks, workers):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, tasks))
    return [fn(t) for t in tasks]


# -- per-frame workers (module level so they pickle) ---------------------------

def _render_task(args):
    m, f, pose = args
    env, cfg = m.environment(), m.render_config()
    rng = frame_rng(m.seed, f)
    out = []
    for i, j in select_cameras(m.camera, env, rng):
        drop = sorted(int(k) for k in rng.choice(len(cfg.part_names), size=m.drop, replace=False)) if m.drop else []
        try:
            img = render_view(pose, env, i, j, cfg, drop=drop)
        except AbstractPoseError as exc:
            out.append({"frame": f, "camera": [i, j], "error": str(exc)})
            continue
        stem = _stem(f, i, j)
        io.write_ppm(m.out_dir / f"{stem}.ppm", img.pixels)
        io.write_pgm(m.out_dir / f"{stem}.pgm", io.provenance_to_gray(img.provenance))
        out.append({"frame": f, "camera": [i, j], "dropped": [cfg.part_names[k] for k in drop],
                    "image": f"{stem}.ppm", "provenance": f"{stem}.pgm",
                    "colors": img.color_census(cfg.background)})
    return out


def _encode_task(args):
    m, f, pose = args
    env = m.environment()
    vp_params = m.codec_params(env.config.heatmap_size)
    pp = pose_params(vp_params.sigma, vp_params.kernel_width)
    rng = frame_rng(m.seed, f)
    out = []
    for i, j in select_cameras(m.camera, env, rng):
        try:
            index, vp_map, pose_maps = encode_frame(pose, env, i, j, vp_params, pp)
        except AbstractPoseError as exc:
            out.append({"frame": f, "camera": [i, j], "skipped": str(exc)})
            continue
        stem = _stem(f, i, j)
        io.write_heatmap(m.out_dir / f"{stem}_vp.phm", vp_map)
        io.write_heatmap(m.out_dir / f"{stem}_pose.phm", pose_maps)
        out.append({"frame": f, "camera": [i, j], "viewpoint": list(index),
                    "viewpoint_file": f"{stem}_vp.phm", "pose_file": f"{stem}_pose.phm"})
    return out


def _add_noise(noise, rng):
    if noise <= 0:
        return None

    def predictor(vp_map, pose_maps):
        vp = vp_map + rng.uniform(-noise, noise, vp_map.shape).astype(np.float32)
        ps = pose_maps + rng.uniform(-noise, noise, pose_maps.shape).astype(np.float32)
        return vp, ps
    return predictor


def _roundtrip_task(args):
    m, f, pose, preset = args
    env = m.environment()
    vp_params = m.codec_params(env.config.heatmap_size)
    pp = pose_params(vp_params.sigma, vp_params.kernel_width)
    rng = frame_rng(m.seed, f)
    cams = select_cameras(m.camera, env, rng)
    lengths = preset if preset is not None else decompose_pose(pose).lengths
    out = []
    for i, j in cams:
        per_cfg = {}
        for key, cfg in CONFIGURATIONS.items():
            # every configuration sees the same corrupted heatmaps
            pred_rng = frame_rng(m.seed + 1, f * 100003 + i * 31 + j)
            try:
                _, rep = run_configuration(cfg, pose, env, i, j, lengths, vp_params, pp,
                                           predictor=_add_noise(m.noise, pred_rng))
            except AbstractPoseError as exc:
                per_cfg[key] = str(exc)
                continue
            per_cfg[key] = rep
        out.append(((f, i, j), per_cfg))
    return out


def _ablate_task(args):
    m, f, pose = args
    env, cfg = m.environment(), m.render_config()
    rng = frame_rng(m.seed, f)
    rows = []
    for i, j in select_cameras(m.camera, env, rng):
        # nested drop sets: each k adds one part to the previous set
        order = [int(k) for k in rng.permutation(len(cfg.part_names))]
        for k in range(m.max_drop + 1):
            drop = sorted(order[:k])
            try:
                img = render_view(pose, env, i, j, cfg, drop=drop)
            except AbstractPoseError as exc:
                rows.append({"frame": f, "camera": [i, j], "k": k, "error": str(exc)})
                continue
            missing = sorted({b for d in drop for b in _part_bones(cfg.part_names[d])})
            rows.append({"frame": f, "camera": [i, j], "k": k,
                         "dropped": [cfg.part_names[d] for d in drop],
                         "census": img.color_census(cfg.background),
                         "undecodable_bones": missing})
    return rows


def _part_bones(name):
    if name == "head":
        return [TOPOLOGY.bone_index("Head", "Neck")]
    return list(TOPOLOGY.part_bones[name])


# -- commands -----------------------------------------------------------------

def _tasks(m, poses):
    return [(m, f, p) for f, p in enumerate(poses)]


def _flatten(results):
    return [r for chunk in results for r in chunk]


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2))


def cmd_render(m: RunManifest) -> int:
    m.require("poses")
    poses = load_poses(m.poses)
    m.render_config()
    m.out_dir.mkdir(parents=True, exist_ok=True)
    items = _flatten(_map_frames(_render_task, _tasks(m, poses), m.workers))
    _write_json(m.out_dir / "render.json", items)
    log.info("rendered %d image(s)", sum("image" in r for r in items))
    return EXIT_OK


def cmd_encode(m: RunManifest) -> int:
    m.require("poses")
    poses = load_poses(m.poses)
    m.out_dir.mkdir(parents=True, exist_ok=True)
    items = _flatten(_map_frames(_encode_task, _tasks(m, poses), m.workers))
    warnings = [r for r in items if "skipped" in r]
    for r in warnings:
        log.warning("frame %d skipped: %s", r["frame"], r["skipped"])
    _write_json(m.out_dir / "encode.json", {"items": items, "warnings": len(warnings)})
    return EXIT_OK


def cmd_decode(m: RunManifest) -> int:
    src = m.heatmaps or m.out_dir
    env = m.environment()
    preset = load_bone_lengths(m.lengths) if m.lengths else None
    results = []
    for vp_file in sorted(Path(src).glob("*_vp.phm")):
        stem = vp_file.name[: -len("_vp.phm")]
        pose_file = vp_file.with_name(f"{stem}_pose.phm")
        entry = {"stem": stem}
        try:
            index = decode_viewpoint(io.read_heatmap(vp_file), env.config)
            vectors = decode_pose(io.read_heatmap(pose_file))
        except AbstractPoseError as exc:
            entry["error"] = str(exc)
            results.append(entry)
            continue
        entry["viewpoint"] = list(index)
        entry["bone_vectors"] = vectors.tolist()
        if preset is not None:
            rec = reconstruct(index, vectors, env, preset)
            entry["joints"] = rec.pose.joints.tolist()
            entry["camera_indicator"] = rec.camera_indicator.tolist()
        results.append(entry)
    m.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(m.out_dir / "decoded.json", results)
    return EXIT_OK


def cmd_roundtrip(m: RunManifest) -> int:
    m.require("poses")
    poses = load_poses(m.poses)
    preset = load_bone_lengths(m.lengths) if m.lengths else None
    tasks = [(m, f, p, preset) for f, p in enumerate(poses)]
    results = _flatten(_map_frames(_roundtrip_task, tasks, m.workers))
    reports = {k: EvalReport() for k in CONFIGURATIONS}
    for (f, i, j), per_cfg in results:
        for k, rep in per_cfg.items():
            if isinstance(rep, FrameReport):
                reports[k].frames.append(rep)
            else:
                reports[k].skipped.append((f, rep))
    bounds = [quantization_bound_mm(preset if preset is not None else decompose_pose(p).lengths)
              for p in poses]
    out = {"configurations": {str(k): r.to_dict() for k, r in reports.items()},
           "quantization_bound_mm": max(bounds) if bounds else None,
           "noise": m.noise}
    m.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(m.out_dir / "roundtrip.json", out)
    for k, r in reports.items():
        log.info("configuration %d: mpjpe %.3f  rot %.3f  pa %.3f mm", k, r.mpjpe, r.rot_mpjpe, r.pa_mpjpe)
    return EXIT_OK


def cmd_metrics(m: RunManifest) -> int:
    m.require("poses", "pred")
    gt, pred = load_poses(m.poses), load_poses(m.pred)
    if len(gt) != len(pred):
        raise ValueError(f"{len(pred)} predicted frame(s) vs {len(gt)} ground-truth frame(s)")
    report = EvalReport()
    for f, (p, g) in enumerate(zip(pred, gt)):
        try:
            report.frames.append(evaluate_pair(p, g))
        except AbstractPoseError as exc:
            report.skipped.append((f, str(exc)))
    m.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(m.out_dir / "metrics.json", report.to_dict())
    return EXIT_OK


def cmd_ablate(m: RunManifest) -> int:
    m.require("poses")
    poses = load_poses(m.poses)
    cfg = m.render_config()
    if not 0 <= m.max_drop <= len(cfg.part_names):
        raise ValueError(f"max_drop must lie in [0, {len(cfg.part_names)}]")
    rows = _flatten(_map_frames(_ablate_task, _tasks(m, poses), m.workers))
    m.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(m.out_dir / "ablate.json", rows)
    with open(m.out_dir / "ablate.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "cam_i", "cam_j", "k", "census", "dropped"])
        for r in rows:
            if "census" in r:
                w.writerow([r["frame"], *r["camera"], r["k"], r["census"], ";".join(r["dropped"])])
    return EXIT_OK


COMMANDS = {
    "render": cmd_render,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "roundtrip": cmd_roundtrip,
    "metrics": cmd_metrics,
    "ablate": cmd_ablate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abstractpose", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--manifest", type=Path, help="JSON run manifest")
    parser.add_argument("--seed", type=int, help="base seed for per-frame randomness")
    parser.add_argument("--camera", help="'i,j', 'random' or 'all'")
    parser.add_argument("--out-dir", type=Path, help="output directory")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("--poses", type=Path, help="JSON list of frames, each {'joints': 14x3 mm}")
    parser.add_argument("--env", type=Path, help="JSON environment config")
    parser.add_argument("--lengths", type=Path, help="bone-length preset (13 values, bone order)")
    parser.add_argument("--pred", type=Path, help="predicted poses for metrics")
    parser.add_argument("--heatmaps", type=Path, help="directory of *_vp.phm / *_pose.phm files")
    parser.add_argument("--drop", type=int, help="random parts to drop when rendering")
    parser.add_argument("--max-drop", type=int, help="largest drop count for ablate")
    parser.add_argument("--noise", type=float, help="uniform heatmap noise amplitude for roundtrip")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        m = RunManifest.load(args.manifest) if args.manifest else RunManifest()
        for key in ("seed", "camera", "out_dir", "workers", "poses", "env", "lengths",
                    "pred", "heatmaps", "drop", "max_drop", "noise"):
            v = getattr(args, key)
            if v is not None:
                setattr(m, key, v)
        return COMMANDS[args.command](m)
    except (OSError, json.JSONDecodeError) as exc:
        if isinstance(exc, json.JSONDecodeError):
            log.error("invalid JSON: %s", exc)
            return EXIT_VALIDATION
        log.error("%s", exc)
        return EXIT_IO
    except (ValueError, TypeError, IndexError, AbstractPoseError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
