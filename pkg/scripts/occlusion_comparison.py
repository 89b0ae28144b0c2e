"""Mean floor error per scenario type for pose, bbox and bbox-extended feet.

    python3 scripts/occlusion_comparison.py --frames 200 --jitter 2 --seed 0
"""

import argparse

import numpy as np

from floorloc import synthetic as syn
from floorloc.cli import SCENARIO_OCCLUSION
from floorloc.dataset import AnnotationRecord
from floorloc.pipeline import RunConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--jitter", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--aspect", type=float, default=2.5)
    args = ap.parse_args()

    cam = syn.s1_camera()
    scene = syn.scene_config(cam, *syn.S1_GRID, name="cam0")
    positions = syn.random_positions(*syn.S1_GRID, args.frames, seed=args.seed)
    gt = [AnnotationRecord(i, p) for i, p in enumerate(positions)]

    print(f"{'scenario':16s} {'pose':>10s} {'bbox':>10s} {'bbox_ext':>10s}   (mean cm / missing %)")
    for scenario, occlusion in SCENARIO_OCCLUSION.items():
        rng = np.random.default_rng(args.seed)
        frames = [
            syn.synth_frame(cam, syn.StickPerson(p), occlusion, frame_id=i, jitter_px=args.jitter, rng=rng)
            for i, p in enumerate(positions)
        ]
        cells = []
        for method in ("pose", "bbox", "bbox_extended"):
            dets = [f.skeleton if method == "pose" else f.bbox for f in frames]
            rep = run([dets], gt, RunConfig((scene,), method=method, bbox_aspect=args.aspect)).report
            mean = "-" if rep.mean is None else f"{rep.mean:.1f}"
            cells.append(f"{mean}/{100 * rep.missing_fraction:.0f}")
        print(f"{scenario:16s} " + " ".join(f"{c:>10s}" for c in cells))


if __name__ == "__main__":
    main()
