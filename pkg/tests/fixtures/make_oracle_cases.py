"""Regenerate oracle_cases.json (inputs from a seeded stdlib RNG, expected
values from tests/oracle.py). Run from the repository root:

    python3 tests/fixtures/make_oracle_cases.py
"""

import json
import math
import random
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

import oracle  # noqa: E402

N_CASES = 50
N_POINTS = 20
SEED = 20240607


def random_rotation(rng):
    q = [rng.gauss(0, 1) for _ in range(4)]
    n = math.sqrt(sum(x * x for x in q))
    w, x, y, z = (c / n for c in q)
    return [
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ]


def random_state(rng):
    R = random_rotation(rng)
    t = [rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(0.8, 3.0)]
    return R, t, rng.uniform(200.0, 1000.0)


def main():
    rng = random.Random(SEED)
    cases = []
    for _ in range(N_CASES):
        state = random_state(rng)
        target = random_state(rng)
        dR = random_rotation(rng)
        delta = {
            "vx": rng.gauss(0, 50),
            "vy": rng.gauss(0, 50),
            "vz": rng.uniform(0.6, 1.6),
            "r1": [dR[i][0] + rng.gauss(0, 0.1) for i in range(3)],
            "r2": [dR[i][1] + rng.gauss(0, 0.1) for i in range(3)],
            "vf": rng.gauss(0, 0.4),
        }
        pts = [[rng.uniform(-0.1, 0.1) for _ in range(3)] for _ in range(N_POINTS)]
        center = [320.0, 240.0]
        d_bbox = rng.uniform(50, 300)
        d_img = 800.0
        pred = oracle.apply_update(state, delta)
        cases.append(
            {
                "state": {"R": state[0], "t": state[1], "f": state[2]},
                "target": {"R": target[0], "t": target[1], "f": target[2]},
                "delta": delta,
                "points": pts,
                "center": center,
                "d_bbox": d_bbox,
                "d_img": d_img,
                "expected": {
                    "pose_terms": oracle.disentangled_pose_terms(state, delta, target, pts),
                    "huber": oracle.huber(math.log(pred[2]) - math.log(target[2])),
                    "disent_reproj": oracle.disentangled_reprojection(pred, target, pts, center),
                    "total": oracle.total_loss(state, delta, target, pts, center),
                    "point_matching_error": oracle.point_matching_error(
                        pred[0], pred[1], target[0], target[1], pts, d_bbox, d_img
                    ),
                    "reprojection_error": oracle.reprojection_error(
                        pred, target, pts, center, d_bbox
                    ),
                },
            }
        )
    out = HERE / "oracle_cases.json"
    out.write_text(json.dumps({"seed": SEED, "cases": cases}, indent=1) + "\n")
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
