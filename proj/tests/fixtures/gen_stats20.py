"""Writes stats20.jsonl and its hand-computed expectations.

Coordinates are multiples of 1/32 so areas, offsets and squared distances
are exact in binary floating point. Angles come from 50-digit mpmath and are
rounded once to double. Nothing here calls the library under test.
"""
import json
from fractions import Fraction as F
from pathlib import Path

import mpmath

mpmath.mp.dps = 50
U = F(1, 16)

# (video, frame, person, child, box in 1/16 units, label, gaze offset from head centre in 1/16 units)
ROWS = [
    ("v1", 0, "p1", True, (2, 2, 4, 4), "inside-frame", (4, 0)),
    ("v1", 0, "p2", False, (6, 2, 8, 4), "inside-frame", (0, 4)),
    ("v1", 1, "p1", True, (2, 2, 4, 4), "inside-frame", (3, 4)),
    ("v1", 1, "p2", False, (10, 2, 12, 4), "inside-frame", (-4, 0)),
    ("v1", 1, "p3", True, (5, 6, 7, 8), "inside-frame", (4, -3)),
    ("v2", 0, "p1", True, (1, 1, 3, 3), "inside-frame", (2, 2)),
    ("v2", 5, "p1", False, (8, 8, 10, 10), "inside-frame", (-3, -4)),
    ("v3", 0, "p1", True, (4, 4, 6, 6), "inside-frame", (-2, 2)),
    ("v3", 0, "p2", True, (10, 10, 12, 12), "inside-frame", (-6, -6)),
    ("v3", 0, "p3", False, (12, 4, 14, 6), "inside-frame", (-8, 6)),
    ("v3", 3, "p1", False, (0, 0, 2, 2), "outside-frame", None),
    ("v3", 3, "p2", True, (6, 0, 8, 2), "occluded", None),
    ("v4", 0, "p1", True, (7, 1, 9, 3), "inside-frame", (5, 12)),
    ("v4", 0, "p2", False, (12, 13, 14, 15), "eyes-closed", None),
    ("v5", 0, "p1", False, (3, 10, 5, 12), "inside-frame", (3, -3)),
    ("v5", 0, "p2", False, (6, 7, 8, 9), "inside-frame", (-3, 3)),
    ("v6", 0, "p1", True, (0, 6, 2, 8), "inside-frame", (14, 0)),
    ("v6", 0, "p2", True, (14, 6, 16, 8), "inside-frame", (-14, 0)),
    ("v7", 0, "p1", False, (4, 0, 8, 4), "inside-frame", (0, 12)),
    ("v7", 2, "p1", True, (8, 12, 9, 13), "inside-frame", (0, -4)),
]

LABELS = ["inside-frame", "outside-frame", "gaze-shift", "occluded", "eyes-closed", "uncertain", "not-annotated"]
AREA_BINS, ANGLE_BINS, DIST_BINS, GRID = 100, 36, 20, 10


def floor_bin(value, lo, hi, bins):
    b = int(mpmath.floor((value - lo) / (hi - lo) * bins))
    return min(max(b, 0), bins - 1)


def main():
    here = Path(__file__).parent
    lines, per_instance = [], []
    area_h, angle_h, dist_h = [0] * AREA_BINS, [0] * ANGLE_BINS, [0] * DIST_BINS
    grid = [0] * (GRID * GRID)
    boxes_by_frame, people = {}, {}
    for v, f, p, _, box, _, _ in ROWS:
        boxes_by_frame.setdefault((v, f), []).append(tuple(F(c) * U for c in box))
        people.setdefault((v, f), set()).add(p)
    looking = {k: [0, 0] for k in ("all_child", "all_adult", "multi_child", "multi_adult")}
    for v, f, p, child, box, label, off in ROWS:
        x0, y0, x1, y1 = (F(c) * U for c in box)
        rec = {"video_id": v, "clip_id": "c0", "frame": f, "person_id": p, "is_child": child,
               "head_bbox": [float(x0), float(y0), float(x1), float(y1)], "gaze_label": label}
        area = (x1 - x0) * (y1 - y0)
        area_h[floor_bin(mpmath.mpf(area.numerator) / area.denominator, 0, 1, AREA_BINS)] += 1
        inst = {"key": f"{v}:c0:{f}:{p}", "head_area": float(area), "gaze_angle_deg": None,
                "head_gaze_distance": None}
        if off is not None:
            cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
            dx, dy = F(off[0]) * U, F(off[1]) * U
            gx, gy = cx + dx, cy + dy
            assert 0 <= gx <= 1 and 0 <= gy <= 1
            rec["gaze_point"] = [float(gx), float(gy)]
            ang = mpmath.atan2(mpmath.mpf(float(dy)), mpmath.mpf(float(dx))) * 180 / mpmath.pi
            dist = mpmath.sqrt(mpmath.mpf(float(dx * dx + dy * dy)))
            inst["gaze_angle_deg"] = float(ang)
            inst["head_gaze_distance"] = float(dist)
            angle_h[floor_bin(ang, -180, 180, ANGLE_BINS)] += 1
            dist_h[floor_bin(dist, 0, mpmath.sqrt(2), DIST_BINS)] += 1
            grid[min(int(gy * GRID), GRID - 1) * GRID + min(int(gx * GRID), GRID - 1)] += 1
            hit = any(b[0] <= gx <= b[2] and b[1] <= gy <= b[3] for b in boxes_by_frame[(v, f)])
            group = "child" if child else "adult"
            looking["all_" + group][0] += 1
            looking["all_" + group][1] += hit
            if len(people[(v, f)]) >= 2:
                looking["multi_" + group][0] += 1
                looking["multi_" + group][1] += hit
        lines.append(json.dumps(rec))
        per_instance.append(inst)
    per_instance.sort(key=lambda r: r["key"])
    counts = [sum(r[5] == name for r in ROWS) for name in LABELS]
    expected = {
        "n_instances": len(ROWS),
        "label_counts": counts,
        "label_fractions": [F(c, len(ROWS)).numerator / F(c, len(ROWS)).denominator for c in counts],
        "child_fraction": sum(r[3] for r in ROWS) / len(ROWS),
        "looking_at_head": {k: {"population": a, "looking": b} for k, (a, b) in looking.items()},
        "head_area_counts": area_h,
        "gaze_angle_counts": angle_h,
        "head_gaze_distance_counts": dist_h,
        "gaze_point_counts": grid,
        "per_instance": per_instance,
    }
    (here / "stats20.jsonl").write_text("\n".join(lines) + "\n")
    (here / "stats20_expected.json").write_text(json.dumps(expected, indent=1) + "\n")


if __name__ == "__main__":
    main()
