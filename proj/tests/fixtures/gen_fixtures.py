"""Writes the CLI fixtures and the independently computed expectations.

Run from any directory; outputs land next to this file. The expectations
(eval_oracle.json, losses_expected.json, unproject_expected.json) are
computed here with brute-force Python and never by the library itself.
"""
import json
import math
import random
import struct
from pathlib import Path

HERE = Path(__file__).parent


def write_gpdm(path, w, h, values):
    data = b"GPDM" + struct.pack("<II", w, h) + struct.pack("<%df" % (w * h), *values)
    path.write_bytes(data)


def f32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


def jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


# ---------------------------------------------------------------- unproject
def unproject_fixtures():
    write_gpdm(HERE / "depth2x2.gpdm", 2, 2, [1.0, 2.0, 3.0, 4.0])
    (HERE / "intrinsics2x2.json").write_text(json.dumps({"focal_px": 2.0, "width": 2, "height": 2}) + "\n")
    write_gpdm(HERE / "nan2x2.gpdm", 2, 2, [float("nan")] * 4)
    # Pixel (x, y) at depth z: ((x - 1) z / 2, (y - 1) z / 2, z).
    pts = []
    for y in range(2):
        for x in range(2):
            z = [1.0, 2.0, 3.0, 4.0][y * 2 + x]
            pts.append([(x - 1) * z / 2, (y - 1) * z / 2, z])
    (HERE / "unproject_expected.json").write_text(json.dumps({"points": pts}) + "\n")


# ---------------------------------------------------------------- fov scene
SCENE_F, SCENE_W, SCENE_H = 50.0, 64, 48
SCENE_PLANE = ((0.1, 0.0, 1.0), 4.0)  # n . P = d


def scene_fixtures():
    (n, d) = SCENE_PLANE
    cx, cy = SCENE_W / 2, SCENE_H / 2
    vals = []
    for y in range(SCENE_H):
        for x in range(SCENE_W):
            r = ((x - cx) / SCENE_F, (y - cy) / SCENE_F, 1.0)
            vals.append(d / (n[0] * r[0] + n[1] * r[1] + n[2] * r[2]))
    write_gpdm(HERE / "scene_depth.gpdm", SCENE_W, SCENE_H, vals)
    (HERE / "scene_intrinsics.json").write_text(
        json.dumps({"focal_px": SCENE_F, "width": SCENE_W, "height": SCENE_H}) + "\n")

    # Eye at pixel (20, 30) with depth 1.5; gaze rotated 0.3 rad about the eye
    # frame's y axis. The field peaks where that ray meets the plane.
    eye_px, eye_z = (20.0, 30.0), 1.5
    eye = ((eye_px[0] - cx) * eye_z / SCENE_F, (eye_px[1] - cy) * eye_z / SCENE_F, eye_z)
    norm = math.sqrt(sum(c * c for c in eye))
    ez = tuple(c / norm for c in eye)
    ex = (1.0 * ez[2] - 0.0, 0.0, 0.0 - 1.0 * ez[0])  # (0,1,0) x ez
    nx = math.sqrt(ex[0] ** 2 + ex[2] ** 2)
    ex = (ex[0] / nx, 0.0, ex[2] / nx)
    g_local = (math.sin(0.3), 0.0, math.cos(0.3))
    g_cam = tuple(g_local[0] * ex[i] + g_local[2] * ez[i] for i in range(3))
    t = (d - sum(n[i] * eye[i] for i in range(3))) / sum(n[i] * g_cam[i] for i in range(3))
    hit = tuple(eye[i] + t * g_cam[i] for i in range(3))
    px = (SCENE_F * hit[0] / hit[2] + cx, SCENE_F * hit[1] / hit[2] + cy)
    (HERE / "fov_expected.json").write_text(json.dumps({
        "eye_px": list(eye_px), "eye_depth": eye_z, "gaze": list(g_local), "hit_px": list(px)}) + "\n")


# ---------------------------------------------------------------- eval set
HM = 16


def heatmap(rng, peak):
    vals = [rng.randrange(0, 900) / 1024 for _ in range(HM * HM)]
    vals[peak[1] * HM + peak[0]] = 1.0
    return vals


def eval_fixtures():
    rng = random.Random(5)
    anns, preds = [], []

    def ann(video, frame, person, child, label, gp=None, annotator=None):
        a = {"video_id": video, "clip_id": "c", "frame": frame, "person_id": person, "is_child": child,
             "head_bbox": [0.05, 0.05, 0.15, 0.15], "gaze_label": label}
        if gp is not None:
            a["gaze_point"] = gp
        if annotator is not None:
            a["annotator_id"] = annotator
        anns.append(a)

    ann("va", 0, "p1", True, "inside-frame", [0.3, 0.4])
    ann("va", 0, "p2", False, "inside-frame", [0.75, 0.15])
    ann("va", 1, "p1", True, "outside-frame")
    ann("vb", 0, "p1", True, "inside-frame", [0.6, 0.6], "a1")
    ann("vb", 0, "p1", True, "inside-frame", [0.625, 0.5625], "a2")
    ann("vb", 0, "p2", False, "occluded")
    ann("vb", 2, "p1", False, "inside-frame", [0.2, 0.8])
    ann("vc", 0, "p1", True, "inside-frame", [0.9, 0.9])
    ann("vc", 0, "p2", False, "outside-frame")

    heatmaps = {}
    for name, peak in (("hm1", (5, 6)), ("hm2", (9, 9)), ("hm3", (12, 2))):
        vals = heatmap(rng, peak)
        write_gpdm(HERE / f"eval_{name}.gpdm", HM, HM, vals)
        heatmaps[name] = [f32(v) for v in vals]

    def pred(key, inout, point=None, hm=None):
        p = {"instance_id": key, "inout_score": inout}
        if point is not None:
            p["point"] = point
        if hm is not None:
            p["heatmap_path"] = f"eval_{hm}.gpdm"
        preds.append(p)

    pred("va:c:0:p1", 0.9, hm="hm1")
    pred("va:c:0:p2", 0.8, point=[0.74, 0.16])
    pred("va:c:1:p1", 0.3, point=[0.5, 0.5])
    pred("vb:c:0:p1", 0.7, hm="hm2")
    pred("vb:c:0:p2", 0.6, point=[0.1, 0.1])
    pred("vb:c:2:p1", 0.4, hm="hm3")
    pred("vc:c:0:p1", 0.95, point=[0.5, 0.5])
    pred("vc:c:0:p2", 0.85, point=[0.2, 0.2])
    jsonl(HERE / "eval_annotations.jsonl", anns)
    jsonl(HERE / "eval_predictions.jsonl", preds)
    dets = [
        {"video_id": "va", "frame": 0, "boxes": [[0.25, 0.35, 0.35, 0.45], [0.7, 0.1, 0.8, 0.2]]},
        {"video_id": "vb", "frame": 0, "boxes": [[0.55, 0.55, 0.65, 0.65]]},
        {"video_id": "vb", "frame": 2, "boxes": [[0.0, 0.0, 0.1, 0.1]]},
        {"video_id": "va", "frame": 1, "boxes": [[0.45, 0.45, 0.55, 0.55]]},
        {"video_id": "vc", "frame": 0, "boxes": [[0.15, 0.15, 0.25, 0.25]]},
    ]
    jsonl(HERE / "eval_detections.jsonl", dets)
    (HERE / "eval_oracle.json").write_text(json.dumps(eval_oracle(anns, preds, heatmaps, dets), indent=1) + "\n")


def eval_oracle(anns, preds, heatmaps, dets, sigma=1.0, radius_sigmas=2.0):
    """Brute-force metrics for the golden eval run (--gt-sigma 1 --auc-radius 2)."""
    groups = {}
    for a in anns:
        key = f"{a['video_id']}:{a['clip_id']}:{a['frame']}:{a['person_id']}"
        groups.setdefault(key, []).append(a)
    boxes = {(d["video_id"], d["frame"]): [] for d in dets}
    for d in dets:
        boxes[(d["video_id"], d["frame"])] += d["boxes"]
    rows = []
    for p in preds:
        members = groups[p["instance_id"]]
        gts = [a["gaze_point"] for a in members if "gaze_point" in a]
        labels = {a["gaze_label"] for a in members}
        hm = heatmaps.get(p.get("heatmap_path", "")[5:8]) if "heatmap_path" in p else None
        if hm is not None:
            best = max(range(len(hm)), key=lambda i: (hm[i], -i))
            point = [((best % HM) + 0.5) / HM, ((best // HM) + 0.5) / HM]
        else:
            point = p["point"]
        r = {"child": members[0]["is_child"], "inside": bool(gts), "score": p["inout_score"]}
        r["label"] = 1 if gts else (0 if "outside-frame" in labels else None)
        if gts:
            ds = [math.dist(point, g) for g in gts]
            r["dmin"], r["davg"] = min(ds), sum(ds) / len(ds)
            if hm is not None:
                pos = []
                for y in range(HM):
                    for x in range(HM):
                        pos.append(any((x - min(max(g[0] * HM - 0.5, 0), HM - 1)) ** 2 +
                                       (y - min(max(g[1] * HM - 0.5, 0), HM - 1)) ** 2 <= (radius_sigmas * sigma) ** 2
                                       for g in gts))
                wins = pairs = 0.0
                for i in range(len(hm)):
                    for j in range(len(hm)):
                        if pos[i] and not pos[j]:
                            pairs += 1
                            wins += 1.0 if hm[i] > hm[j] else 0.5 if hm[i] == hm[j] else 0.0
                r["auc"] = wins / pairs
            bx = boxes.get((members[0]["video_id"], members[0]["frame"]), [])
            inside = lambda q, b: b[0] <= q[0] <= b[2] and b[1] <= q[1] <= b[3]
            r["pred_on_head"] = any(inside(point, b) for b in bx)
            r["gt_head"] = any(inside(g, b) for g in gts for b in bx)
        rows.append(r)

    def cell(sel):
        out = {"n_instances": len(sel)}
        ins = [r for r in sel if r["inside"]]
        out["dist_avg"] = sum(r["davg"] for r in ins) / len(ins) if ins else None
        out["dist_min"] = sum(r["dmin"] for r in ins) / len(ins) if ins else None
        au = [r["auc"] for r in ins if "auc" in r]
        out["auc"] = sum(au) / len(au) if au else None
        scored = [(r["score"], r["label"]) for r in sel if r["label"] is not None]
        if any(l == 1 for _, l in scored):
            total = 0.0
            for s, l in scored:
                if l != 1:
                    continue
                rank = sum(1 for s2, _ in scored if s2 > s) + 1
                hits = sum(1 for s2, l2 in scored if l2 == 1 and s2 >= s)
                total += hits / rank
            out["ap"] = total / sum(1 for _, l in scored if l == 1)
        else:
            out["ap"] = None
        on = [r for r in ins if r["pred_on_head"]]
        out["p_head"] = sum(r["gt_head"] for r in on) / len(on) if on else None
        return out

    return {"all": cell(rows), "child": cell([r for r in rows if r["child"]]),
            "adult": cell([r for r in rows if not r["child"]])}


# ---------------------------------------------------------------- stats
def stats_fixtures():
    lines = (HERE / "stats20.jsonl").read_text().splitlines()
    bad = list(lines[:5])
    bad[2] = bad[2].replace('"inside-frame"', '"sideways"')
    (HERE / "stats_parse_error.jsonl").write_text("\n".join(bad) + "\n")
    dets = [{"video_id": "v1", "frame": 0, "boxes": [[0.375, 0.125, 0.5, 0.25]]}]
    jsonl(HERE / "stats20_detections.jsonl", dets)


# ---------------------------------------------------------------- stability
ROOM = [[0, 0, 1, 5.0], [0, 1, 0, 1.2], [-1, 0, 0.2, 1.5]]


def stability_fixtures():
    images = [("s0", [40, 50], [120, 100]), ("s1", [30, 20], [140, 60]), ("s2", [90, 40], [20, 110])]

    def manifest(noise):
        rows = []
        for i, (iid, eye, gaze) in enumerate(images):
            syn = {"focal_px": 200.0, "planes": ROOM, "shift_noise": noise, "noise_seed": 1000 + i}
            rows.append({"image_id": iid, "width": 160, "height": 120, "eye_px": eye, "gaze_px": gaze,
                         "synthetic": syn})
        return rows

    jsonl(HERE / "stability_consistent.jsonl", manifest(0.0))
    for k, noise in enumerate((0.01, 0.03, 0.09), start=1):
        jsonl(HERE / f"stability_noise{k}.jsonl", manifest(noise))

    # File-backed crops of a fronto-parallel wall at 3 m.
    crops = {"0,0,32,24": None, "8,4,40,32": 90.0}
    paths = {}
    for key, focal in crops.items():
        x0, y0, w, h = map(int, key.split(","))
        name = f"stab_crop_{x0}_{y0}_{w}_{h}.gpdm"
        write_gpdm(HERE / name, w, h, [3.0] * (w * h))
        paths[key] = name if focal is None else {"path": name, "focal_px": focal}
    jsonl(HERE / "stability_files.jsonl", [{"image_id": "wall", "width": 48, "height": 36, "eye_px": [10, 10],
                                           "gaze_px": [20, 15], "focal_px": 60.0, "depth_paths": paths}])


# ---------------------------------------------------------------- losses
def gauss(peak, size, sigma):
    return [math.exp(-((x - peak[0]) ** 2 + (y - peak[1]) ** 2) / (2 * sigma * sigma))
            for y in range(size) for x in range(size)]


def losses_fixtures():
    size, sigma = 4, 1.0
    rng = random.Random(11)
    rows, expected = [], []
    specs = [
        ("r0", [0, 0, 1], [0, 0, 1], [0.375, 0.625], 0.9, 1),
        ("r1", [0.6, 0, 0.8], [0, 0.6, 0.8], [0.125, 0.125], 0.2, 0),
        ("r2", [1, 0, 0], None, None, 0.5, 1),
        ("r3", [0, 0, -1], [0, 0, 1], [1.0, 0.0], 1.0, 1),
    ]
    for rid, gp, ggt, pt, op, ogt in specs:
        pred = [rng.randrange(0, 1024) / 1024 for _ in range(size * size)]
        rows.append({"id": rid, "g_p": gp, "g_gt": ggt,
                     "pred_heatmap": {"width": size, "height": size, "values": pred},
                     "gt_point": pt, "o_p": op, "o_gt": ogt})
        l_hm = 0.0
        if pt is not None:
            peak = [min(max(pt[0] * size - 0.5, 0), size - 1), min(max(pt[1] * size - 0.5, 0), size - 1)]
            gt = gauss(peak, size, sigma)
            l_hm = sum((a - b) ** 2 for a, b in zip(pred, gt)) / len(gt)
        l_dir = 0.0 if ggt is None else 1.0 - sum(a * b for a, b in zip(gp, ggt))
        p = min(max(op, 1e-7), 1 - 1e-7)
        l_io = -(ogt * math.log(p) + (1 - ogt) * math.log(1 - p))
        expected.append({"id": rid, "l_hm": l_hm, "l_dir": l_dir, "l_io": l_io,
                         "total": 100 * l_hm + 0.1 * l_dir + 1 * l_io})
    jsonl(HERE / "losses.jsonl", rows)
    (HERE / "losses_expected.json").write_text(json.dumps({"hm_size": size, "gt_sigma": sigma, "rows": expected},
                                                          indent=1) + "\n")
    (HERE / "losses_config.ini").write_text("[losses]\nlambda-hm=0\nhm-size=4\ngt-sigma=1\n")


if __name__ == "__main__":
    unproject_fixtures()
    scene_fixtures()
    eval_fixtures()
    stats_fixtures()
    stability_fixtures()
    losses_fixtures()
