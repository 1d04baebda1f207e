#!/usr/bin/env python3
"""Convert raw JIGSAWS and COMPASS releases into the mpscope dataset layout.

Produces:

    <out>/<Task>/gestures/<subject>_<trial>.txt          "start end G<k>" per line
    <out>/<Task>/motion_primitives/<subject>_<trial>.txt "start end Verb(Actor, Object)"
    <out>/meta.csv                                       trial metadata + GRS scores

Assumptions about the raw releases (best effort; adjust flags or edit this
script if a release differs):

* JIGSAWS task folders are named Suturing, Needle_Passing, Knot_Tying, each
  holding transcriptions/<Task>_<S><NNN>.txt with "start end G<k>" lines and a
  meta_file_<Task>.txt whose columns are: trial name, self-proclaimed skill
  (N/I/E), GRS total, then the six element scores (respect for tissue,
  suture/needle handling, time and motion, flow of operation, overall
  performance, quality of final product).
* COMPASS motion primitive transcripts live under a per-task folder (the
  script searches a few common layouts) with lines starting
  "start end Verb(Actor, Object)"; trailing context columns are ignored.
* Both datasets index the same videos at 30 fps and use inclusive frame
  intervals.

Only trials present in all three sources (gesture transcript, MP transcript,
metadata row) are emitted; everything else is reported on stderr.
"""

import argparse
import csv
import re
import sys
from pathlib import Path

TASKS = {
    "Suturing": "Suturing",
    "Needle_Passing": "NeedlePassing",
    "Knot_Tying": "KnotTying",
}

SKILLS = {"N": "Novice", "I": "Intermediate", "E": "Expert"}

SUBSCORE_KEYS = [
    "respect_for_tissue",
    "suture_needle_handling",
    "time_and_motion",
    "flow_of_operation",
    "overall_performance",
    "quality_of_final_product",
]

TRIAL_RE = re.compile(r"^(?:[A-Za-z_]+_)?([A-Za-z])0*(\d+)(?:\.txt)?$")
MP_RE = re.compile(r"^(\d+)\s+(\d+)\s+([A-Za-z]+\s*\([^)]*\))")
GESTURE_RE = re.compile(r"^(\d+)\s+(\d+)\s+(G\d+)\b")


def parse_trial_stem(stem: str):
    """'Suturing_B001' or 'B001' -> ('B', 1); None when unrecognized."""
    m = TRIAL_RE.match(stem)
    if not m:
        return None
    return m.group(1).upper(), int(m.group(2))


def normalize_mp(label: str) -> str:
    """'Grasp(L,Needle)' -> 'Grasp(L, Needle)'."""
    label = re.sub(r"\s+", " ", label.strip())
    label = re.sub(r"\(\s*", "(", label)
    label = re.sub(r"\s*,\s*", ", ", label)
    label = re.sub(r"\s*\)", ")", label)
    return label


def read_gesture_transcript(path: Path):
    lines = []
    for raw in path.read_text().splitlines():
        raw = raw.strip()
        if not raw:
            continue
        m = GESTURE_RE.match(raw)
        if not m:
            raise ValueError(f"{path}: unrecognized gesture line: {raw!r}")
        lines.append(f"{m.group(1)} {m.group(2)} {m.group(3)}")
    return lines


def read_mp_transcript(path: Path):
    lines = []
    for raw in path.read_text().splitlines():
        raw = raw.strip()
        if not raw:
            continue
        m = MP_RE.match(raw)
        if not m:
            raise ValueError(f"{path}: unrecognized MP line: {raw!r}")
        lines.append(f"{m.group(1)} {m.group(2)} {normalize_mp(m.group(3))}")
    return lines


def read_meta_file(path: Path):
    """meta_file_<Task>.txt -> {(subject, trial): row dict}."""
    rows = {}
    for raw in path.read_text().splitlines():
        parts = raw.split()
        if len(parts) < 9:
            continue
        key = parse_trial_stem(parts[0])
        if key is None:
            print(f"warning: {path}: cannot parse trial name {parts[0]!r}", file=sys.stderr)
            continue
        skill = SKILLS.get(parts[1].upper())
        if skill is None:
            print(f"warning: {path}: unknown skill {parts[1]!r} for {parts[0]}", file=sys.stderr)
            continue
        rows[key] = {
            "skill": skill,
            "grs_total": parts[2],
            "subscores": parts[3:9],
        }
    return rows


def find_task_dir(root: Path, task: str) -> Path | None:
    for cand in (root / task, root / task.replace("_", ""), root / "Datasets" / "dV" / task):
        if cand.is_dir():
            return cand
    hits = [p for p in root.rglob(task) if p.is_dir()]
    return hits[0] if hits else None


def collect_transcripts(task_dir: Path, subdirs, reader):
    """Maps (subject, trial) -> parsed lines from the first matching layout."""
    out = {}
    search = [task_dir / s for s in subdirs if (task_dir / s).is_dir()] or [task_dir]
    for folder in search:
        for path in sorted(folder.glob("*.txt")):
            key = parse_trial_stem(path.stem)
            if key is None or key in out:
                continue
            try:
                out[key] = reader(path)
            except ValueError as e:
                print(f"warning: skipping {path.name}: {e}", file=sys.stderr)
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--jigsaws", required=True, type=Path, help="JIGSAWS release root")
    ap.add_argument("--compass", required=True, type=Path, help="COMPASS release root")
    ap.add_argument("--out", required=True, type=Path, help="dataset root to write")
    ap.add_argument("--fps", type=float, default=30.0, help="frames per second (default 30)")
    args = ap.parse_args()

    meta_rows = []
    emitted = 0
    for raw_task, task in TASKS.items():
        jig_dir = find_task_dir(args.jigsaws, raw_task)
        if jig_dir is None:
            print(f"warning: JIGSAWS task folder not found for {raw_task}", file=sys.stderr)
            continue
        comp_dir = find_task_dir(args.compass, raw_task) or jig_dir

        gestures = collect_transcripts(jig_dir, ["transcriptions"], read_gesture_transcript)
        mps = collect_transcripts(
            comp_dir, ["motion_primitives", "motion_primitives_baseline", "transcripts"],
            read_mp_transcript)

        meta_path = next(iter(jig_dir.glob("meta_file_*.txt")), None)
        meta = read_meta_file(meta_path) if meta_path else {}
        if not meta:
            print(f"warning: no metadata found under {jig_dir}", file=sys.stderr)

        for key in sorted(gestures):
            missing = [name for name, src in (("MP transcript", mps), ("metadata", meta))
                       if key not in src]
            if missing:
                print(f"warning: {task} {key[0]}_{key[1]}: missing {', '.join(missing)}",
                      file=sys.stderr)
                continue
            subject, trial = key
            stem = f"{subject}_{trial}.txt"
            gdir = args.out / task / "gestures"
            mdir = args.out / task / "motion_primitives"
            gdir.mkdir(parents=True, exist_ok=True)
            mdir.mkdir(parents=True, exist_ok=True)
            (gdir / stem).write_text("\n".join(gestures[key]) + "\n")
            (mdir / stem).write_text("\n".join(mps[key]) + "\n")
            row = meta[key]
            meta_rows.append([task, subject, trial, row["skill"], row["grs_total"],
                              *row["subscores"], args.fps])
            emitted += 1

    if not meta_rows:
        print("error: no complete trials found; nothing written", file=sys.stderr)
        return 1

    args.out.mkdir(parents=True, exist_ok=True)
    with (args.out / "meta.csv").open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["task", "subject", "trial", "skill", "grs_total",
                         *SUBSCORE_KEYS, "fps"])
        writer.writerows(meta_rows)
    print(f"wrote {emitted} trial(s) to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
