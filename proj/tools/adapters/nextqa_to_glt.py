#!/usr/bin/env python3
"""Convert a NExT-QA multiple-choice CSV (val.csv / test.csv) to the glt dataset schema."""

import argparse
import csv
import json
import sys
from pathlib import Path

# question type code -> report column
CATEGORIES = {
    "CW": "Cas.", "CH": "Cas.",
    "TN": "Tem.", "TC": "Tem.", "TP": "Tem.",
    "DC": "Des.", "DL": "Des.", "DO": "Des.",
}
OPTION_COLUMNS = ["a0", "a1", "a2", "a3", "a4"]


def convert(rows, name, video_root=None, vid_map=None, limit_videos=None):
    items, videos, seen = [], {}, []
    for line, row in enumerate(rows, start=2):
        missing = [c for c in ["video", "qid", "type", "question", "answer", *OPTION_COLUMNS] if c not in row]
        if missing:
            raise ValueError(f"line {line}: missing column(s) {', '.join(missing)}")
        vid = row["video"].strip()
        if vid not in seen:
            if limit_videos is not None and len(seen) >= limit_videos:
                continue
            seen.append(vid)
        code = row["type"].strip()
        if code not in CATEGORIES:
            raise ValueError(f"line {line}: unknown question type {code!r}")
        gold = int(row["answer"])
        if not 0 <= gold < len(OPTION_COLUMNS):
            raise ValueError(f"line {line}: answer {gold} out of range")
        items.append({
            "question_id": f"{vid}_{row['qid'].strip()}",
            "video_id": vid,
            "category": CATEGORIES[code],
            "question": row["question"].strip().rstrip("?") + "?",
            "options": [row[c].strip() for c in OPTION_COLUMNS],
            "gold_index": gold,
        })
        if video_root is not None:
            rel = vid_map.get(vid, vid) if vid_map else vid
            videos[vid] = str(Path(video_root) / f"{rel}.mp4")
    out = {"name": name, "items": items}
    if videos:
        out["videos"] = videos
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", type=Path)
    ap.add_argument("-o", "--out", type=Path, required=True)
    ap.add_argument("--name", default="NExT-QA")
    ap.add_argument("--video-root", type=Path, help="directory holding the .mp4 files")
    ap.add_argument("--vid-map", type=Path, help="map_vid_vidorID.json (video id -> relative path)")
    ap.add_argument("--limit-videos", type=int, help="keep only the first N videos")
    args = ap.parse_args(argv)

    vid_map = json.loads(args.vid_map.read_text()) if args.vid_map else None
    with args.csv.open(newline="", encoding="utf-8") as f:
        try:
            ds = convert(csv.DictReader(f), args.name, args.video_root, vid_map, args.limit_videos)
        except ValueError as e:
            print(f"error: {args.csv}: {e}", file=sys.stderr)
            return 2
    args.out.write_text(json.dumps(ds, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {len(ds['items'])} questions to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
