#!/usr/bin/env python3
"""Convert a STAR-QA split (STAR_val.json) to the glt dataset schema.

STAR questions refer to a [start, end] window of a Charades video. With
--clip-ids each question points at a pre-cut clip named
<video_id>_<start>_<end> instead of the full video.
"""

import argparse
import json
import sys
from pathlib import Path

CATEGORIES = {"Interaction": "Int.", "Sequence": "Seq.", "Prediction": "Pre.", "Feasibility": "Fea."}


def clip_id(q):
    return f"{q['video_id']}_{float(q['start']):.2f}_{float(q['end']):.2f}"


def convert(questions, name, video_root=None, clip_ids=False, limit_videos=None):
    items, videos, seen = [], {}, []
    for q in questions:
        qid = q["question_id"]
        prefix = qid.split("_", 1)[0]
        if prefix not in CATEGORIES:
            raise ValueError(f"{qid}: unknown question family {prefix!r}")
        vid = clip_id(q) if clip_ids else q["video_id"]
        if vid not in seen:
            if limit_videos is not None and len(seen) >= limit_videos:
                continue
            seen.append(vid)
        choices = sorted(q["choices"], key=lambda c: int(c["choice_id"]))
        options = [c["choice"].strip() for c in choices]
        answer = q["answer"].strip()
        if options.count(answer) != 1:
            raise ValueError(f"{qid}: answer does not match exactly one choice")
        items.append({
            "question_id": qid,
            "video_id": vid,
            "category": CATEGORIES[prefix],
            "question": q["question"].strip(),
            "options": options,
            "gold_index": options.index(answer),
        })
        if video_root is not None:
            videos[vid] = str(Path(video_root) / f"{vid}.mp4")
    out = {"name": name, "items": items}
    if videos:
        out["videos"] = videos
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("json", type=Path)
    ap.add_argument("-o", "--out", type=Path, required=True)
    ap.add_argument("--name", default="STAR-QA")
    ap.add_argument("--video-root", type=Path, help="directory holding the .mp4 files")
    ap.add_argument("--clip-ids", action="store_true", help="address pre-cut question windows")
    ap.add_argument("--limit-videos", type=int, help="keep only the first N videos")
    args = ap.parse_args(argv)

    questions = json.loads(args.json.read_text(encoding="utf-8"))
    try:
        ds = convert(questions, args.name, args.video_root, args.clip_ids, args.limit_videos)
    except (ValueError, KeyError) as e:
        print(f"error: {args.json}: {e}", file=sys.stderr)
        return 2
    args.out.write_text(json.dumps(ds, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {len(ds['items'])} questions to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
