import csv
import io
import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "tools" / "adapters"))

import nextqa_to_glt  # noqa: E402
import star_to_glt  # noqa: E402

NEXT_CSV = """video,frame_count,width,height,question,answer,qid,type,a0,a1,a2,a3,a4
4010069381,369,640,480,how do the two man play the instrument,0,6,CH,roll the handle,tap their feet,strum the string,hit with sticks,pat with hand
4010069381,369,640,480,what did the boy do after he fell,2,7,TN,cry,run,stand up,sit,sleep
2440175990,1176,640,360,where is this video taken,4,1,DL,park,beach,road,room,field
"""

STAR = [
    {"question_id": "Interaction_T1_13", "question": "Which object was tidied up by the person?", "video_id": "6H78U",
     "start": 11.1, "end": 19.6, "answer": "The closet/cabinet.",
     "choices": [{"choice_id": 1, "choice": "The blanket."}, {"choice_id": 0, "choice": "The closet/cabinet."},
                 {"choice_id": 2, "choice": "The clothes."}, {"choice_id": 3, "choice": "The table."}]},
    {"question_id": "Feasibility_T5_2", "question": "What is the person able to do after taking the dish?",
     "video_id": "RNLTR", "start": 0.0, "end": 8.25, "answer": "Wash the dish.",
     "choices": [{"choice_id": 0, "choice": "Wash the dish."}, {"choice_id": 1, "choice": "Eat."},
                 {"choice_id": 2, "choice": "Sit."}, {"choice_id": 3, "choice": "Run."}]},
]


def test_nextqa_convert():
    ds = nextqa_to_glt.convert(csv.DictReader(io.StringIO(NEXT_CSV)), "NExT-QA", video_root="/v")
    assert ds["name"] == "NExT-QA"
    assert [i["question_id"] for i in ds["items"]] == ["4010069381_6", "4010069381_7", "2440175990_1"]
    assert [i["category"] for i in ds["items"]] == ["Cas.", "Tem.", "Des."]
    assert ds["items"][0]["options"][2] == "strum the string"
    assert ds["items"][2]["gold_index"] == 4
    assert ds["items"][1]["question"].endswith("?")
    assert ds["videos"]["2440175990"] == "/v/2440175990.mp4"


def test_nextqa_limit_and_map():
    rows = csv.DictReader(io.StringIO(NEXT_CSV))
    ds = nextqa_to_glt.convert(rows, "n", video_root="/v", vid_map={"4010069381": "1010/4010069381"}, limit_videos=1)
    assert len(ds["items"]) == 2
    assert ds["videos"] == {"4010069381": "/v/1010/4010069381.mp4"}


def test_nextqa_rejects_bad_rows():
    bad = NEXT_CSV.replace(",CH,", ",XX,")
    with pytest.raises(ValueError, match="unknown question type"):
        nextqa_to_glt.convert(csv.DictReader(io.StringIO(bad)), "n")


def test_star_convert():
    ds = star_to_glt.convert(STAR, "STAR-QA")
    first, second = ds["items"]
    assert first["options"][0] == "The closet/cabinet."  # ordered by choice_id
    assert first["gold_index"] == 0
    assert first["category"] == "Int."
    assert second["category"] == "Fea."
    assert "videos" not in ds


def test_star_clip_ids():
    ds = star_to_glt.convert(STAR, "s", video_root="/clips", clip_ids=True)
    assert ds["items"][0]["video_id"] == "6H78U_11.10_19.60"
    assert ds["videos"]["RNLTR_0.00_8.25"] == "/clips/RNLTR_0.00_8.25.mp4"


def test_star_answer_must_match():
    broken = json.loads(json.dumps(STAR))
    broken[0]["answer"] = "Nothing."
    with pytest.raises(ValueError, match="answer"):
        star_to_glt.convert(broken, "s")


def test_cli_round_trip(tmp_path):
    src = tmp_path / "val.csv"
    src.write_text(NEXT_CSV)
    out = tmp_path / "ds.json"
    assert nextqa_to_glt.main([str(src), "-o", str(out)]) == 0
    assert len(json.loads(out.read_text())["items"]) == 3
