import json
import math
import random

import numpy as np
import pytest

from rankverify import ParseError, verify_winner
from rankverify.data_io import (
    AnalysisReport,
    fingerprint,
    format_text,
    ingest,
    ingest_raw,
    ingest_summary,
    read_rows,
    write_summary,
)

# group means and sizes from the NHANES education table; the standard
# errors are illustrative since the source does not publish them
NHANES_INCOME = """# log income by education
label,n,mean,sd
8th Grade,451,10.04,0.040
9-11th Grade,888,10.28,0.030
High School,1517,10.52,0.022
Some College,2267,10.74,0.018
College Grad,2098,11.14,0.019
"""


@pytest.fixture
def summary_file(tmp_path):
    p = tmp_path / "groups.csv"
    p.write_text(NHANES_INCOME, encoding="utf-8")
    return p


def write(tmp_path, text, name="f.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestSummary:
    def test_table(self, summary_file):
        obs = ingest_summary(summary_file)
        assert obs.d == 5
        assert obs.sorted_labels == ["College Grad", "Some College", "High School",
                                     "9-11th Grade", "8th Grade"]
        assert obs.ns == (451, 888, 1517, 2267, 2098)

    def test_empty(self, tmp_path):
        with pytest.raises(ParseError, match="no data rows"):
            ingest_summary(write(tmp_path, ""))
        with pytest.raises(ParseError, match="no data rows"):
            ingest_summary(write(tmp_path, "label,n,mean,sd\n# nothing\n"))

    def test_single_row_accepted_then_rejected_by_tests(self, tmp_path):
        obs = ingest_summary(write(tmp_path, "label,n,mean,sd\na,3,1.0,0.5\n"))
        assert obs.d == 1
        with pytest.raises(ValueError):
            verify_winner(obs)

    @pytest.mark.parametrize("body,line", [
        ("label,n,mean\na,1,2\n", 1),
        ("label,n,mean,sd\na,1,x,1\n", 2),
        ("label,n,mean,sd\na,1,2,0\n", 2),
        ("label,n,mean,sd\na,1,2,1\nb,1,2,-1\n", 3),
        ("label,n,mean,sd\na,1,2,1\na,1,3,1\n", 3),
        ("label,n,mean,sd\na,1.5,2,1\n", 2),
        ("label,n,mean,sd\na,1,2\n", 2),
    ])
    def test_row_addressed_errors(self, tmp_path, body, line):
        with pytest.raises(ParseError) as info:
            ingest_summary(write(tmp_path, body))
        assert info.value.row == line
        assert f"line {line}" in str(info.value)

    def test_round_trip(self, summary_file, tmp_path):
        obs = ingest_summary(summary_file)
        again = ingest_summary(write(tmp_path, write_summary(obs), "again.csv"))
        assert read_rows(summary_file) == read_rows(tmp_path / "again.csv")
        assert np.array_equal(again.values, obs.values)
        assert again.labels == obs.labels

    def test_column_order_free(self, tmp_path):
        obs = ingest_summary(write(tmp_path, "sd,mean,label,n\n1,2,a,3\n0.5,1,b,4\n"))
        assert obs.labels == ("a", "b")
        assert list(obs.sds) == [1.0, 0.5]


class TestRaw:
    def test_hand_computed(self, tmp_path):
        obs = ingest_raw(write(tmp_path, "label,value\nx,0\nx,2\ny,10\ny,12\n"))
        assert list(obs.values) == [1.0, 11.0]
        assert obs.sds == pytest.approx([1.0, 1.0], rel=1e-15)
        assert obs.ns == (2, 2)

    def test_constant_group(self, tmp_path):
        with pytest.raises(ValueError, match="'c'"):
            ingest_raw(write(tmp_path, "label,value\nc,1\nc,1\nd,0\nd,1\n"))

    def test_singleton_group(self, tmp_path):
        with pytest.raises(ValueError, match="'solo'"):
            ingest_raw(write(tmp_path, "label,value\nsolo,1\nd,0\nd,1\n"))

    def test_row_order_independent(self, tmp_path):
        rng = random.Random(4)
        rows = [f"{g},{rng.gauss(i, 1)!r}" for i, g in enumerate("abc") for _ in range(7)]
        a = ingest_raw(write(tmp_path, "label,value\n" + "\n".join(rows), "a.csv"))
        rng.shuffle(rows)
        b = ingest_raw(write(tmp_path, "label,value\n" + "\n".join(rows), "b.csv"))
        assert a.labels == b.labels
        assert np.array_equal(a.values, b.values) and np.array_equal(a.sds, b.sds)

    def test_dispatch(self, tmp_path, summary_file):
        assert ingest(write(tmp_path, "label,value\nx,0\nx,2\ny,1\ny,2\n")).d == 2
        assert ingest(summary_file).d == 5


class TestReport:
    def test_json_round_trip(self, summary_file):
        obs = ingest_summary(summary_file)
        rep = AnalysisReport("verify", verify_winner(obs, 0.1), 0.1, 7,
                             fingerprint(summary_file), {"direction": "top"})
        back = AnalysisReport.from_json(rep.to_json())
        assert back == rep
        assert json.loads(rep.to_json())["schema"] == 1

    def test_text_matches_json_to_12_digits(self, summary_file):
        obs = ingest_summary(summary_file)
        rep = AnalysisReport("verify", verify_winner(obs, 0.1), 0.1)
        text = dict(line.split(": ", 1) for line in format_text(rep).splitlines())
        for i, t in enumerate(rep.results["pairwise"]):
            shown = float(text[f"results.pairwise[{i}].p_value"])
            assert shown == pytest.approx(t["p_value"], rel=5e-12)

    def test_fingerprint(self, summary_file):
        fp = fingerprint(summary_file)
        assert fp["rows"] == 5 and len(fp["sha256"]) == 64

    def test_unknown_schema(self):
        with pytest.raises(ValueError):
            AnalysisReport.from_json(json.dumps({"schema": 99}))
