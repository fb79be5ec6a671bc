"""
From a CSV file to a report
===========================

Group summaries usually arrive as a table. ``sd`` must be the standard
error of each group mean, i.e. the sample standard deviation divided by
``sqrt(n)``. The same analysis is available from the shell as
``rankverify rank --input groups.csv``.
"""

import json
import tempfile
from pathlib import Path

from rankverify import AnalysisReport, ingest_summary, rank_top
from rankverify.cli import main
from rankverify.data_io import fingerprint

csv_text = """label,n,mean,sd
8th Grade,451,10.04,0.040
9-11th Grade,888,10.28,0.030
High School,1517,10.52,0.022
Some College,2267,10.74,0.018
College Grad,2098,11.14,0.019
"""
# group means and sizes follow a public survey table; the standard errors
# are made up for illustration

path = Path(tempfile.mkdtemp()) / "groups.csv"
path.write_text(csv_text)

###############################################################################
# Library route.

obs = ingest_summary(path)
res = rank_top(obs)
print("verified order:", res.verified_labels)

report = AnalysisReport("rank", res, 0.05, input=fingerprint(path))
print(report.to_json()[:300], "...")

###############################################################################
# Command-line route writes the same report.

out = path.with_suffix(".json")
main(["rank", "--input", str(path), "--output", str(out)])
print(json.loads(out.read_text())["results"]["verified_count"])
