"""Download the UCI Combined Cycle Power Plant data and save it as CSV.

The archive ships the data as an .xlsx workbook.  Its first sheet is read
with the standard library (an .xlsx file is a zip of XML parts), so no
spreadsheet package is needed.  The result has the header AT,V,AP,RH,PE.

    python scripts/fetch_ccpp.py --out data/ccpp.csv
"""

import argparse
import csv
import io
import re
import sys
import urllib.request
import xml.etree.ElementTree as ET
import zipfile
from pathlib import Path

URL = "https://archive.ics.uci.edu/static/public/294/combined+cycle+power+plant.zip"
NS = {"s": "http://schemas.openxmlformats.org/spreadsheetml/2006/main"}


def _column_index(ref: str) -> int:
    letters = re.match(r"[A-Z]+", ref).group(0)
    idx = 0
    for ch in letters:
        idx = idx * 26 + ord(ch) - 64
    return idx - 1


def read_first_sheet(xlsx_bytes: bytes) -> list[list[str]]:
    with zipfile.ZipFile(io.BytesIO(xlsx_bytes)) as z:
        shared = []
        if "xl/sharedStrings.xml" in z.namelist():
            root = ET.fromstring(z.read("xl/sharedStrings.xml"))
            shared = ["".join(t.text or "" for t in si.iter(f"{{{NS['s']}}}t")) for si in root.findall("s:si", NS)]
        sheet = ET.fromstring(z.read("xl/worksheets/sheet1.xml"))
    rows = []
    for row in sheet.iter(f"{{{NS['s']}}}row"):
        cells = {}
        for c in row.findall("s:c", NS):
            v = c.find("s:v", NS)
            if v is None:
                continue
            text = shared[int(v.text)] if c.get("t") == "s" else v.text
            cells[_column_index(c.get("r"))] = text
        if cells:
            rows.append([cells.get(i, "") for i in range(max(cells) + 1)])
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description="fetch the CCPP data as CSV")
    p.add_argument("--out", default="data/ccpp.csv")
    p.add_argument("--url", default=URL)
    args = p.parse_args(argv)

    with urllib.request.urlopen(args.url, timeout=60) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    name = next((n for n in archive.namelist() if n.lower().endswith(".xlsx")), None)
    if name is None:
        sys.exit("no .xlsx workbook in the downloaded archive")
    rows = read_first_sheet(archive.read(name))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)
    print(f"wrote {len(rows) - 1} data rows to {out}")


if __name__ == "__main__":
    main()
