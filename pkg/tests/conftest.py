import csv
import math
from importlib.resources import files

import pytest

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def config_path(name: str) -> str:
    return str(files("bowenkit").joinpath("configs", name))


def read_results(path):
    """results.csv as (header list, list of row dicts)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    hdr = [h.strip() for h in rows[0]]
    out = []
    for raw in rows[1:]:
        out.append({h: v.strip() for h, v in zip(hdr, raw)})
    return hdr, out


def row_flags(row):
    return [f for f in row["flags"].split(";") if f]


def flag_value(row, key):
    for f in row_flags(row):
        if f.startswith(key + "="):
            return f.split("=", 1)[1]
    raise KeyError(f"{key} not in {row['flags']!r}")


@pytest.fixture
def outdir(tmp_path):
    return tmp_path / "run"
