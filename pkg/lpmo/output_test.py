from __future__ import print_function, division

import json

import numpy as np

from pytest                 import raises

from . output import columns
from . output import make_table
from . output import Writer
from . output import Reader
from . verify import CheckReport
from . verify import rejudge


def report(name="tail_0", check="tail", ratios=(1., 1.2), bound=1.5):
    rows = [("r=%g" % (k + 1), k + 1., "t", 1., ratio, np.nan, ratio, True)
            for k, ratio in enumerate(ratios)]
    meta = {"check": check, "name": name, "tolerances": {"stability": bound},
            "parameters": {"dim": 2, "lam": None}, "error": None}
    return CheckReport(name, check, make_table(check, rows, meta), 0.5)


def test_make_table():
    table = make_table("aq", [("q=2", 2., "q", 2., 3., np.nan, 3., True)])
    assert table.colnames == list(columns)
    assert table["check"][0] == "aq"
    assert len(make_table("aq", [])) == 0


def test_round_trip_keeps_pass_flag(tmp_path):
    writer = Writer(str(tmp_path))
    passing, failing = report(), report("tail_1", ratios=(1., 2.))
    assert passing.passed and not failing.passed
    for item in (passing, failing):
        writer.write(item)
    reader = Reader(str(tmp_path))
    assert sorted(reader.tables) == ["tail_0", "tail_1"]
    for item in (passing, failing):
        table = reader.tables[item.name]
        assert table.meta["tolerances"] == {"stability": 1.5}
        metrics, passed = rejudge(table)
        assert passed == item.passed
        assert metrics["stability"] == item.metrics["stability"]


def test_decay_reports_get_dat_files(tmp_path):
    rows = [("dipole", f, "distance", f, f**-2.5, np.nan, 1., True) for f in (64., 128.)]
    meta = {"check": "decay_area", "tolerances": {}, "error": None}
    item = CheckReport("decay", "decay_area", make_table("decay_area", rows, meta), 0.)
    Writer(str(tmp_path)).write(item)
    lines = (tmp_path / "decay.dat").read_text().splitlines()
    assert lines[0] == "# dipole"
    assert len(lines[1].split()) == 2
    Writer(str(tmp_path / "nodat"), no_dat=True).write(item)
    assert not (tmp_path / "nodat" / "decay.dat").exists()


def test_no_clobber(tmp_path):
    writer = Writer(str(tmp_path), output_no_clobber=True)
    writer.write(report())
    with raises(RuntimeError):
        writer.write(report())


def test_summary(tmp_path):
    writer = Writer(str(tmp_path))
    summary = writer.finalize([report(), report("tail_1", ratios=(1., 2.))], interrupted=True)
    assert summary["failed"] == ["tail_1"]
    with open(str(tmp_path / "summary.json")) as f:
        saved = json.load(f)
    assert saved["interrupted"] is True
    assert saved["passed"] is False
    assert Reader(str(tmp_path)).summary() == saved


def test_missing_input_dir(tmp_path):
    with raises(RuntimeError):
        Reader(str(tmp_path / "missing"))
