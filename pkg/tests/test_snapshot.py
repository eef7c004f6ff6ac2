import math
import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from miso import corpus
from miso.core import init_world
from miso.errors import SnapshotError
from miso.frontend import compile_source
from miso.host.snapshot import (
    dump_snapshot, format_float, load_snapshot, parse_float, snapshot_text,
)
from miso.sched import run_sequential

from conftest import LISTING1, compile_corpus


def test_float_formats():
    assert format_float(0.5) == "0x1p-1"
    assert format_float(1.0) == "0x1p+0"
    assert format_float(-0.0) == "-0x0p+0"
    assert format_float(math.inf) == "inf"
    assert format_float(-math.inf) == "-inf"
    assert format_float(0.1) == "0x1.999999999999ap-4"


def test_nan_payload_survives():
    pattern = 0x7FF8_0000_0000_1234
    x = struct.unpack("<d", struct.pack("<Q", pattern))[0]
    text = format_float(x)
    assert text == "nan:0x7ff8000000001234"
    assert struct.unpack("<Q", struct.pack("<d", parse_float(text)))[0] == pattern


@given(st.floats())
def test_float_text_round_trip(x):
    y = parse_float(format_float(x))
    assert struct.pack("<d", x) == struct.pack("<d", y)


def test_int_rows():
    p = compile_source("cell A { var v:Int = this.pos - 4; } a = new A(2)")
    text = snapshot_text(init_world(p))
    assert text.splitlines()[3:] == ["0,a,0,v,-4", "0,a,1,v,-3"]


def test_rows_are_sorted():
    p = compile_source("cell A { var z:Int = 1; var b:Float = 0.5; } y = new A(2) x = new A(1)")
    rows = [l.split(",")[1:4] for l in snapshot_text(init_world(p)).splitlines()[3:]]
    assert rows == [["x", "0", "b"], ["x", "0", "z"], ["y", "0", "b"], ["y", "0", "z"],
                    ["y", "1", "b"], ["y", "1", "z"]]


def test_load_single_row(tmp_path):
    p = compile_source(LISTING1)
    f = tmp_path / "in.csv"
    f.write_text("step,array,index,field,value\n0,image2,7,r,100\n")
    w = load_snapshot(init_world(p), f)
    assert w["image2"].committed["r"][7] == 100
    assert w["image2"].committed["r"].sum() == 100


def test_empty_snapshot_changes_nothing(tmp_path):
    p = compile_corpus("mimd")
    f = tmp_path / "in.csv"
    f.write_text("step,array,index,field,value\n")
    assert load_snapshot(init_world(p), f).checksum() == init_world(p).checksum()


@pytest.mark.parametrize("row, lineno", [
    ("0,image2,99999,r,1", 2),
    ("0,image3,0,r,1", 2),
    ("0,image2,0,q,1", 2),
    ("0,image2,0,r,1.5", 2),
    ("0,image2,0,r,99999999999999999999", 2),
    ("0,image2,0,r", 2),
])
def test_bad_rows_report_line(tmp_path, row, lineno):
    p = compile_source(LISTING1)
    f = tmp_path / "in.csv"
    f.write_text(f"step,array,index,field,value\n{row}\n")
    with pytest.raises(SnapshotError) as info:
        load_snapshot(init_world(p), f)
    assert info.value.row == lineno


def test_float_row_rejects_plain_nan(tmp_path):
    p = compile_corpus("identity")
    f = tmp_path / "in.csv"
    f.write_text("0,one,0,w,nan\n")
    with pytest.raises(SnapshotError):
        load_snapshot(init_world(p), f)


@pytest.mark.parametrize("name", [n for n in corpus.names() if n != "listing1"])
def test_dump_load_dump_is_byte_identical(tmp_path, name):
    p = compile_corpus(name)
    w = run_sequential(p, init_world(p), 7)
    first = dump_snapshot(w, tmp_path / "a")
    loaded = load_snapshot(init_world(p), first)
    for a in p.array_names:
        loaded.sigma[a] = w.sigma[a]
    second = dump_snapshot(loaded, tmp_path / "b")
    assert open(first, "rb").read() == open(second, "rb").read()


def test_special_values_round_trip(tmp_path):
    p = compile_source("cell S { var f:Float = 0.0; var i:Int = 0; } s = new S(6)")
    w = init_world(p)
    w["s"].committed["f"][:] = [-0.0, math.inf, -math.inf, 0.1, 5e-324, 0.0]
    w["s"].committed["f"].view(np.uint64)[5] = 0xFFF0_0000_DEAD_BEEF
    w["s"].committed["i"][:] = [-(1 << 63), (1 << 63) - 1, -3, 0, 1, -1]
    first = dump_snapshot(w, tmp_path / "a", step=0)
    second = dump_snapshot(load_snapshot(init_world(p), first), tmp_path / "b", step=0)
    assert open(first).read() == open(second).read()
    assert "nan:0xfff00000deadbeef" in open(first).read()
