"""Text snapshots of world state with bit-exact Float encoding.

Format::

    # miso-snapshot 1
    # program <sha256 of source>
    step,array,index,field,value
    0,image2,7,r,100

Int values are decimal; Float values are hexadecimal floating literals
(``0x1p-1``), ``inf``/``-inf``, or ``nan:0x<16 hex digits>`` carrying the
exact NaN bit pattern.
"""
from __future__ import annotations

import logging
import os
import struct

from miso.core.values import FLOAT, INT, INT_MAX, INT_MIN
from miso.core.world import WorldState
from miso.errors import SnapshotError

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER = "step,array,index,field,value"


def format_float(x: float) -> str:
    if x != x:
        (pattern,) = struct.unpack("<Q", struct.pack("<d", x))
        return f"nan:0x{pattern:016x}"
    if x in (float("inf"), float("-inf")):
        return "inf" if x > 0 else "-inf"
    text = float.hex(x)
    mantissa, exponent = text.split("p")
    if "." in mantissa:
        mantissa = mantissa.rstrip("0").rstrip(".")
    return f"{mantissa}p{exponent}"


def parse_float(text: str) -> float:
    if text.startswith("nan:"):
        pattern = int(text[4:], 16)
        if pattern >> 64:
            raise ValueError(text)
        value = struct.unpack("<d", struct.pack("<Q", pattern))[0]
        if value == value:
            raise ValueError(f"{text} is not a NaN pattern")
        return value
    if text.lower().lstrip("+-").startswith("0x"):
        return float.fromhex(text)
    if text.lower().lstrip("+-") in ("nan",):
        raise ValueError("NaN must carry its bit pattern (nan:0x...)")
    return float(text)


def parse_int(text: str) -> int:
    if not text.lstrip("-").isdigit():
        raise ValueError(f"{text!r} is not a decimal integer")
    value = int(text)
    if not INT_MIN <= value <= INT_MAX:
        raise ValueError(f"{text} does not fit in 64 bits")
    return value


def format_value(value, ty: str) -> str:
    return str(int(value)) if ty == INT else format_float(float(value))


def snapshot_text(world: WorldState) -> str:
    return columns_text(world.program, {
        name: (world.sigma[name], arr.committed) for name, arr in world.arrays.items()})


def columns_text(program, entries: dict) -> str:
    """Render ``{array: (step, {field: column})}`` in snapshot format."""
    rows = []
    for name in sorted(entries):
        step, columns = entries[name]
        cell = program.cell_of(name)
        fields = sorted(cell.fields, key=lambda f: f.name)
        cols = [(f.name, f.ty, columns[f.name].tolist()) for f in fields]
        for i in range(program.array(name).size):
            for fname, ty, col in cols:
                rows.append(f"{step},{name},{i},{fname},{format_value(col[i], ty)}")
    header = [f"# miso-snapshot {FORMAT_VERSION}",
              f"# program {program.source_hash}", HEADER]
    return "\n".join(header + rows) + "\n"


def write_text(directory, step: int, text: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"step_{step}.csv")
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def dump_snapshot(world: WorldState, directory, step: int | None = None) -> str:
    """Write ``<directory>/step_<step>.csv``; returns the path."""
    if step is None:
        step = max(world.sigma.values(), default=0)
    return write_text(directory, step, snapshot_text(world))


def load_snapshot(world: WorldState, path) -> WorldState:
    """Overwrite bank-0 values listed in the file; other cells keep their init."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts[:1] == ["program"] and len(parts) == 2:
                if parts[1] != world.program.source_hash:
                    log.warning("snapshot %s was written by a different program", path)
            elif parts[:1] == ["miso-snapshot"] and parts[1:] != [str(FORMAT_VERSION)]:
                raise SnapshotError(f"unsupported snapshot version {parts[1:]}", lineno)
            continue
        if line == HEADER:
            continue
        _apply_row(world, line, lineno)
    return world


def _apply_row(world: WorldState, line: str, lineno: int) -> None:
    cells = line.split(",")
    if len(cells) != 5:
        raise SnapshotError(f"expected 5 columns, got {len(cells)}", lineno)
    _step, array, index, fname, text = cells
    if array not in world.arrays:
        raise SnapshotError(f"unknown array {array!r}", lineno)
    arr = world[array]
    ty = arr.cell.field_type(fname)
    if ty is None:
        raise SnapshotError(f"array {array!r} has no field {fname!r}", lineno)
    try:
        i = int(index)
    except ValueError:
        raise SnapshotError(f"bad index {index!r}", lineno) from None
    if not 0 <= i < arr.size:
        raise SnapshotError(f"index {i} out of range for {array!r} of size {arr.size}", lineno)
    try:
        value = parse_int(text) if ty == INT else parse_float(text)
    except ValueError as exc:
        raise SnapshotError(f"bad {ty} value {text!r}: {exc}", lineno) from None
    arr.banks[0][fname][i] = value
    if ty == FLOAT:
        # numpy may canonicalise a NaN on assignment; store the raw pattern
        arr.banks[0][fname].view("u8")[i] = struct.unpack("<Q", struct.pack("<d", value))[0]
