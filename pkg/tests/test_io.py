import math
import struct

import numpy as np
import pytest

from ssmcascade.io import (
    CSV_HEADER,
    FormatError,
    ResultRow,
    export_csv,
    load_model,
    read_csv_matrix,
    read_matrix,
    read_results_csv,
    save_model,
    write_matrix,
)
from ssmcascade.linalg import SignalBlock
from ssmcascade.lti import hippo_matrix


def test_roundtrip_scalar(tmp_path):
    path = tmp_path / "a.clti"
    write_matrix(path, [[-2.0]])
    assert read_matrix(path).tolist() == [[-2.0]]


def test_roundtrip_hippo_bit_exact(tmp_path):
    a = hippo_matrix(100)
    path = tmp_path / "h.clti"
    write_matrix(path, a)
    b = read_matrix(path)
    assert b.tobytes() == a.tobytes()


def test_roundtrip_signal_block(tmp_path, rng):
    block = SignalBlock(rng.standard_normal((3, 17)))
    path = tmp_path / "u.clti"
    write_matrix(path, block)
    back = read_matrix(path)
    assert isinstance(back, SignalBlock)
    assert back.data.tobytes() == block.data.tobytes()


def test_byte_layout(tmp_path):
    path = tmp_path / "m.clti"
    write_matrix(path, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    raw = path.read_bytes()
    assert raw[:4] == b"CLTI"
    assert struct.unpack("<I", raw[4:8]) == (1,)
    assert raw[8] == 0
    assert struct.unpack("<QQ", raw[9:25]) == (3, 2)
    assert struct.unpack("<6d", raw[25:]) == (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    assert len(raw) == 25 + 6 * 8


def test_identical_bytes_for_identical_input(tmp_path):
    a = hippo_matrix(10)
    write_matrix(tmp_path / "1.clti", a)
    write_matrix(tmp_path / "2.clti", a.copy())
    assert (tmp_path / "1.clti").read_bytes() == (tmp_path / "2.clti").read_bytes()


def _corrupt(tmp_path, offset, data):
    path = tmp_path / "c.clti"
    write_matrix(path, np.eye(2))
    raw = bytearray(path.read_bytes())
    raw[offset:offset + len(data)] = data
    path.write_bytes(bytes(raw))
    return path


def test_bad_magic(tmp_path):
    with pytest.raises(FormatError, match="bad magic"):
        read_matrix(_corrupt(tmp_path, 0, b"XLTI"))


def test_bad_version(tmp_path):
    with pytest.raises(FormatError, match="version"):
        read_matrix(_corrupt(tmp_path, 4, struct.pack("<I", 2)))


def test_bad_kind(tmp_path):
    with pytest.raises(FormatError, match="kind"):
        read_matrix(_corrupt(tmp_path, 8, b"\x07"))


def test_truncated(tmp_path):
    path = tmp_path / "t.clti"
    write_matrix(path, np.eye(3))
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(FormatError, match="truncated payload"):
        read_matrix(path)
    path.write_bytes(b"CLTI")
    with pytest.raises(FormatError, match="truncated header"):
        read_matrix(path)


def test_csv_matrix(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("1, 2\n3,4.5\n")
    assert read_csv_matrix(path).tolist() == [[1.0, 2.0], [3.0, 4.5]]
    path.write_text("1,2\n3\n")
    with pytest.raises(FormatError):
        read_csv_matrix(path)


def test_export_empty(tmp_path):
    path = tmp_path / "r.csv"
    export_csv([], path)
    assert path.read_bytes() == (",".join(CSV_HEADER) + "\r\n").encode()


def test_export_one_row(tmp_path):
    path = tmp_path / "r.csv"
    export_csv([ResultRow("cascade", 100, 1, 1, 4096, 15, 1e-12, 45057, 123, 0.1)], path)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0] == "method,m,p,q,L,stages,tol,matvec_count,wall_ns,rel_l2_err"
    assert lines[1] == "cascade,100,1,1,4096,15,9.9999999999999998e-13,45057,123,0.10000000000000001"


def test_export_parse_back(tmp_path, rng):
    rows = [
        ResultRow("cascade", 8, 2, 3, 64, 6, float(rng.uniform()), 321, 999, float(rng.uniform()) * 1e-15),
        ResultRow("recurrence", 8, 2, 3, 64, 0, None, 64, 1000, None),
        ResultRow("cascade-plr", 8, 2, 3, 64, 6, math.pi, 321, 5, 1 / 3),
    ]
    path = tmp_path / "r.csv"
    export_csv(rows, path)
    assert read_results_csv(path) == rows


def test_model_roundtrip(tmp_path, hippo):
    save_model(tmp_path / "model", hippo)
    back = load_model(tmp_path / "model")
    for name in ("Abar", "Bbar", "C", "D"):
        assert getattr(back, name).tobytes() == getattr(hippo, name).tobytes()
    assert back.delta == hippo.delta and back.scheme == "bilinear"


def test_model_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_model(tmp_path / "nope")
