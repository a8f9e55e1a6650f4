"""Container roundtrips, validation, and CSV export."""

import numpy as np
import pytest

from lpde.dataio import export_csv, read_dataset, write_dataset
from lpde.errors import (
    ContainerError,
    CorruptFileError,
    DataFormatError,
    UnsupportedVersionError,
)


class TestRoundtrip:
    def test_bitwise_roundtrip(self, tmp_path, ks_fields):
        path = tmp_path / "ds.lpde"
        write_dataset(ks_fields[:3], path)
        back = read_dataset(path)
        assert len(back) == 3
        assert back.equation == "ks"
        for orig, got in zip(ks_fields, back.fields):
            assert np.array_equal(orig.values, got.values)
            assert np.array_equal(orig.t_coords, got.t_coords)
            assert np.array_equal(orig.x_coords, got.x_coords)
            assert got.meta == _jsonified(orig.meta)

    def test_deterministic_bytes(self, tmp_path, ks_fields):
        p1, p2 = tmp_path / "a.lpde", tmp_path / "b.lpde"
        write_dataset(ks_fields[:2], p1)
        write_dataset(ks_fields[:2], p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_dataset(self, tmp_path):
        path = tmp_path / "empty.lpde"
        write_dataset([], path)
        back = read_dataset(path)
        assert len(back) == 0

    def test_2d_fields(self, tmp_path, tg_fields):
        path = tmp_path / "tg.lpde"
        write_dataset(tg_fields[:2], path)
        back = read_dataset(path)
        assert np.array_equal(back.fields[0].y_coords, tg_fields[0].y_coords)
        assert np.array_equal(back.fields[0].values, tg_fields[0].values)


def _jsonified(meta):
    import json

    return json.loads(json.dumps(_tolist(meta)))


def _tolist(obj):
    if isinstance(obj, dict):
        return {k: _tolist(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tolist(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


class TestValidation:
    def test_heterogeneous_shapes_rejected(self, ks_fields, kdv_fields, tmp_path):
        small = ks_fields[0].replace(
            values=ks_fields[0].values[:, :64],
            t_coords=ks_fields[0].t_coords[:64],
        )
        with pytest.raises(ContainerError):
            write_dataset([ks_fields[0], small], tmp_path / "x.lpde")

    def test_mixed_equations_rejected(self, ks_fields, kdv_fields, tmp_path):
        with pytest.raises(ContainerError):
            write_dataset([ks_fields[0], kdv_fields[0]], tmp_path / "x.lpde")

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "junk.lpde"
        path.write_bytes(b"JUNKJUNKJUNKJUNK")
        with pytest.raises(DataFormatError):
            read_dataset(path)

    def test_unsupported_version(self, tmp_path, ks_fields):
        path = tmp_path / "v2.lpde"
        write_dataset(ks_fields[:1], path)
        raw = bytearray(path.read_bytes())
        raw[4:8] = (2).to_bytes(4, "little")
        path.write_bytes(bytes(raw))
        with pytest.raises(UnsupportedVersionError):
            read_dataset(path)

    def test_truncated_payload(self, tmp_path, ks_fields):
        path = tmp_path / "trunc.lpde"
        write_dataset(ks_fields[:1], path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-16])
        with pytest.raises(CorruptFileError):
            read_dataset(path)

    def test_header_length_mismatch(self, tmp_path, ks_fields):
        path = tmp_path / "hdr.lpde"
        write_dataset(ks_fields[:1], path)
        raw = bytearray(path.read_bytes())
        raw[8:16] = (2**40).to_bytes(8, "little")
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptFileError):
            read_dataset(path)


class TestCSV:
    def test_metrics_record_single_row(self, tmp_path):
        path = tmp_path / "m.csv"
        export_csv({"task": "viscosity", "nmse": 0.125, "seed": 3}, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "task,nmse,seed"
        assert lines[1] == "viscosity,0.125,3"

    def test_array_export(self, tmp_path):
        path = tmp_path / "a.csv"
        export_csv(np.array([[1.5, 2.0], [3.25, -4.0]]), path)
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 3
        assert lines[1].split(",") == ["1.5", "2.0"]

    def test_float_roundtrip_printing(self, tmp_path):
        rng = np.random.default_rng(0)
        values = rng.standard_normal(64) * 10.0 ** rng.integers(-8, 8, 64)
        path = tmp_path / "f.csv"
        export_csv([{"v": float(v)} for v in values], path)
        lines = path.read_text().strip().split("\n")[1:]
        back = np.array([float(s) for s in lines])
        assert np.array_equal(back, values)
