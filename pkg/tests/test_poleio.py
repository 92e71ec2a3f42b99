import csv
import json

import numpy as np
import pytest

from fermipole.contour import eval_scalar, gapped_pole_set
from fermipole.multipole import MultipoleConfig, build_simple_pole_expansion, chebyshev_tail_fit
from fermipole.poleio import (
    load_pole_set,
    pole_set_from_dict,
    pole_set_to_dict,
    save_pole_set,
    write_density_csv,
    write_table_csv,
)

WIRE_KEYS = {"scheme", "Q", "beta", "E_g", "E_M", "poles", "weights", "constant", "variable"}


class TestWireFormat:
    def test_contour_document_layout(self):
        ps = gapped_pole_set(0.2, 4.0, 1000.0, 8)
        doc = pole_set_to_dict(ps)
        assert WIRE_KEYS <= set(doc)
        assert doc["scheme"] == "gapped"
        assert doc["Q"] == 8
        assert len(doc["poles"]) == len(doc["weights"]) == 16
        assert all(len(p) == 2 for p in doc["poles"])
        json.dumps(doc)  # JSON-serializable as-is

    def test_tail_document(self):
        cfg = MultipoleConfig(P=4, n_groups=5)
        ps = build_simple_pole_expansion(cfg)
        tail = chebyshev_tail_fit(cfg.m_pole, (-100.0, 100.0), 1e-7)
        doc = pole_set_to_dict(ps, tail)
        assert doc["tail"]["M_pole"] == 31
        assert doc["tail"]["interval"] == [-100.0, 100.0]
        assert isinstance(doc["tail"]["cheb_coeffs"], list)

    def test_roundtrip_values(self):
        ps = gapped_pole_set(0.2, 4.0, 1000.0, 6)
        ps2, tail2 = pole_set_from_dict(pole_set_to_dict(ps))
        assert tail2 is None
        assert np.array_equal(ps2.poles, ps.poles)
        assert np.array_equal(ps2.weights, ps.weights)
        x = np.linspace(-3, 3, 17)
        assert np.array_equal(eval_scalar(ps2, x), eval_scalar(ps, x))

    def test_file_roundtrip(self, tmp_path):
        cfg = MultipoleConfig(P=4, n_groups=5)
        ps = build_simple_pole_expansion(cfg)
        tail = chebyshev_tail_fit(cfg.m_pole, (-80.0, 80.0), 1e-7, beta=25.0)
        path = tmp_path / "poles.json"
        save_pole_set(path, ps, tail)
        ps2, tail2 = load_pole_set(path)
        assert ps2.scheme == "matsubara"
        assert ps2.variable == "scaled"
        assert ps2.tail_m_pole == 31
        assert tail2.beta == 25.0
        assert np.array_equal(tail2.cheb_coeffs, tail.cheb_coeffs)


class TestCsvWriters:
    def test_table_csv(self, tmp_path):
        rows = [{"a": 1, "b": 2.5}, {"a": 3, "b": 4.5}]
        path = tmp_path / "t.csv"
        write_table_csv(path, rows, ["a", "b"])
        with open(path) as fh:
            got = list(csv.DictReader(fh))
        assert got[0]["a"] == "1" and got[1]["b"] == "4.5"

    def test_density_csv(self, tmp_path):
        path = tmp_path / "d.csv"
        write_density_csv(path, np.array([1.0, 0.5]), np.array([1.0, 0.25]))
        with open(path) as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        assert header == ["site", "approx_density", "exact_density", "abs_diff"]
        assert float(rows[1][3]) == pytest.approx(0.25)
