"""JSON wire format for pole sets and tails, plus CSV table writers."""

from __future__ import annotations

import csv
import json

import numpy as np

from .contour import PoleSet
from .multipole import TailSpec

__all__ = [
    "pole_set_to_dict",
    "pole_set_from_dict",
    "save_pole_set",
    "load_pole_set",
    "write_table_csv",
    "write_density_csv",
]


def _pairs(a: np.ndarray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in a]


def pole_set_to_dict(ps: PoleSet, tail: TailSpec | None = None) -> dict:
    """Serialize a pole set (and optional tail) to the JSON document layout."""
    doc = {
        "scheme": ps.scheme,
        "Q": ps.q_or_count,
        "beta": None if ps.beta is None or np.isinf(ps.beta) else ps.beta,
        "E_g": ps.e_gap,
        "E_M": ps.e_max,
        "poles": _pairs(ps.poles),
        "weights": _pairs(ps.weights),
        "constant": ps.constant,
        "variable": ps.variable,
    }
    if tail is not None:
        doc["tail"] = {
            "M_pole": tail.m_pole,
            "interval": [tail.interval[0], tail.interval[1]],
            "cheb_coeffs": [float(c) for c in tail.cheb_coeffs],
            "target_accuracy": tail.target_accuracy,
            "beta": tail.beta,
        }
    return doc


def pole_set_from_dict(doc: dict) -> tuple[PoleSet, TailSpec | None]:
    """Inverse of :func:`pole_set_to_dict`."""
    poles = np.array([complex(re, im) for re, im in doc["poles"]], dtype=complex)
    weights = np.array([complex(re, im) for re, im in doc["weights"]], dtype=complex)
    tail_doc = doc.get("tail")
    tail = None
    if tail_doc is not None:
        tail = TailSpec(
            m_pole=int(tail_doc["M_pole"]),
            interval=(float(tail_doc["interval"][0]), float(tail_doc["interval"][1])),
            cheb_coeffs=np.asarray(tail_doc["cheb_coeffs"], dtype=float),
            target_accuracy=float(tail_doc.get("target_accuracy", 1e-7)),
            beta=tail_doc.get("beta"),
        )
    beta = doc.get("beta")
    ps = PoleSet(
        scheme=doc["scheme"],
        q_or_count=int(doc["Q"]),
        poles=poles,
        weights=weights,
        constant=float(doc["constant"]),
        beta=None if beta is None else float(beta),
        e_gap=doc.get("E_g"),
        e_max=doc.get("E_M"),
        variable=doc.get("variable", "energy"),
        tail_m_pole=tail.m_pole if tail is not None else None,
    )
    return ps, tail


def save_pole_set(path, ps: PoleSet, tail: TailSpec | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(pole_set_to_dict(ps, tail), fh, indent=1)


def load_pole_set(path) -> tuple[PoleSet, TailSpec | None]:
    with open(path) as fh:
        return pole_set_from_dict(json.load(fh))


def write_table_csv(path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_density_csv(path, approx, exact) -> None:
    """Site-resolved comparison: index, approx, exact, absolute difference."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["site", "approx_density", "exact_density", "abs_diff"])
        for i, (a, e) in enumerate(zip(approx, exact)):
            writer.writerow([i, f"{a:.16e}", f"{e:.16e}", f"{abs(a - e):.6e}"])
