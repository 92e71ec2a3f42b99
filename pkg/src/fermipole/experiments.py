"""Benchmark harness: pole-count tables, sign convergence, and figure data.

Runs the tight-binding benchmark end to end for each expansion scheme,
searches minimal pole counts against the diagonalization oracle, and
compares the outcome row by row with embedded reference values.  All
sweeps evaluate through the spectral engine; the solve engine is
available for spot verification.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .contour import (
    SCHEME_GAPPED,
    gapless_pole_set,
    gapped_pole_set,
    sign_pole_set,
)
from .density import (
    NpoleSearchPolicy,
    delta_rho_rel,
    exact_density,
    minimal_npole,
    spectral_density,
)
from .lattice import (
    LatticeSpec,
    build_hamiltonian,
    chemical_potential_for_count,
    spectral_window,
)
from .linalg import sym_eig
from .multipole import (
    MultipoleConfig,
    build_simple_pole_expansion,
    chebyshev_tail_fit,
    digamma_tail_scalar,
    matsubara_partial_scalar,
    matsubara_pole,
    group_circle,
)
from .poleio import pole_set_to_dict, write_table_csv
from .special import fermi_scalar

__all__ = [
    "ExperimentConfig",
    "TableRow",
    "BenchmarkSystem",
    "run_table1",
    "run_table2",
    "run_table3",
    "run_sign_convergence",
    "run_identity_check",
    "emit_pole_figure_data",
    "write_report",
]

# Reference operating points for the benchmark sweeps (pole counts and
# per-electron density errors at each beta * spectral width).
REFERENCE_TABLE1 = {
    4208: (40, 5.68e-7),
    8416: (44, 3.86e-7),
    16832: (44, 3.60e-7),
    33664: (44, 3.55e-7),
    67328: (44, 3.57e-7),
    134656: (44, 3.47e-7),
    269312: (44, 3.55e-7),
}
REFERENCE_TABLE2 = {
    4208: (58, 1.90e-7),
    8416: (62, 5.32e-7),
    16832: (66, 8.28e-7),
    33664: (72, 3.55e-7),
    67328: (76, 3.46e-7),
    134656: (80, 1.69e-7),
    269312: (84, 8.89e-8),
    538624: (88, 7.09e-8),
    1077248: (88, 8.94e-7),
    2154496: (88, 4.25e-7),
    4308992: (92, 3.43e-7),
}
# beta * width -> (represented poles, simple poles, tail degree, error)
REFERENCE_TABLE3 = {
    4208: (512, 96, 22, 4.61e-7),
    8416: (1024, 112, 22, 4.76e-7),
    16832: (2048, 128, 22, 4.84e-7),
    33664: (4096, 144, 22, 4.88e-7),
    67328: (8192, 160, 22, 4.90e-7),
    134656: (16384, 176, 22, 4.90e-7),
    269312: (32768, 192, 22, 6.98e-7),
    538624: (65536, 208, 22, 3.20e-6),
    1077248: (131072, 224, 22, 7.60e-6),
}

BASE_BETA_DELTA_E = 4208.0
#: Pole-count agreement band against the reference tables (one grid step).
NPOLE_BAND = 4

MU_POLICIES = ("gapped_default", "half_filling", "gapless_at_eigenvalue", "gap_1e-6")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a table run needs; defaults match the CI-sized benchmark."""

    size: int = 16
    seed: int = 0
    potential_scale: float = 1e-3
    tol: float = 1e-6
    beta_delta_e: tuple[float, ...] = tuple(BASE_BETA_DELTA_E * 2**i for i in range(7))
    mu_policy: str = "gapped_default"
    workers: int = 1
    full: bool = False

    def __post_init__(self):
        if not self.beta_delta_e or any(b <= 0 for b in self.beta_delta_e):
            raise ValueError("beta_delta_e values must be positive")
        if list(self.beta_delta_e) != sorted(self.beta_delta_e):
            raise ValueError("beta_delta_e values must ascend")
        if self.mu_policy not in MU_POLICIES:
            raise ValueError(f"unknown mu policy {self.mu_policy!r}")


@dataclass(frozen=True)
class TableRow:
    beta_delta_e: float
    n_pole: int
    delta_rho_rel: float
    m_pole: int | None = None
    n_cheb: int | None = None
    reference_n_pole: int | None = None
    reference_error: float | None = None
    passed: bool = True

    def as_dict(self) -> dict:
        return {
            "beta_delta_e": self.beta_delta_e,
            "m_pole": self.m_pole,
            "n_pole": self.n_pole,
            "n_cheb": self.n_cheb,
            "delta_rho_rel": self.delta_rho_rel,
            "reference_n_pole": self.reference_n_pole,
            "reference_error": self.reference_error,
            "passed": self.passed,
        }


class BenchmarkSystem:
    """Lattice Hamiltonian with cached spectral data and mu policies.

    The default filling puts two electrons in the band (mu inside the
    gap above the lowest level), the band-edge regime with gap around
    1e-2 and excursion around 4 at size 32.  Half filling is also
    exposed, but lands mu inside the near-degenerate band-center cluster
    where the gap collapses to around 1e-6.
    """

    def __init__(self, spec: LatticeSpec):
        self.spec = spec
        self.H = build_hamiltonian(spec)
        self.eig = sym_eig(self.H)
        self.site_weights = self.eig.eigenvectors**2
        self.delta_e = float(self.eig.eigenvalues[-1] - self.eig.eigenvalues[0])

    def beta_for(self, beta_delta_e: float) -> float:
        return beta_delta_e / self.delta_e

    def default_count(self, policy: str) -> float:
        return float(self.spec.n) if policy == "half_filling" else 2.0

    def mu_for(self, policy: str, beta: float) -> float:
        eigs = self.eig.eigenvalues
        if policy in ("gapped_default", "half_filling"):
            return chemical_potential_for_count(eigs, beta, self.default_count(policy))
        if policy == "gapless_at_eigenvalue":
            return float(eigs[1])
        if policy == "gap_1e-6":
            # half filling nudged: the band-center cluster spacing is a few
            # 1e-6, so this pins the gap at 1e-6 with n electrons filled
            return float(eigs[self.spec.n // 2 - 1]) + 1e-6
        raise ValueError(f"unknown mu policy {policy!r}")


def _fit_r2(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line y = a x + b with its coefficient of determination."""
    a, b = np.polyfit(x, y, 1)
    pred = a * x + b
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(a), float(b), r2


def _contour_table(cfg: ExperimentConfig, scheme: str) -> list[TableRow]:
    system = BenchmarkSystem(LatticeSpec(L=cfg.size, potential_scale=cfg.potential_scale, seed=cfg.seed))
    reference = REFERENCE_TABLE1 if scheme == SCHEME_GAPPED else REFERENCE_TABLE2
    rows = []
    for bde in cfg.beta_delta_e:
        beta = system.beta_for(bde)
        mu = system.mu_for(cfg.mu_policy, beta)
        window = spectral_window(system.eig.eigenvalues, mu, beta)
        if scheme == SCHEME_GAPPED:
            def build(n_pole):
                return gapped_pole_set(window.e_gap, window.e_max, beta, n_pole // 2), None
        else:
            def build(n_pole):
                return gapless_pole_set(window.e_max, beta, n_pole // 2), None
        n_pole, err = minimal_npole(
            system.eig, mu, beta, build, tol=cfg.tol, search=NpoleSearchPolicy(start=4, step=4)
        )
        ref = reference.get(int(round(bde)))
        rows.append(
            TableRow(
                beta_delta_e=bde,
                n_pole=n_pole,
                delta_rho_rel=err,
                reference_n_pole=ref[0] if ref else None,
                reference_error=ref[1] if ref else None,
                passed=err <= cfg.tol,
            )
        )
    return rows


def run_table1(cfg: ExperimentConfig) -> list[TableRow]:
    """Gapped finite-temperature sweep; pole counts should barely move."""
    if cfg.mu_policy not in ("gapped_default", "half_filling"):
        raise ValueError("table1 expects a gapped mu policy")
    return _contour_table(cfg, SCHEME_GAPPED)


def run_table2(cfg: ExperimentConfig) -> tuple[list[TableRow], dict]:
    """Gapless dumbbell sweep plus the pole-count-vs-log fit summary."""
    cfg = replace(cfg, mu_policy="gapless_at_eigenvalue")
    rows = _contour_table(cfg, SCHEME_GAPLESS)
    slope, intercept, r2 = _fit_r2(
        np.log([r.beta_delta_e for r in rows]), np.array([r.n_pole for r in rows], float)
    )
    return rows, {"slope": slope, "intercept": intercept, "r_squared": r2}


def table3_layout(beta_delta_e: float, P: int = 16) -> MultipoleConfig:
    """Represented-pole schedule: doubling with beta * width from 512 at 4208."""
    doublings = round(math.log2(beta_delta_e / BASE_BETA_DELTA_E))
    return MultipoleConfig(P=P, n_groups=9 + max(0, int(doublings)))


#: Pad factor for the symmetric tail interval |x| <= pad * beta * width.
TAIL_PAD = 1.01


def run_table3(cfg: ExperimentConfig, P: int = 16, cheb_target: float = 1e-7) -> list[TableRow]:
    """Equivalent-charge simple-pole sweep at the doubling represented-pole schedule."""
    cfg = replace(cfg, mu_policy="gapless_at_eigenvalue")
    system = BenchmarkSystem(LatticeSpec(L=cfg.size, potential_scale=cfg.potential_scale, seed=cfg.seed))
    rows = []
    for bde in cfg.beta_delta_e:
        beta = system.beta_for(bde)
        mu = system.mu_for(cfg.mu_policy, beta)
        config = table3_layout(bde, P=P)
        ps = build_simple_pole_expansion(config)
        half_width = TAIL_PAD * bde
        tail = chebyshev_tail_fit(config.m_pole, (-half_width, half_width), cheb_target, beta=beta)
        oracle = exact_density(system.eig, mu, beta)
        approx = spectral_density(
            system.eig, mu, ps, tail, beta=beta, site_weights=system.site_weights
        )
        err = delta_rho_rel(approx, oracle, oracle.electron_count)
        ref = REFERENCE_TABLE3.get(int(round(bde)))
        # largest sweeps are allowed the documented slight growth
        bound = cfg.tol if bde <= 269312 else 10.0 * cfg.tol
        rows.append(
            TableRow(
                beta_delta_e=bde,
                n_pole=ps.n_pole,
                delta_rho_rel=err,
                m_pole=config.m_pole,
                n_cheb=tail.n_cheb,
                reference_n_pole=ref[1] if ref else None,
                reference_error=ref[3] if ref else None,
                passed=err <= bound,
            )
        )
    return rows


SIGN_NPOLE_GRID = tuple(range(10, 61, 5))


def run_sign_convergence(cfg: ExperimentConfig) -> tuple[list[tuple[int, float]], dict]:
    """Zero-temperature error curve at an artificially tiny gap.

    Returns (n_pole, error) pairs over the pole grid and the log-linear
    fit of the decay (fitted only above the roundoff floor).
    """
    cfg = replace(cfg, mu_policy="gap_1e-6")
    system = BenchmarkSystem(LatticeSpec(L=cfg.size, potential_scale=cfg.potential_scale, seed=cfg.seed))
    mu = system.mu_for(cfg.mu_policy, math.inf)
    window = spectral_window(system.eig.eigenvalues, mu, math.inf)
    oracle = exact_density(system.eig, mu, math.inf)
    curve = []
    for n_pole in SIGN_NPOLE_GRID:
        ps = sign_pole_set(window.e_gap, window.e_max, n_pole)
        approx = spectral_density(system.eig, mu, ps, site_weights=system.site_weights)
        curve.append((n_pole, delta_rho_rel(approx, oracle, oracle.electron_count)))
    ns = np.array([c[0] for c in curve], float)
    errs = np.array([c[1] for c in curve], float)
    mask = errs > 1e-13
    slope, intercept, r2 = _fit_r2(ns[mask], np.log(errs[mask]))
    return curve, {"slope": slope, "intercept": intercept, "r_squared": r2, "e_gap": window.e_gap}


def run_identity_check(
    xs=(-100.0, -10.0, -1.0, 0.0, 0.5, 3.0, 40.0, 100.0),
    ms=(0, 1, 31, 511, 4095),
) -> dict:
    """Resummation identity residuals across a grid of x and tail cuts."""
    worst = 0.0
    for m in ms:
        for x in xs:
            lhs = 1.0 - matsubara_partial_scalar(x, m) - digamma_tail_scalar(x, m)
            worst = max(worst, abs(lhs - fermi_scalar(x)))
    return {"max_residual": worst, "passed": bool(worst <= 1e-12)}


FIGURE_DEFAULTS = {
    "gapped-loops": {"e_gap": 0.2, "e_max": 4.0, "beta": 1000.0, "q": 30},
    "sign-loop": {"e_gap": 0.2, "e_max": 4.0, "q": 30},
    "dumbbell": {"e_max": 4.0, "beta": 1000.0, "q": 30},
    "matsubara-groups": {"P": 16, "n_groups": 9},
}


def emit_pole_figure_data(figure: str, **overrides) -> dict:
    """Plot-ready pole configuration data for the four standard figures."""
    if figure not in FIGURE_DEFAULTS:
        raise ValueError(f"unknown figure {figure!r}; options: {sorted(FIGURE_DEFAULTS)}")
    params = dict(FIGURE_DEFAULTS[figure])
    params.update(overrides)
    if figure == "gapped-loops":
        ps = gapped_pole_set(params["e_gap"], params["e_max"], params["beta"], params["q"])
        doc = pole_set_to_dict(ps)
        doc["spectrum_segments"] = [
            [-params["e_max"], -params["e_gap"]],
            [params["e_gap"], params["e_max"]],
        ]
    elif figure == "sign-loop":
        ps = sign_pole_set(params["e_gap"], params["e_max"], params["q"])
        doc = pole_set_to_dict(ps)
        doc["spectrum_segments"] = [
            [-params["e_max"], -params["e_gap"]],
            [params["e_gap"], params["e_max"]],
        ]
    elif figure == "dumbbell":
        ps = gapless_pole_set(params["e_max"], params["beta"], params["q"])
        doc = pole_set_to_dict(ps)
        doc["spectrum_segments"] = [[-params["e_max"], params["e_max"]]]
        spacing = np.pi / params["beta"]
        doc["matsubara_markers"] = [(2 * l - 1) * spacing for l in range(1, 9)]
    else:
        config = MultipoleConfig(P=params["P"], n_groups=params["n_groups"])
        ps = build_simple_pole_expansion(config)
        doc = pole_set_to_dict(ps)
        doc["exact_pole_block"] = [
            [0.0, float(p.imag)] for p in matsubara_pole(np.arange(1, config.n_exact + 1))
        ]
        doc["group_circles"] = [
            {
                "level": n,
                "center": [0.0, float(group_circle(n)[0].imag)],
                "radius": group_circle(n)[1],
                "check_radius": group_circle(n)[2],
            }
            for n in config.grouped_levels
        ]
        doc["start_level"] = config.start_level
    doc["figure"] = figure
    doc["params"] = params
    return doc


TABLE_COLUMNS = [
    "beta_delta_e",
    "m_pole",
    "n_pole",
    "n_cheb",
    "delta_rho_rel",
    "reference_n_pole",
    "reference_error",
    "passed",
]


def _reference_deltas(rows: list[TableRow], band: int) -> list[dict]:
    out = []
    for r in rows:
        if r.reference_n_pole is None:
            continue
        out.append(
            {
                "beta_delta_e": r.beta_delta_e,
                "n_pole": r.n_pole,
                "reference_n_pole": r.reference_n_pole,
                "delta": r.n_pole - r.reference_n_pole,
                "within_band": abs(r.n_pole - r.reference_n_pole) <= band,
            }
        )
    return out


def write_report(out_dir, name: str, rows: list[TableRow], extra: dict | None = None, band: int = NPOLE_BAND) -> dict:
    """Write <name>.csv and fold a summary block into <out_dir>/report.json."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    write_table_csv(os.path.join(out_dir, f"{name}.csv"), [r.as_dict() for r in rows], TABLE_COLUMNS)
    block = {
        "rows": [r.as_dict() for r in rows],
        "all_rows_passed": all(r.passed for r in rows),
        "reference_comparison": _reference_deltas(rows, band),
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if extra:
        block.update(extra)
    report_path = os.path.join(out_dir, "report.json")
    report = {}
    if os.path.exists(report_path):
        with open(report_path) as fh:
            report = json.load(fh)
    report[name] = block
    report["all_passed"] = all(
        b.get("all_rows_passed", True) for k, b in report.items() if isinstance(b, dict)
    )
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=1)
    return block
