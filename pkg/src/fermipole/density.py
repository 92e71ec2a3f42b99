"""Apply pole expansions to a Hamiltonian and measure density-profile error.

Two evaluation engines produce the same numbers: "solve" performs the
actual shifted linear solves the expansions are designed around, and
"spectral" routes the scalar rational function through a precomputed
eigendecomposition (identical result for symmetric H because every
resolvent commutes with H).  Sweeps use the spectral engine; the solve
engine is the contractual path and the cross-check.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .contour import SCHEME_MATSUBARA, PoleSet, eval_scalar
from .linalg import EigDecomposition, solve_shifted, sym_eig
from .multipole import TailSpec, eval_tail_cheb
from .special import fermi_scalar

__all__ = [
    "DensityResult",
    "NpoleSearchPolicy",
    "apply_pole_expansion",
    "spectral_density",
    "exact_density",
    "delta_rho_rel",
    "minimal_npole",
]

#: Column-block width for identity right-hand sides in the solve engine.
SOLVE_BLOCK = 64


@dataclass(frozen=True)
class DensityResult:
    """Density-matrix diagonal plus bookkeeping about how it was produced."""

    diagonal: np.ndarray
    electron_count: float
    method_tag: str
    n_pole_used: int
    n_cheb_used: int = 0
    full_matrix: np.ndarray | None = None


def _energy_poles(ps: PoleSet, beta: float | None):
    """Pole locations/weights in the E - mu variable for any pole-set kind."""
    if ps.variable == "energy":
        return ps.poles, ps.weights
    if beta is None or not np.isfinite(beta) or beta <= 0.0:
        raise ValueError("scaled pole set needs a finite positive beta")
    return ps.poles / beta, ps.weights / beta


def _clenshaw_matrix(tail: TailSpec, X: np.ndarray) -> np.ndarray:
    """Clenshaw recurrence for the tail interpolant of a symmetric matrix."""
    lo, hi = tail.interval
    n = X.shape[0]
    eye = np.eye(n)
    S = (2.0 * X - (lo + hi) * eye) / (hi - lo)
    c = tail.cheb_coeffs
    b1 = np.zeros_like(S)
    b2 = np.zeros_like(S)
    for ck in c[:0:-1]:
        b1, b2 = ck * eye + 2.0 * (S @ b1) - b2, b1
    return c[0] * eye + S @ b1 - b2


def apply_pole_expansion(
    H: np.ndarray,
    mu: float,
    ps: PoleSet,
    tail: TailSpec | None = None,
    beta: float | None = None,
    diagonal_only: bool = True,
    workers: int = 1,
) -> DensityResult:
    """Density from shifted solves: c I - Im sum_j w_j (xi_j I - (H - mu))^-1.

    Matsubara sets are rescaled from x = beta (E - mu) to energy units and
    must come with their Chebyshev tail.  Solves run against the identity
    in column blocks; ``workers`` > 1 distributes poles over threads with
    a fixed-order reduction afterwards.
    """
    H = np.asarray(H, dtype=float)
    n = H.shape[0]
    if ps.scheme == SCHEME_MATSUBARA:
        if tail is None:
            raise ValueError("Matsubara pole set requires its Chebyshev tail")
        if tail.m_pole != ps.tail_m_pole:
            raise ValueError("tail m_pole does not match the pole set")
        if beta is None:
            beta = tail.beta
    elif tail is not None:
        raise ValueError("contour pole sets take no tail")
    if beta is None:
        beta = ps.beta
    poles, weights = _energy_poles(ps, beta)
    B = H - mu * np.eye(n)

    def resolvent(xi):
        X = np.empty((n, n), dtype=complex)
        for lo in range(0, n, SOLVE_BLOCK):
            hi = min(lo + SOLVE_BLOCK, n)
            rhs = np.zeros((n, hi - lo), dtype=complex)
            rhs[np.arange(lo, hi), np.arange(hi - lo)] = 1.0
            X[:, lo:hi] = solve_shifted(B, complex(xi), rhs)
        return X

    if workers > 1 and poles.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solutions = list(pool.map(resolvent, poles))
    else:
        solutions = [resolvent(xi) for xi in poles]
    acc = np.zeros((n, n), dtype=complex)
    for w, X in zip(weights, solutions):
        acc += w * X
    dens = ps.constant * np.eye(n) - acc.imag
    n_cheb = 0
    if ps.scheme == SCHEME_MATSUBARA:
        dens -= _clenshaw_matrix(tail, beta * B)
        n_cheb = tail.n_cheb
    diag = np.diagonal(dens).copy()
    return DensityResult(
        diagonal=diag,
        electron_count=float(np.sum(diag)),
        method_tag=ps.scheme,
        n_pole_used=ps.n_pole,
        n_cheb_used=n_cheb,
        full_matrix=None if diagonal_only else dens,
    )


def _scalar_profile(ps: PoleSet, tail: TailSpec | None, beta: float | None, shifts):
    """Scalar density of the expansion at the given E - mu shifts."""
    if ps.variable == "scaled":
        if beta is None:
            beta = tail.beta if tail is not None else ps.beta
        x = beta * np.asarray(shifts)
    else:
        x = np.asarray(shifts)
    out = eval_scalar(ps, x)
    if ps.scheme == SCHEME_MATSUBARA:
        if tail is None:
            raise ValueError("Matsubara pole set requires its Chebyshev tail")
        out = out - eval_tail_cheb(tail, x)
    return out


def spectral_density(
    eig: EigDecomposition,
    mu: float,
    ps: PoleSet,
    tail: TailSpec | None = None,
    beta: float | None = None,
    site_weights: np.ndarray | None = None,
) -> DensityResult:
    """Same density as :func:`apply_pole_expansion` via the eigenbasis.

    ``site_weights`` may carry the precomputed eigenvectors squared to
    amortize sweeps.
    """
    g = _scalar_profile(ps, tail, beta, eig.eigenvalues - mu)
    W = site_weights if site_weights is not None else eig.eigenvectors**2
    diag = W @ g
    return DensityResult(
        diagonal=diag,
        electron_count=float(np.sum(diag)),
        method_tag=ps.scheme + "+spectral",
        n_pole_used=ps.n_pole,
        n_cheb_used=tail.n_cheb if (tail is not None and ps.scheme == SCHEME_MATSUBARA) else 0,
    )


def exact_density(H_or_eig, mu: float, beta: float) -> DensityResult:
    """Oracle density via full diagonalization.

    beta = inf gives the zero-temperature step filling (weight 1 on an
    eigenvalue exactly at mu).
    """
    eig = H_or_eig if isinstance(H_or_eig, EigDecomposition) else sym_eig(H_or_eig)
    w = eig.eigenvalues
    if np.isinf(beta):
        f = np.where(w < mu, 2.0, 0.0) + np.where(w == mu, 1.0, 0.0)
    else:
        f = fermi_scalar(beta * (w - mu))
    diag = (eig.eigenvectors**2) @ f
    return DensityResult(
        diagonal=diag,
        electron_count=float(np.sum(f)),
        method_tag="exact",
        n_pole_used=0,
    )


def delta_rho_rel(approx: DensityResult, exact: DensityResult, n_electron: float) -> float:
    """L1 density-profile error per electron."""
    if approx.diagonal.shape != exact.diagonal.shape:
        raise ValueError("density results have mismatched dimensions")
    if n_electron <= 0.0:
        raise ValueError("n_electron must be positive")
    return float(np.sum(np.abs(approx.diagonal - exact.diagonal)) / n_electron)


@dataclass(frozen=True)
class NpoleSearchPolicy:
    """Admissible pole-count grid for the minimal-count search.

    ``confirm`` > 1 demands that many consecutive grid points below
    tolerance before accepting a crossing; the quadrature error
    oscillates, so a single lucky dip is not a converged count.
    """

    start: int = 4
    step: int = 4
    cap: int = 400
    confirm: int = 2


def minimal_npole(
    H_or_eig,
    mu: float,
    beta: float,
    build,
    tol: float = 1e-6,
    search: NpoleSearchPolicy = NpoleSearchPolicy(),
    n_electron: float | None = None,
) -> tuple[int, float]:
    """Smallest pole count on the grid with delta_rho_rel <= tol.

    ``build(n_pole)`` must return a (PoleSet, TailSpec | None) pair whose
    pole count equals n_pole.  Linear upward scan; evaluation goes
    through the spectral engine against the exact oracle at matched mu.
    """
    eig = H_or_eig if isinstance(H_or_eig, EigDecomposition) else sym_eig(H_or_eig)
    W = eig.eigenvectors**2
    oracle = exact_density(eig, mu, beta)
    ne = oracle.electron_count if n_electron is None else float(n_electron)

    def error_at(n_pole):
        ps, tail = build(n_pole)
        if ps.n_pole != n_pole:
            raise ValueError(f"builder produced {ps.n_pole} poles for request {n_pole}")
        approx = spectral_density(eig, mu, ps, tail, beta=beta, site_weights=W)
        return delta_rho_rel(approx, oracle, ne)

    errors: dict[int, float] = {}
    for n_pole in range(search.start, search.cap + 1, search.step):
        errors[n_pole] = error_at(n_pole)
        if errors[n_pole] > tol:
            continue
        followers = [n_pole + search.step * j for j in range(1, search.confirm)]
        for m in followers:
            if m not in errors:
                errors[m] = error_at(m)
        if all(errors[m] <= tol for m in followers):
            return n_pole, errors[n_pole]
    raise RuntimeError(f"no pole count <= {search.cap} reaches tol {tol:.1e}")
