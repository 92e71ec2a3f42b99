"""Benchmark Hamiltonian: 2D nearest-neighbor tight binding with random on-site potential.

Periodic L x L lattice, diagonal 2 + V_ij, neighbor hopping -1/2 plus
the bond-averaged potential.  Also hosts the chemical-potential search
and the spectral-window bookkeeping the expansion schemes consume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .special import fermi_scalar

__all__ = [
    "LatticeSpec",
    "SpectralWindow",
    "build_hamiltonian",
    "occupation",
    "chemical_potential_for_count",
    "spectral_window",
    "export_matrix",
    "import_matrix",
]


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice geometry and disorder parameters.

    The RNG is numpy's default PCG64 seeded with ``seed``, which keeps
    every table bit-reproducible.
    """

    L: int = 32
    potential_scale: float = 1e-3
    seed: int = 0
    periodic: bool = True

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("lattice side must be >= 2")
        if self.potential_scale < 0.0:
            raise ValueError("potential scale must be >= 0")
        if not self.periodic:
            raise ValueError("only periodic boundaries are supported")

    @property
    def n(self) -> int:
        return self.L * self.L


def build_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    """Dense n x n tight-binding matrix for ``spec``.

    Each undirected bond contributes -1/2 + (V_site + V_neighbor)/2 once;
    at L = 2 the two wrapped bonds between a pair accumulate.  The bond
    average keeps the matrix exactly symmetric.
    """
    L = spec.L
    rng = np.random.default_rng(spec.seed)
    V = rng.uniform(0.0, spec.potential_scale, size=(L, L))
    n = spec.n
    H = np.zeros((n, n))
    site = lambda i, j: (i % L) * L + (j % L)  # noqa: E731
    for i in range(L):
        for j in range(L):
            s = site(i, j)
            H[s, s] = 2.0 + V[i, j]
            for i2, j2 in ((i + 1, j), (i, j + 1)):
                s2 = site(i2, j2)
                bond = -0.5 + 0.5 * (V[i, j] + V[i2 % L, j2 % L])
                H[s, s2] += bond
                H[s2, s] += bond
    return H


def occupation(eigs: np.ndarray, beta: float, mu: float) -> float:
    """Total electron count sum_i 2 / (1 + exp(beta (lambda_i - mu)))."""
    if np.isinf(beta):
        below = np.count_nonzero(eigs < mu)
        at = np.count_nonzero(eigs == mu)
        return 2.0 * below + 1.0 * at
    return float(np.sum(fermi_scalar(beta * (eigs - mu))))


def chemical_potential_for_count(
    eigs: np.ndarray, beta: float, n_electron: float, tol: float = 1e-10
) -> float:
    """Chemical potential with occupation(eigs, beta, mu) = n_electron.

    The occupation is increasing in mu, so bisection on [min - 1, max + 1]
    cannot lose the root.  At large beta the occupation is numerically
    flat across a gap; bisecting both plateau edges and returning their
    midpoint keeps mu centered instead of pinned against an eigenvalue.
    """
    eigs = np.asarray(eigs, dtype=float)
    if not 0.0 < n_electron < 2.0 * eigs.size:
        raise ValueError("electron count must lie in (0, 2n)")
    lo, hi = eigs[0] - 1.0, eigs[-1] + 1.0
    if occupation(eigs, beta, lo) > n_electron or occupation(eigs, beta, hi) < n_electron:
        raise RuntimeError("bisection bracket failure")

    def edge(strict: bool) -> float:
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            occ = occupation(eigs, beta, mid)
            below = occ < n_electron if strict else occ <= n_electron
            if below:
                a = mid
            else:
                b = mid
            if b - a < 1e-15 * max(1.0, abs(mid)):
                break
        return 0.5 * (a + b)

    mu = 0.5 * (edge(True) + edge(False))
    if abs(occupation(eigs, beta, mu) - n_electron) > tol:
        raise RuntimeError(
            f"chemical potential search left residual "
            f"{abs(occupation(eigs, beta, mu) - n_electron):.3e} > {tol:.1e}"
        )
    return float(mu)


@dataclass(frozen=True)
class SpectralWindow:
    """Gap, excursion and width of a spectrum relative to a chemical potential."""

    mu: float
    e_gap: float
    e_max: float
    beta: float
    delta_e: float

    @property
    def beta_delta_e(self) -> float:
        return self.beta * self.delta_e


def spectral_window(eigs: np.ndarray, mu: float, beta: float) -> SpectralWindow:
    """Measure E_g = min |lambda - mu|, E_M = max |lambda - mu| and the width."""
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0:
        raise ValueError("empty spectrum")
    dist = np.abs(eigs - mu)
    return SpectralWindow(
        mu=float(mu),
        e_gap=float(np.min(dist)),
        e_max=float(np.max(dist)),
        beta=float(beta),
        delta_e=float(eigs[-1] - eigs[0]),
    )


def export_matrix(H: np.ndarray, path) -> None:
    """Write a matrix as a dimension header plus row-major entries."""
    H = np.asarray(H, dtype=float)
    with open(path, "w") as fh:
        fh.write(f"{H.shape[0]}\n")
        for row in H:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def import_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`export_matrix`."""
    with open(path) as fh:
        n = int(fh.readline())
        rows = [np.array(fh.readline().split(), dtype=float) for _ in range(n)]
    H = np.vstack(rows)
    if H.shape != (n, n):
        raise ValueError("matrix file dimension mismatch")
    return H
