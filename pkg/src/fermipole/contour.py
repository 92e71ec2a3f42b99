"""Conformal-map contour quadrature for the Fermi-Dirac and sign functions.

An elliptic map takes an equispaced midline of the rectangle
[-K, K] x [0, K'] onto a contour around the transformed spectrum
interval [m, M]; a Moebius step and a (shifted) square root then place
simple poles around the physical spectrum.  Three schemes are built this
way: a two-loop contour for gapped spectra at finite temperature, a
one-loop left-half-plane contour for the zero-temperature sign function,
and a dumbbell contour threading the Matsubara gap for gapless spectra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .special import EllipticModulus, elliptic_modulus, jacobi_sn_cn_dn

__all__ = [
    "MapParams",
    "PoleSet",
    "QuadratureNodes",
    "SCHEME_GAPPED",
    "SCHEME_SIGN",
    "SCHEME_GAPLESS",
    "SCHEME_MATSUBARA",
    "build_map",
    "quadrature_nodes",
    "gapped_pole_set",
    "sign_pole_set",
    "gapless_pole_set",
    "eval_scalar",
]

SCHEME_GAPPED = "gapped"
SCHEME_SIGN = "sign"
SCHEME_GAPLESS = "gapless"
SCHEME_MATSUBARA = "matsubara"

#: Relative tolerance for the pole / Matsubara-singularity collision check.
COLLISION_RTOL = 1e-12


@dataclass(frozen=True)
class MapParams:
    """Transformed spectrum interval [m, M] and the elliptic modulus of its map."""

    m: float
    M: float
    modulus: EllipticModulus


class QuadratureNodes(NamedTuple):
    """Midline nodes t_j, their images z_j, and the elliptic Jacobian factor."""

    t: np.ndarray
    z: np.ndarray
    jacobian: np.ndarray


@dataclass(frozen=True)
class PoleSet:
    """Simple-pole representation of the Fermi-Dirac (or sign) scalar.

    Encodes density(x) = constant - Im sum_j weights[j] / (poles[j] - x),
    optionally minus a Chebyshev tail for Matsubara-type sets.  Only
    upper-half-plane poles are stored; taking the imaginary part accounts
    for the conjugate family.  ``variable`` is "energy" when x means
    E - mu and "scaled" when x means beta * (E - mu).
    """

    scheme: str
    q_or_count: int
    poles: np.ndarray
    weights: np.ndarray
    constant: float
    beta: float | None = None
    e_gap: float | None = None
    e_max: float | None = None
    variable: str = "energy"
    tail_m_pole: int | None = field(default=None)

    def __post_init__(self):
        poles = np.asarray(self.poles, dtype=complex)
        weights = np.asarray(self.weights, dtype=complex)
        if poles.shape != weights.shape:
            raise ValueError("poles and weights must have equal length")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "weights", weights)
        if poles.size and np.any(poles.imag == 0.0):
            raise ValueError("pole on the real axis")

    @property
    def n_pole(self) -> int:
        return int(self.poles.size)


def build_map(m: float, M: float) -> MapParams:
    """Map parameters for the interval [m, M], 0 < m < M.

    The modulus is k = (sqrt(M/m) - 1) / (sqrt(M/m) + 1); its complement
    is computed as 2 (M/m)^(1/4) / (sqrt(M/m) + 1), which is exact in the
    k -> 1 limit where forming sqrt(1 - k^2) would lose every digit.
    """
    if m <= 0.0 or M <= m:
        raise ValueError(f"need 0 < m < M, got m={m}, M={M}")
    s = np.sqrt(M / m)
    k = (s - 1.0) / (s + 1.0)
    kc = 2.0 * s**0.5 / (s + 1.0)
    return MapParams(m=float(m), M=float(M), modulus=elliptic_modulus(k, kc))


def quadrature_nodes(q: int, params: MapParams) -> QuadratureNodes:
    """q equispaced nodes on the midline Im t = K'/2 and their map data.

    Returns t_j, z_j and the factor cn(t_j) dn(t_j) / (1/k - sn(t_j))^2
    coming from the Jacobian of z(t).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    mod = params.modulus
    j = np.arange(1, q + 1, dtype=float)
    t = -mod.K + 0.5j * mod.K_prime + 2.0 * (j - 0.5) * mod.K / q
    sn, cn, dn = jacobi_sn_cn_dn(t, mod)
    inv_k = 1.0 / mod.k
    z = np.sqrt(params.m) * np.sqrt(params.M) * (inv_k + sn) / (inv_k - sn)
    jacobian = cn * dn / (inv_k - sn) ** 2
    return QuadratureNodes(t=t, z=z, jacobian=jacobian)


def _half_prefactor(params: MapParams, q: int) -> float:
    mod = params.modulus
    return 2.0 * mod.K * np.sqrt(params.m) * np.sqrt(params.M) / (np.pi * q * mod.k)


def _check_matsubara_collisions(poles: np.ndarray, beta: float) -> None:
    # collisions are measure-zero but catastrophic: detect, never perturb
    spacing = np.pi / beta
    l = np.round((poles.imag / spacing + 1.0) / 2.0)
    sing = 1j * (2.0 * l - 1.0) * spacing
    dist = np.abs(poles - sing)
    if np.any(dist <= COLLISION_RTOL * np.abs(poles)):
        raise ValueError("quadrature pole collides with a Matsubara singularity")


def gapped_pole_set(e_gap: float, e_max: float, beta: float, q: int) -> PoleSet:
    """Two-loop contour poles for a gapped spectrum at inverse temperature beta.

    Builds the map for [e_gap^2, e_max^2]; each node z_j yields the pole
    pair +-sqrt(z_j).  The minus family is stored Schwarz-reflected into
    the upper half-plane so that the Im-sum convention sees every loop
    once.  2q poles total, constant 1.
    """
    if e_gap <= 0.0:
        raise ValueError("gapped scheme requires a positive spectral gap")
    if e_max <= e_gap:
        raise ValueError("e_max must exceed e_gap")
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    if np.isinf(beta):
        return sign_pole_set(e_gap, e_max, q)
    params = build_map(e_gap**2, e_max**2)
    nodes = quadrature_nodes(q, params)
    xi = np.sqrt(nodes.z)  # upper half-plane -> first quadrant
    w = -_half_prefactor(params, q) * np.tanh(0.5 * beta * xi) * nodes.jacobian / xi
    poles = np.concatenate([xi, -np.conj(xi)])
    weights = np.concatenate([w, -np.conj(w)])
    _check_matsubara_collisions(poles, beta)
    return PoleSet(
        scheme=SCHEME_GAPPED,
        q_or_count=q,
        poles=poles,
        weights=weights,
        constant=1.0,
        beta=beta,
        e_gap=e_gap,
        e_max=e_max,
    )


def sign_pole_set(e_gap: float, e_max: float, q: int) -> PoleSet:
    """One-loop contour poles approximating the zero-temperature limit.

    Only the left-half-plane family is kept; the result approximates the
    step 2 on [-e_max, -e_gap] and 0 on [e_gap, e_max] with constant 0
    and q poles.
    """
    if e_gap <= 0.0:
        raise ValueError("sign scheme requires a positive spectral gap")
    if e_max <= e_gap:
        raise ValueError("e_max must exceed e_gap")
    params = build_map(e_gap**2, e_max**2)
    nodes = quadrature_nodes(q, params)
    xi_minus = -np.sqrt(nodes.z)  # third quadrant
    w_minus = 2.0 * _half_prefactor(params, q) * nodes.jacobian / xi_minus
    # reflect to the second quadrant for upper-half storage
    poles = np.conj(xi_minus)
    weights = -np.conj(w_minus)
    return PoleSet(
        scheme=SCHEME_SIGN,
        q_or_count=q,
        poles=poles,
        weights=weights,
        constant=0.0,
        beta=np.inf,
        e_gap=e_gap,
        e_max=e_max,
    )


def gapless_pole_set(e_max: float, beta: float, q: int) -> PoleSet:
    """Dumbbell-contour poles for a gapless spectrum at finite temperature.

    The map interval is [pi^2/beta^2, e_max^2 + pi^2/beta^2] and the
    poles are +-sqrt(z_j - pi^2/beta^2); the contour threads the
    imaginary axis between the origin and the first Matsubara
    singularity at i pi / beta.  2q poles, constant 1.
    """
    if e_max <= 0.0:
        raise ValueError("e_max must be positive")
    if not np.isfinite(beta) or beta <= 0.0:
        raise ValueError("gapless scheme requires finite positive beta")
    shift = (np.pi / beta) ** 2
    params = build_map(shift, e_max**2 + shift)
    nodes = quadrature_nodes(q, params)
    xi = np.sqrt(nodes.z - shift)
    w = -_half_prefactor(params, q) * np.tanh(0.5 * beta * xi) * nodes.jacobian / xi
    poles = np.concatenate([xi, -np.conj(xi)])
    weights = np.concatenate([w, -np.conj(w)])
    if np.any(poles.imag <= 0.0):
        raise ValueError("gapless construction produced a non-upper pole")
    _check_matsubara_collisions(poles, beta)
    return PoleSet(
        scheme=SCHEME_GAPLESS,
        q_or_count=q,
        poles=poles,
        weights=weights,
        constant=1.0,
        beta=beta,
        e_gap=0.0,
        e_max=e_max,
    )


def eval_scalar(ps: PoleSet, x) -> np.ndarray | float:
    """Evaluate constant - Im sum_j w_j / (xi_j - x) at real x.

    ``x`` is in the pole set's own variable (energy shift for contour
    sets, beta * (E - mu) for Matsubara sets).  Vectorized over x.  The
    Chebyshev tail of Matsubara sets is *not* included here; see
    :func:`fermipole.multipole.eval_scalar_with_tail`.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if ps.poles.size == 0:
        out = np.full(x.shape, ps.constant)
    else:
        acc = np.zeros(x.shape, dtype=complex)
        # chunk to bound the (n_pole, n_x) intermediate
        step = max(1, int(2**22 // max(ps.poles.size, 1)))
        for i in range(0, x.size, step):
            sl = slice(i, min(i + step, x.size))
            acc[sl] = np.sum(ps.weights[:, None] / (ps.poles[:, None] - x[None, sl]), axis=0)
        out = ps.constant - acc.imag
    return float(out[0]) if scalar else out
