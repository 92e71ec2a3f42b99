"""Scalar special functions shared by every expansion scheme.

Complete elliptic integrals via the arithmetic-geometric mean, Jacobi
elliptic functions for complex argument via a descending Landen chain
plus the addition theorem, the complex digamma function, and an
overflow-free Fermi-Dirac scalar.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipticModulus",
    "EllipticAccuracyWarning",
    "agm",
    "complete_elliptic_k",
    "elliptic_modulus",
    "jacobi_sn_cn_dn",
    "digamma_complex",
    "fermi_scalar",
]

# one AGM step squares the gap, so stopping at ~4 ulp loses nothing;
# a sub-ulp tolerance would spin forever on unlucky rounding
_AGM_TOL = 1e-15
_AGM_MAX_ITER = 64


class EllipticAccuracyWarning(UserWarning):
    """Raised when an evaluation point sits too close to a pole of sn."""


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus k with its complement and both quarter-periods.

    The complement is stored explicitly: recomputing sqrt(1 - k^2) is
    catastrophically inaccurate once k is within ~1e-8 of 1, which the
    huge-aspect-ratio contour maps reach routinely.
    """

    k: float
    k_complement: float
    K: float
    K_prime: float


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("agm requires positive arguments")
    for _ in range(_AGM_MAX_ITER):
        if abs(a - b) <= _AGM_TOL * abs(a):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * (a + b)


def complete_elliptic_k(k: float) -> float:
    """Complete elliptic integral K(k), modulus convention, for 0 <= k < 1.

    Uses K(k) = pi / (2 agm(1, k')).  For k extremely close to 1 pass the
    complementary modulus to this function instead and use the K' path;
    ``elliptic_modulus`` does that bookkeeping.
    """
    if not 0.0 <= k < 1.0:
        raise ValueError(f"modulus must satisfy 0 <= k < 1, got {k}")
    if k == 0.0:
        return np.pi / 2
    kc = np.sqrt((1.0 - k) * (1.0 + k))
    return np.pi / (2.0 * agm(1.0, kc))


def _k_from_complement(kc: float) -> float:
    return float(np.sqrt((1.0 - kc) * (1.0 + kc)))


def elliptic_modulus(k: float, k_complement: float | None = None) -> EllipticModulus:
    """Build an :class:`EllipticModulus`, computing K and K' by AGM.

    When ``k_complement`` is supplied it is trusted verbatim (the contour
    map computes it by a cancellation-free formula); otherwise it is
    derived from k.
    """
    if not 0.0 < k < 1.0:
        raise ValueError(f"modulus must satisfy 0 < k < 1, got {k}")
    kc = _k_from_complement(k) if k_complement is None else float(k_complement)
    if kc <= 0.0:
        raise ValueError("complementary modulus underflowed; interval too extreme")
    K = np.pi / (2.0 * agm(1.0, kc))
    K_prime = np.pi / (2.0 * agm(1.0, k))
    return EllipticModulus(k=float(k), k_complement=kc, K=float(K), K_prime=float(K_prime))


def _jacobi_real(u, k: float, kc: float):
    """sn, cn, dn for real argument by the descending Landen chain.

    Vectorized over ``u``.  The chain is parameterized by (k, k') so that
    no 1 - k^2 subtraction ever happens.
    """
    u = np.asarray(u, dtype=float)
    if k < 1e-12:
        # vanishing modulus: trigonometric limit, error O(k^2)
        return np.sin(u), np.cos(u), np.ones_like(u)
    a_list = [1.0]
    c_list = [k]
    b = kc
    while True:
        a_prev = a_list[-1]
        a_list.append(0.5 * (a_prev + b))
        c_list.append(0.5 * (a_prev - b))
        b = np.sqrt(a_prev * b)
        if abs(c_list[-1] / a_list[-1]) < 1e-17 or len(a_list) > 24:
            break
    n = len(a_list) - 1
    phi = (2.0**n) * a_list[n] * u
    for i in range(n, 0, -1):
        t = np.clip(c_list[i] * np.sin(phi) / a_list[i], -1.0, 1.0)
        phi = 0.5 * (np.arcsin(t) + phi)
    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn^2 = k'^2 + k^2 cn^2: both terms nonnegative, so no cancellation
    # anywhere (1 - k^2 sn^2 loses digits when k -> 1 and sn -> 1)
    dn = np.sqrt(kc * kc + (k * cn) ** 2)
    return sn, cn, dn


def jacobi_sn_cn_dn(t, modulus: EllipticModulus):
    """Jacobi sn, cn, dn for complex argument.

    Splits t = x + iy and combines the real-argument functions of x (at
    modulus k) and y (at the complementary modulus) with the addition
    theorem.  Valid in the stripe 0 <= Im t <= K' used by the node
    formulas; vectorized over ``t``.
    """
    t = np.asarray(t, dtype=complex)
    k, kc = modulus.k, modulus.k_complement
    s, c, d = _jacobi_real(t.real, k, kc)
    s1, c1, d1 = _jacobi_real(t.imag, kc, k)
    den = c1 * c1 + (k * s * s1) ** 2
    if np.any(np.abs(den) < 1e-8):
        warnings.warn(
            "evaluation point within ~1e-8 of a pole of sn; results inaccurate",
            EllipticAccuracyWarning,
            stacklevel=2,
        )
    sn = (s * d1 + 1j * c * d * s1 * c1) / den
    cn = (c * c1 - 1j * s * d * s1 * d1) / den
    dn = (d * c1 * d1 - 1j * k * k * s * c * s1) / den
    return sn, cn, dn


# Bernoulli numbers B_2 .. B_16 for the asymptotic tail of psi.
_BERNOULLI = (
    1.0 / 6,
    -1.0 / 30,
    1.0 / 42,
    -1.0 / 30,
    5.0 / 66,
    -691.0 / 2730,
    7.0 / 6,
    -3617.0 / 510,
)

_DIGAMMA_SHIFT = 16.0


def digamma_complex(z):
    """Digamma function psi(z) for complex z with Re z > 0.

    Shifts by the recurrence psi(z) = psi(z+1) - 1/z until Re z >= 16,
    then applies the eight-term Bernoulli asymptotic series.  Vectorized.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()
    near_int = np.abs(z - np.round(z.real)) < 1e-300
    if np.any(near_int & (z.real <= 0.0)):
        raise ValueError("digamma pole at nonpositive integer argument")
    acc = np.zeros_like(z)
    mask = z.real < _DIGAMMA_SHIFT
    while np.any(mask):
        acc[mask] -= 1.0 / z[mask]
        z[mask] += 1.0
        mask = z.real < _DIGAMMA_SHIFT
    inv2 = 1.0 / (z * z)
    tail = np.zeros_like(z)
    power = inv2.copy()
    for n, b in enumerate(_BERNOULLI, start=1):
        tail += b / (2 * n) * power
        power *= inv2
    out = acc + np.log(z) - 0.5 / z - tail
    return out[0] if scalar else out


def fermi_scalar(x):
    """Fermi-Dirac scalar 2 / (1 + exp(x)) for dimensionless x.

    Branch-free in magnitude: exp is only ever taken of -|x|, so the
    result saturates cleanly to 0 or 2 for |x| up to 1e6 and beyond.
    Vectorized.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    e = np.exp(-np.abs(x))
    out = np.where(x >= 0.0, 2.0 * e / (1.0 + e), 2.0 / (1.0 + e))
    return float(out[0]) if scalar else out
