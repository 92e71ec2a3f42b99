"""Matsubara pole summation with dyadic multipole grouping.

The Fermi-Dirac scalar in the variable x = beta (E - mu) is
1 - 4 Re sum_{l>=1} 1/(x - (2l-1) pi i).  The leading poles are kept
exact, dyadic groups of the rest are compressed either into truncated
Taylor multipoles about the group midpoint or into fitted equivalent
charges on a circle around the group, and everything beyond the first
2^n_groups - 1 poles is resummed in closed form through the digamma
function and fitted by a Chebyshev interpolant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.polynomial.chebyshev as npcheb

from .contour import SCHEME_MATSUBARA, PoleSet
from .special import digamma_complex

__all__ = [
    "MultipoleConfig",
    "MultipoleExpansion",
    "EquivalentChargeSet",
    "TailSpec",
    "TikhonovParams",
    "ChargeFitError",
    "matsubara_pole",
    "group_range",
    "group_center_index",
    "matsubara_partial_scalar",
    "digamma_tail_scalar",
    "group_sum_exact",
    "group_sum_taylor",
    "build_multipole_expansion",
    "eval_multipole_scalar",
    "fit_equivalent_charges",
    "build_equivalent_charges",
    "build_simple_pole_expansion",
    "chebyshev_tail_fit",
    "eval_tail_cheb",
    "eval_scalar_with_tail",
]


class ChargeFitError(RuntimeError):
    """Charge fit residual far above its expected bound (bad conditioning)."""


@dataclass(frozen=True)
class TikhonovParams:
    """Regularization for the first-kind charge-fit systems.

    ``lam_rel`` scales the largest squared singular value; the absolute
    ridge is lam_rel * s_max^2.
    """

    lam_rel: float = 1e-12

    def __post_init__(self):
        if self.lam_rel < 0.0:
            raise ValueError("lam_rel must be >= 0")


@dataclass(frozen=True)
class MultipoleConfig:
    """Grouping layout: P terms per group and n_groups dyadic levels.

    P must be a power of two.  Levels below ``start_level`` plus the
    first pole of the start level are kept as exact simple poles (the
    first P Matsubara poles); grouping begins at the (P+1)-th pole.
    ``m_pole = 2^n_groups - 1`` is the number of Matsubara poles the
    grouped representation covers; everything beyond is tail.
    """

    P: int
    n_groups: int

    def __post_init__(self):
        if self.P < 1 or (self.P & (self.P - 1)) != 0:
            raise ValueError("P must be a positive power of two")
        if self.n_groups < 1:
            raise ValueError("n_groups must be >= 1")

    @property
    def m_pole(self) -> int:
        return 2**self.n_groups - 1

    @property
    def start_level(self) -> int:
        return self.P.bit_length()  # log2(P) + 1

    @property
    def n_exact(self) -> int:
        """Number of leading exact simple poles (= P, capped by m_pole)."""
        return min(self.P, self.m_pole)

    @property
    def grouped_levels(self) -> range:
        return range(self.start_level, self.n_groups + 1)

    @property
    def n_pole(self) -> int:
        """Simple-pole count of the assembled expansion."""
        return self.n_exact + sum(
            self.P for n in self.grouped_levels if group_range(n, self.P)[1] > 0
        )


def matsubara_pole(l) -> np.ndarray:
    """Location (2l - 1) pi i of the l-th Matsubara pole, l >= 1."""
    l = np.asarray(l, dtype=float)
    return 1j * (2.0 * l - 1.0) * np.pi


def group_range(n: int, P: int = 1) -> tuple[int, int]:
    """Pole indices [lo, hi] represented by level n when the first P are exact.

    The full dyadic level is [2^(n-1), 2^n - 1]; the start level loses its
    first pole (index P) to the exact block.  Returns hi = 0 when empty.
    """
    lo = max(2 ** (n - 1), P + 1)
    hi = 2**n - 1
    if lo > hi:
        return lo, 0
    return lo, hi


def group_center_index(n: int) -> float:
    """Midpoint index l_n = (3 * 2^(n-1) - 1) / 2 of the full dyadic level."""
    return (3.0 * 2 ** (n - 1) - 1.0) / 2.0


def group_circle(n: int) -> tuple[complex, float, float]:
    """Charge circle (center, radius) and check radius for level n."""
    center = (3.0 * 2 ** (n - 1) - 2.0) * np.pi * 1j
    radius = 2 ** (n - 1) * np.pi
    check_radius = 2**n * np.pi
    return center, radius, check_radius


def matsubara_partial_scalar(x, M: int):
    """4 Re sum_{l=1}^{M} 1/(x - (2l-1) pi i) by direct summation."""
    if M < 0:
        raise ValueError("M must be >= 0")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.zeros_like(x)
    if M > 0:
        odd_sq = (((2.0 * np.arange(1, M + 1) - 1.0)) * np.pi) ** 2
        step = max(1, int(2**22 // M))
        for i in range(0, x.size, step):
            sl = slice(i, min(i + step, x.size))
            out[sl] = 4.0 * np.sum(x[None, sl] / (x[None, sl] ** 2 + odd_sq[:, None]), axis=0)
    return float(out[0]) if scalar else out


def digamma_tail_scalar(x, M: int):
    """Closed form of the Matsubara sum beyond the first M poles.

    Returns (2/pi) Im psi(M + 1/2 + i x / (2 pi)), normalized so that
    1 - matsubara_partial_scalar(x, M) - digamma_tail_scalar(x, M)
    equals the Fermi-Dirac scalar exactly.
    """
    if M < 0:
        raise ValueError("M must be >= 0")
    x = np.asarray(x, dtype=float)
    z = M + 0.5 + 0.5j * x / np.pi
    return (2.0 / np.pi) * np.imag(digamma_complex(z))


def group_sum_exact(x, n: int, lo: int | None = None):
    """Exact sum over level n: sum_{l in group} 1/(x - (2l-1) pi i)."""
    lo_full = 2 ** (n - 1)
    l = np.arange(lo_full if lo is None else lo, 2**n)
    x = np.asarray(x, dtype=float)
    if l.size == 0:
        return np.zeros(x.shape, dtype=complex)
    return np.sum(1.0 / (x[..., None] - matsubara_pole(l)[None, :]), axis=-1)


def group_sum_taylor(x, n: int, P: int, lo: int | None = None):
    """P-term Taylor compression of level n about its midpoint pole."""
    lo_full = 2 ** (n - 1)
    l = np.arange(lo_full if lo is None else lo, 2**n)
    x = np.asarray(x, dtype=float)
    if l.size == 0:
        return np.zeros(x.shape, dtype=complex)
    l_n = group_center_index(n)
    center = 1j * (2.0 * l_n - 1.0) * np.pi
    offsets = 2.0 * (l - l_n) * np.pi * 1j
    inv = 1.0 / (x - center)
    moments = np.array([np.sum(offsets**nu) for nu in range(P)])
    powers = inv[..., None] ** np.arange(1, P + 1)
    return np.sum(powers * moments, axis=-1)


@dataclass(frozen=True)
class MultipoleExpansion:
    """Taylor-compressed Matsubara representation.

    ``coefficients[n]`` holds a_(n, nu) = sum_l (2 (l - l_n) pi i)^nu for
    the poles level n represents; the expansion contributes
    sum_nu a_(n, nu) / (x - center_n)^(nu+1).
    """

    config: MultipoleConfig
    exact_poles: np.ndarray
    centers: dict[int, complex]
    coefficients: dict[int, np.ndarray]

    def levels(self):
        return sorted(self.coefficients)


def build_multipole_expansion(config: MultipoleConfig) -> MultipoleExpansion:
    """Group the Matsubara poles beyond the exact block into Taylor multipoles."""
    P = config.P
    exact = matsubara_pole(np.arange(1, config.n_exact + 1))
    centers: dict[int, complex] = {}
    coeffs: dict[int, np.ndarray] = {}
    for n in config.grouped_levels:
        lo, hi = group_range(n, P)
        if hi == 0:
            continue
        l = np.arange(lo, hi + 1)
        l_n = group_center_index(n)
        centers[n] = complex(1j * (2.0 * l_n - 1.0) * np.pi)
        offsets = 2.0 * (l - l_n) * np.pi * 1j
        coeffs[n] = np.array([np.sum(offsets**nu) for nu in range(P)])
    return MultipoleExpansion(
        config=config, exact_poles=exact, centers=centers, coefficients=coeffs
    )


def eval_multipole_scalar(exp: MultipoleExpansion, x):
    """Density 1 - 4 Re (exact poles + multipole groups); tail not included."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    acc = np.sum(1.0 / (x[:, None] - exp.exact_poles[None, :]), axis=1)
    for n in exp.levels():
        inv = 1.0 / (x - exp.centers[n])
        c = exp.coefficients[n]
        # Horner in inv: sum_nu c_nu inv^(nu+1)
        s = np.zeros_like(inv)
        for cv in c[::-1]:
            s = inv * (cv + s)
        acc += s
    out = 1.0 - 4.0 * acc.real
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class EquivalentChargeSet:
    """Per-level fitted charges on the group circles.

    ``sample_poles[n]`` are the P charge locations on the level-n circle;
    ``charges[n]`` the fitted complex charges; ``residuals[n]`` the
    relative potential mismatch of the fit at held-out points on the
    check circle.
    """

    config: MultipoleConfig
    sample_poles: dict[int, np.ndarray]
    charges: dict[int, np.ndarray]
    residuals: dict[int, float] = field(repr=False)

    def levels(self):
        return sorted(self.charges)


def _symmetrize_charges(sample_poles: np.ndarray, charges: np.ndarray) -> np.ndarray:
    """Pairwise enforce rho(-conj x) = conj(rho(x)) across the imaginary axis.

    The true pole group is mirror-symmetric about the imaginary axis; the
    symmetrized charges reproduce that symmetry exactly, which keeps the
    assembled density real to machine precision.
    """
    P = sample_poles.size
    out = charges.copy()
    reflected = -np.conj(sample_poles)
    for k in range(P):
        # sample points are equispaced starting at angle 0: the partner index
        # is exact, but match by nearest point to stay layout-agnostic
        j = int(np.argmin(np.abs(sample_poles - reflected[k])))
        out[k] = 0.5 * (charges[k] + np.conj(charges[j]))
    return out


def fit_equivalent_charges(
    true_poles: np.ndarray,
    center: complex,
    radius: float,
    check_radius: float,
    P: int,
    reg: TikhonovParams = TikhonovParams(),
    symmetrize: bool = True,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Fit P charges on a circle to the potential of ``true_poles``.

    Collocates at 2P equispaced points on the check circle and solves the
    Tikhonov-regularized least-squares system.  Returns (sample points,
    charges, relative mismatch at 64 held-out check-circle points).
    """
    true_poles = np.asarray(true_poles, dtype=complex)
    sample = center + radius * np.exp(2j * np.pi * np.arange(P) / P)
    colloc = center + check_radius * np.exp(2j * np.pi * (np.arange(2 * P) + 0.5) / (2 * P))
    A = 1.0 / (colloc[:, None] - sample[None, :])
    rhs = np.sum(1.0 / (colloc[:, None] - true_poles[None, :]), axis=1)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    lam = reg.lam_rel * s[0] ** 2
    charges = Vh.conj().T @ (s / (s * s + lam) * (U.conj().T @ rhs))
    if symmetrize:
        charges = _symmetrize_charges(sample, charges)
    held = center + check_radius * np.exp(2j * np.pi * (np.arange(64) + 0.25) / 64)
    pot_true = np.sum(1.0 / (held[:, None] - true_poles[None, :]), axis=1)
    pot_fit = (1.0 / (held[:, None] - sample[None, :])) @ charges
    residual = float(np.max(np.abs(pot_true - pot_fit)) / np.max(np.abs(pot_true)))
    return sample, charges, residual


# Mismatch floor of a P-charge circle fit measured on the check circle is
# (radius/check_radius)^P; flag only when far above it.
_FIT_FAILURE_FACTOR = 1e2


def build_equivalent_charges(
    config: MultipoleConfig, reg: TikhonovParams = TikhonovParams()
) -> EquivalentChargeSet:
    """Fit equivalent charges for every grouped level of ``config``."""
    samples: dict[int, np.ndarray] = {}
    charges: dict[int, np.ndarray] = {}
    residuals: dict[int, float] = {}
    for n in config.grouped_levels:
        lo, hi = group_range(n, config.P)
        if hi == 0:
            continue
        center, radius, check_radius = group_circle(n)
        sample, rho, res = fit_equivalent_charges(
            matsubara_pole(np.arange(lo, hi + 1)),
            center,
            radius,
            check_radius,
            config.P,
            reg,
        )
        floor = (radius / check_radius) ** config.P
        if res > _FIT_FAILURE_FACTOR * floor:
            raise ChargeFitError(
                f"level {n}: fit residual {res:.2e} far above the {floor:.2e} floor"
            )
        samples[n] = sample
        charges[n] = rho
        residuals[n] = res
    return EquivalentChargeSet(
        config=config, sample_poles=samples, charges=charges, residuals=residuals
    )


def build_simple_pole_expansion(
    config: MultipoleConfig, reg: TikhonovParams = TikhonovParams()
) -> PoleSet:
    """Assemble the exact block plus all fitted charges into a PoleSet.

    The pole set lives in the scaled variable x = beta (E - mu) and
    encodes density(x) = 1 - Im sum w/(xi - x) - tail(x, m_pole); pair it
    with the TailSpec of the same m_pole.
    """
    charges = build_equivalent_charges(config, reg)
    poles = [matsubara_pole(np.arange(1, config.n_exact + 1))]
    weights = [np.full(config.n_exact, -4.0j)]
    for n in charges.levels():
        poles.append(charges.sample_poles[n])
        weights.append(-4.0j * charges.charges[n])
    return PoleSet(
        scheme=SCHEME_MATSUBARA,
        q_or_count=config.n_pole,
        poles=np.concatenate(poles),
        weights=np.concatenate(weights),
        constant=1.0,
        variable="scaled",
        tail_m_pole=config.m_pole,
    )


@dataclass(frozen=True)
class TailSpec:
    """Chebyshev interpolant of the digamma tail over an x-interval."""

    m_pole: int
    interval: tuple[float, float]
    cheb_coeffs: np.ndarray
    target_accuracy: float
    beta: float | None = None

    @property
    def n_cheb(self) -> int:
        return int(len(self.cheb_coeffs) - 1)


#: Hard cap on the Chebyshev degree; exceeding it means m_pole is too
#: small for the requested interval.
TAIL_DEGREE_CAP = 2000


def chebyshev_tail_fit(
    m_pole: int,
    x_interval: tuple[float, float],
    target: float = 1e-7,
    beta: float | None = None,
) -> TailSpec:
    """Chebyshev interpolant of x -> digamma_tail_scalar(x, m_pole).

    The degree is doubled until trailing coefficients fall below
    ``target``, then truncated at the smallest degree whose discarded
    coefficients all stay below it.
    """
    lo, hi = float(x_interval[0]), float(x_interval[1])
    if not lo < hi:
        raise ValueError("empty tail interval")
    if target <= 0.0:
        raise ValueError("target accuracy must be positive")

    def f(x):
        return digamma_tail_scalar(np.asarray(x), m_pole)

    deg = 32
    while True:
        coeffs = npcheb.Chebyshev.interpolate(f, deg, domain=[lo, hi]).coef
        mags = np.abs(coeffs)
        # resolved once the last quarter of the coefficients is below target
        if np.all(mags[-(deg // 4):] <= target):
            break
        if deg >= TAIL_DEGREE_CAP:
            raise ValueError(
                f"tail fit needs degree > {TAIL_DEGREE_CAP}; m_pole={m_pole} too small "
                f"for interval [{lo}, {hi}]"
            )
        deg = min(2 * deg, TAIL_DEGREE_CAP)
    above = np.nonzero(mags > target)[0]
    n_cheb = int(above[-1]) if above.size else 0
    return TailSpec(
        m_pole=m_pole,
        interval=(lo, hi),
        cheb_coeffs=coeffs[: n_cheb + 1].copy(),
        target_accuracy=target,
        beta=beta,
    )


def eval_tail_cheb(tail: TailSpec, x):
    """Evaluate the fitted tail by Clenshaw recurrence; vectorized over x."""
    lo, hi = tail.interval
    x = np.asarray(x, dtype=float)
    s = (2.0 * x - (lo + hi)) / (hi - lo)
    c = tail.cheb_coeffs
    b1 = np.zeros_like(s)
    b2 = np.zeros_like(s)
    for ck in c[:0:-1]:
        b1, b2 = ck + 2.0 * s * b1 - b2, b1
    return c[0] + s * b1 - b2


def eval_scalar_with_tail(ps: PoleSet, tail: TailSpec | None, x):
    """Scalar density of a pole set including its Chebyshev tail if present."""
    from .contour import eval_scalar

    out = eval_scalar(ps, x)
    if ps.scheme == SCHEME_MATSUBARA:
        if tail is None:
            raise ValueError("Matsubara pole set requires its tail")
        if tail.m_pole != ps.tail_m_pole:
            raise ValueError("tail m_pole does not match the pole set")
        out = out - eval_tail_cheb(tail, x)
    return out
