"""Rational pole expansions of the Fermi-Dirac operator function.

Builds simple-pole approximations of the finite-temperature density
matrix by elliptic contour quadrature and by Matsubara multipole /
equivalent-charge compression, applies them to dense symmetric
Hamiltonians, and benchmarks pole counts against exact diagonalization
on a 2D tight-binding model.
"""

from .contour import (
    MapParams,
    PoleSet,
    build_map,
    eval_scalar,
    gapless_pole_set,
    gapped_pole_set,
    quadrature_nodes,
    sign_pole_set,
)
from .density import (
    DensityResult,
    NpoleSearchPolicy,
    apply_pole_expansion,
    delta_rho_rel,
    exact_density,
    minimal_npole,
    spectral_density,
)
from .lattice import (
    LatticeSpec,
    SpectralWindow,
    build_hamiltonian,
    chemical_potential_for_count,
    spectral_window,
)
from .linalg import EigDecomposition, matrix_function, solve_shifted, sym_eig
from .multipole import (
    EquivalentChargeSet,
    MultipoleConfig,
    MultipoleExpansion,
    TailSpec,
    TikhonovParams,
    build_equivalent_charges,
    build_multipole_expansion,
    build_simple_pole_expansion,
    chebyshev_tail_fit,
    digamma_tail_scalar,
    matsubara_partial_scalar,
)
from .special import (
    EllipticModulus,
    complete_elliptic_k,
    digamma_complex,
    elliptic_modulus,
    fermi_scalar,
    jacobi_sn_cn_dn,
)

__version__ = "0.1.0"
