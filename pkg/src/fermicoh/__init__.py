"""Grassmann-number coherent states for fermions and their Bogoliubov diagonalization."""

from fermicoh.berezin import IntegrationMeasure, integrate, integrate_all, integrate_pair, left_derivative
from fermicoh.bogoliubov import (
    BogoliubovTransform,
    DiagonalForm,
    QuadraticHamiltonian,
    build_quadratic,
    check_canonicity,
    diagonalize,
    matrix_diagonalization,
    solve_theta,
)
from fermicoh.errors import (
    ConfigurationError,
    DomainError,
    FermicohError,
    NotApplicableError,
    SubstitutionError,
    UsageError,
    VerificationError,
)
from fermicoh.fock import (
    CoherentLabel,
    FockOperator,
    FockSpace,
    FockVector,
    ModeSystem,
    inner,
    is_physical,
    outer,
    phase_variance,
    resolution_of_identity,
    u1_rotate,
)
from fermicoh.grassmann import (
    GeneratorId,
    GrassmannAlgebra,
    GrassmannElement,
    Parity,
    conjugate,
    exp,
    generator,
    multiply,
    parity,
    render,
    substitute_bilinears,
)
from fermicoh.physics import PhysicalParams, coupling, dispersion, to_dimensionless
from fermicoh.verification import IdentityResult, run_suite

__version__ = "0.1.0"
