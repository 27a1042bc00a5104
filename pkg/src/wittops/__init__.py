"""Exact arithmetic for truncated p-typical Witt vectors over F_p[T_1..T_n]
and the differential operators that act on them, with dual-route
implementations of every explicit construction and a mechanical
verification suite."""

from .exactnum import (
    ModExp,
    OrbitDatum,
    binomial_mod,
    binomial_shift_congruence,
    multinomial_reduction_congruence,
    orbit_enumerate,
    p_valuation,
)
from .poly import (
    DiffOpOnA,
    Fp,
    MultiPoly,
    NotAPthPower,
    Zmod,
    ZZ,
    diffop_apply,
    divided_power_apply,
    format_poly,
    parse_poly,
)
from .witt import (
    WittVec,
    format_witt,
    frobenius,
    parse_witt,
    restrict,
    teichmuller,
    universal_witt_polynomials,
    verschiebung,
    vmul,
    map_along,
    witt_add,
    witt_mul,
    witt_op_universal,
    witt_scalar,
)
from .embed import (
    NotInImage,
    check_filtration_inclusions,
    decode,
    embed,
    f_degree_mod,
    in_image,
    membership,
)
from .hslift import (
    HSDerivation,
    canonical_lift,
    canonical_lift_embed,
    canonical_lift_orbit,
    check_frobenius_intertwine,
    check_restriction_descent,
)
from .wdo import (
    ContextOverflow,
    NotAnOperator,
    WDONormalForm,
    WDOTerm,
    WorkingContext,
    basic_operator,
    check_leibniz_mod_p,
    commutator_expansion,
    compose,
    evaluate,
    frobenius_conjugate,
    ideal_degree,
    iterate_factorial_unit,
    reconstruct,
    reexpress_at_level,
)
from .frobphi import (
    APPolynomial,
    ConvergenceFailure,
    FrobLift,
    NoFit,
    PhiMap,
    ap_interpolate,
    bimodule_factorization_check,
    gamma_approx,
    lift_difference_order_check,
    phi_apply,
    projector_normal_form,
    projector_semantic,
    residue_class_projector,
)
from .suites import SuiteConfig, SuiteReport, run_suite

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
