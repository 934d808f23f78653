"""q-Meyer-König–Zeller operators, their Durrmeyer variant, and Abel-summed
Korovkin diagnostics."""

from .functions import Func1D, abshalf, by_name, const, e0, e1, e2, sinpi
from .qcalc import (
    BudgetExhausted,
    QDomainError,
    SeriesResult,
    TruncationPolicy,
    q_beta,
    q_binomial,
    q_factorial,
    q_integer,
    q_integral,
    q_pochhammer,
)
from .summability import (
    QSequence,
    abel_profile,
    abel_transform,
    classical_conditions_check,
    constant_qseq,
    density_estimate,
    gen_cube_qseq,
    gen_prime_qseq,
)
from .operators import (
    OperatorFamily,
    central_second_moment,
    durrmeyer_classical,
    durrmeyer_q,
    mkz_classical,
    mkz_q,
    moment_report,
)
from .approx_lab import (
    korovkin_error_norm,
    korovkin_run,
    korovkin_runs,
    modulus_of_continuity,
    omega_subadditivity_check,
    phi,
    rate_report,
)

__version__ = "0.1.0"
