"""Phase analysis of multivariable LTI systems.

Matrix phases from numerical ranges, MIMO Bode data with phase, small-gain
and small-phase stability certificates, and LMI tests for phase bounds.
"""

from .errors import *  # noqa: F401,F403
from .feedback import (
    Certificate,
    angular_passivity_index,
    closed_loop_stable,
    gang_of_four,
    phase_margin,
    series,
    small_gain_certify,
    small_phase_certify,
)
from .lmikit import (
    CurveSpec,
    HermitianLmi,
    SdpResult,
    assemble_gkyp,
    assemble_kyp,
    bounded_real_lmi,
    half_cramped_lmi,
    realify,
    sectored_real_lmi,
    solve_feasibility,
    verify_certificate,
)
from .matphase import (
    HullPolygon,
    PhaseVector,
    SectorInfo,
    crampedness,
    in_cone,
    log_majorizes,
    majorizes,
    matrix_phases,
    numerical_range_boundary,
    phase_bounds,
    product_eig_angles,
    singular_values,
)
from .response import (
    BodeSample,
    FrequencyGrid,
    SystemClassification,
    adaptive_grid,
    bode_data,
    classify,
    hinf_norm,
    hinf_phase,
    is_frequencywise_cramped,
    is_half_cramped,
    positive_freq_hull,
)
from .sslti import StateSpace, freq_response, is_hurwitz, minimal_realization, realize
from .tfparse import RationalTransferMatrix, eval_tfm, format_transfer_matrix, parse_transfer_matrix

__version__ = "0.1.0"
