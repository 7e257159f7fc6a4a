"""Approximate Kahler-Einstein fillings of pseudohermitian 3-manifolds.

Exact truncated-series construction of the filling complex structure and
metric over homogeneous CR structures, frame-based curvature with the
self-dual/anti-self-dual split, renormalized characteristic integrands with
their boundary terms, and the derived CR invariants.
"""

from ._kernels import BACKEND as kernel_backend
from .curvature import (
    CurvatureModel,
    CurvatureSnapshot,
    FrameBrackets,
    FrameMetric,
    ch2_metric,
    frame_brackets,
    identity_metric,
    levi_civita,
    model_connection_oracle,
    riemann_snapshot,
    round_s4_snapshot,
)
from .filling import (
    HoloCoframe,
    KahlerForm,
    KEPotentialData,
    PhiSeries,
    approximate_ke_metric,
    canonical_curvature_forms,
    holomorphic_coframe,
    kahler_form,
    ke_potential,
    metric_from_kahler,
    solve_complex_structure,
)
from .invariants import (
    CartanFit,
    JSection,
    PerturbationK,
    cartan_tensor,
    extract_W2minus,
    fit_cartan_constant,
    inject_perturbation,
    mu_from_nu,
    nu_from_filling,
    variation_integrand,
)
from .renorm import (
    BoundaryReport,
    CollarGeometry,
    EtaProvider,
    S_functional,
    T_functional,
    boundary_report,
    char_integrand,
    gb_integrand,
    sig_integrand,
)
from .series import FormalSeries, decay_fit, radial_antiderivative
from .structures import (
    DeformationTensor,
    PseudohermitianStructure,
    TorsionEndomorphism,
    deform_cr,
    derive_webster_data,
    heisenberg,
    load_structure,
    make_structure,
    s3_standard,
    structure_from_json,
    structure_to_json,
    su2_torsion,
    sublaplacian,
    validate_structure,
)

__version__ = "0.1.0"
