"""Sparse low-rank identification of dynamical systems from time series.

The core pieces are a delta-truncated SVD toolkit (:mod:`.linalg`), a
column-wise sparse least-squares solver (:mod:`.solver`), Hankel trajectory
matrices with group actions (:mod:`.trajectory`), the identification degree
diagnostic (:mod:`.obstruction`), lag-embedded linear models
(:mod:`.sdsi`) and dictionary regression of continuous-time dynamics
(:mod:`.dictionary`).
"""

from .datagen import (
    DuffingParams,
    NoiseSpec,
    add_noise,
    d3_representation,
    duffing_network,
    nlse_grid,
    triangle_wave,
)
from .dictionary import (
    FeatureMap,
    FiniteDiffSpec,
    IdentifiedDynamics,
    build_feature_matrix,
    finite_diff,
    identify_dynamics,
    identify_ode,
    simulate,
)
from .integrate import DivergenceError
from .io import read_csv, resample_uniform, write_csv, write_report
from .linalg import (
    ZeroDeltaRankError,
    delta_rank,
    economy_svd,
    lstsq,
    s_constant,
    truncation_projector,
)
from .obstruction import DegreeReport, degree, drk, grading_set, lag_upper_bound
from .sdsi import (
    BoundReport,
    SdsiModel,
    commutator_norms,
    identify,
    identify_reduced,
    predict,
    predict_orbit,
    reduced_predict,
    rmse,
    symmetrize,
)
from .solver import SolverConfig, SparseSolution, slr_solve, support_select, verify_bound
from .trajectory import (
    GroupRep,
    TimeSeries,
    equivariant_hankel,
    hankel,
    kron_lift,
    trivial_group,
    validate_group,
)

__version__ = "0.1.0"
