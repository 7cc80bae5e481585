"""Symbolic model, stratification and plane dynamics for exp(z) - 1."""

from .address import (
    ConstantTail,
    EscapeClass,
    ExternalAddress,
    LinearTail,
    claim_cap_witness,
    claim_density_witness,
    coordinate,
    in_x,
    linear_address,
    parse_address,
    product_metric,
    zero_address,
)
from .density import (
    GraphPoint,
    erdos_transform,
    graph_point,
    nowhere_dense_approach,
    pair_metric,
    potential_target,
)
from .model import (
    DivergedBeyond,
    FailsAt,
    Finite,
    ModelPoint,
    OkForever,
    OkUpTo,
    big_f,
    big_f_inv,
    in_model_julia,
    min_potential,
    min_potential_oracle,
    model_step,
    psi,
    shift,
    t_star,
)
from .plane import (
    RayPoint,
    band_check,
    classify_orbit,
    endpoint,
    find_attracting_cycle,
    iterate,
    julia_membership,
    left_halfplane_step,
    trace_ray,
)
from .strata import (
    StratumIndex,
    branch_probe,
    certify_stratification,
    exhibit_successor,
    in_tree,
    stratum_membership,
    stratum_nonempty,
)

__version__ = "0.1.0"
