"""Closed-form and recursive predictions used as oracles for the simulators."""
from ._special import lgamma_ratio
from .clusters import P_CRITICAL, ClusterTheory, MgCriticality, mg_cluster_dist, mg_criticality
from .growing import (
    CORR_PEAK_Y,
    GnTheory,
    HeteroTheory,
    StretchedFit,
    age_degree,
    age_degree_bin,
    corr_closed,
    corr_limits,
    corr_recursion,
    corr_scaled,
    diameter_estimate,
    gn_degree_dist,
    gn_hetero_dist,
    hetero_mu,
    in_component_dist,
    linear_nk,
    mean_degree_at_age,
    mean_degree_bin,
    out_component_dist,
    solve_mu,
    stretched_exp_fit,
    stretched_exp_shape,
    tau_time,
)
from .web import (
    DirectedTheory,
    MgExponents,
    mg_exponents,
    mg_inout,
    mg_inout_recursion,
    mg_joint,
    mg_joint_asymptote,
    mg_joint_recursion,
    wg_closed_form,
    wg_exponents,
    wg_joint,
    wg_recursion,
    wg_shorthand,
)

__all__ = [name for name in dir() if not name.startswith("_")]
