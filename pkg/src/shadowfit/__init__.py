"""Functional classical shadows for single-qubit polarimetry."""

from .data import CountTable, read_table, write_table
from .fit import FitReport, OptimizerConfig, fit_cs, fit_fcs
from .loss import (
    cs_pointwise_fit,
    fcs_loss,
    local_cs_loss,
    mixed_loss_terms,
    select_mixed_hypothesis,
    true_loss,
)
from .models import ProfileModel, TrueProfile, evaluate
from .qubit import (
    Projector,
    PureHypothesis,
    density_from_hypothesis,
    helstrom_projector,
    pure_fidelity,
    trace_distance,
)
from .shadows import apply_channel, invert_channel, shadow_norm_sq, snapshot_fidelity, snapshot_from_outcome
from .simulate import SimConfig, bbo_profile, outcome_probability, simulate

__version__ = "0.1.0"
