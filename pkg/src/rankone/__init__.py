"""Exact (C,F)-parameter calculus for rank-one transformations of the integers."""

from .params import (
    CFStage,
    FiniteIntSet,
    MeasureReport,
    ParamSpec,
    SpacerMap,
    builtin_spec,
    cylinder_measure,
    heights,
    measure,
    realize_stage,
    spec_from_json,
    spec_to_json,
    standardness_check,
    validate,
)
from .spacers import adapted_transform, diamond, integral, is_periodic, stage_of
from .decide import (
    AnalysisReport,
    Verdict,
    arithmetic_window,
    classify,
    commensurate_isomorphic,
    growing_telescope,
    inverse_isomorphic,
    inverse_params,
    is_bounded,
    is_rigid,
    is_totally_ergodic,
    power_ergodic,
    telescope,
)
from .polyiso import (
    IntervalF,
    SetPolynomial,
    TopoWitness,
    commensurate_topo_iso,
    pad_interval_supports,
    poly_mul_checked,
    topo_inverse_iso,
    topo_iso_search,
    verify_witness,
)
from .simulate import (
    CorrelationPoint,
    PointCoords,
    Tower,
    correlation,
    cylinder_levels,
    expansive_transform,
    rigidity_scan,
    symbolic_code,
    weak_limit_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
