"""Continuation of homoclinic orbits in the truncated boundary-value setting."""

from .bvp import DEGREE, BvpMesh, BvpProblem, bvp_jacobian, bvp_residual, graded_grid
from .branch import (
    Branch,
    BranchPoint,
    ContinuationConfig,
    ContinuationError,
    SpecialPoint,
    SwitchResult,
    continue_both_ways,
    continue_branch,
    detect_special_points,
    initial_mesh,
    point_measures,
    solve_homoclinic,
    switch_branch,
)
from .io import CSV_COLUMNS, branch_to_csv, branch_to_json, write_branch
from .presets import PRESETS, DiagramPreset, run_preset

__all__ = [
    "DEGREE", "BvpMesh", "BvpProblem", "bvp_jacobian", "bvp_residual", "graded_grid",
    "Branch", "BranchPoint", "ContinuationConfig", "ContinuationError", "SpecialPoint",
    "SwitchResult", "continue_both_ways", "continue_branch", "detect_special_points",
    "initial_mesh", "point_measures", "solve_homoclinic", "switch_branch",
    "CSV_COLUMNS", "branch_to_csv", "branch_to_json", "write_branch",
    "PRESETS", "DiagramPreset", "run_preset",
]
