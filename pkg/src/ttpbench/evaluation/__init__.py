"""Cross-validation, metrics and the experiment grid."""

from .grid import (
    Aggregate, CellFailure, CellResult, GridRun, METRICS, RESULTS_HEADER, aggregate,
    derive_seed, fold_means, grid_keys, read_results, run_grid,
)
from .metrics import (
    FoldPlan, binary_auc, confusion, format_abc, gain_percent, macro_auc, macro_prf,
    percent, round_half_up, stratified_kfold,
)

__all__ = [
    "Aggregate", "CellFailure", "CellResult", "FoldPlan", "GridRun", "METRICS", "RESULTS_HEADER",
    "aggregate", "binary_auc", "confusion", "derive_seed", "fold_means", "format_abc",
    "gain_percent", "grid_keys", "macro_auc", "macro_prf", "percent", "read_results",
    "round_half_up", "run_grid", "stratified_kfold",
]
