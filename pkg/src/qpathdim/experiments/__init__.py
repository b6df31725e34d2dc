from .config import load_config, validate_config
from .output import emit_results
from .runner import ResultTable, run_experiment

__all__ = ["ResultTable", "emit_results", "load_config", "run_experiment", "validate_config"]
