from .experiment import ExperimentConfig, input_schedule, run_experiment, symbol_rate
from .policy import MitigationPolicy, apply_policy, resolve_policy
from .samples import SampleSet, parse_csv, read_csv, to_csv, write_csv

__all__ = [
    "ExperimentConfig",
    "MitigationPolicy",
    "SampleSet",
    "apply_policy",
    "input_schedule",
    "parse_csv",
    "read_csv",
    "resolve_policy",
    "run_experiment",
    "symbol_rate",
    "to_csv",
    "write_csv",
]
