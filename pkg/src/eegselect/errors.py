"""Error taxonomy shared by the package and the CLI exit codes."""


class ConfigError(Exception):
    """Invalid configuration or hyperparameters (CLI exit code 1)."""


class DataError(Exception):
    """Unreadable, malformed or inconsistent data (CLI exit code 2)."""


class DegenerateBaselineError(ValueError):
    """Baseline band power below the floor; the ratio in the task-related
    desynchronisation measure would blow up. Callers substitute a
    worst-case / neutral score instead."""
