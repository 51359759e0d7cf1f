"""Ghost imaging with pseudo-thermal speckle light."""

from ._ghostsim import (
    ConfigError,
    Grid,
    InsufficientDataError,
    IoError,
    SamplingError,
    ScenarioConfig,
    SpeckleSpec,
    ValidationError,
    cell_model_contrast,
    default_config,
    find_peaks,
    generate_speckle,
    intensity_histogram_test,
    parse_config_text,
    predicted_contrast,
    propagate,
    run,
    run_scenario,
    scenario_names,
    version,
    write_config,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "Grid",
    "InsufficientDataError",
    "IoError",
    "SamplingError",
    "ScenarioConfig",
    "SpeckleSpec",
    "ValidationError",
    "cell_model_contrast",
    "default_config",
    "find_peaks",
    "generate_speckle",
    "intensity_histogram_test",
    "parse_config_text",
    "predicted_contrast",
    "propagate",
    "run",
    "run_scenario",
    "scenario_names",
    "version",
    "write_config",
]
