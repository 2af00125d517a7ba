"""Python access to the fdmimo multi-layer precoding simulator."""

from ._fdmimo import (
    FdmimoError,
    config_keys,
    d_max,
    default_config,
    hermitian_eig,
    noise_power_dbm,
    normalize_config,
    one_ring_az_cov,
    one_ring_el_cov,
    percentile,
    rank_angle_law,
    run,
    single_user_rate,
    sweep,
    validate,
    zf_direction,
)

__all__ = [
    "FdmimoError",
    "config_keys",
    "d_max",
    "default_config",
    "hermitian_eig",
    "noise_power_dbm",
    "normalize_config",
    "one_ring_az_cov",
    "one_ring_el_cov",
    "percentile",
    "rank_angle_law",
    "run",
    "single_user_rate",
    "sweep",
    "validate",
    "zf_direction",
]
