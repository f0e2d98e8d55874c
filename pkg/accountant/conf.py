# accountant/conf.py
from typing import Any, Dict

from django.conf import settings

DEFAULTS = {
    'DEFAULT_TAIL_TOL': 1e-15,
    'WORKERS': 4,
    'CONSISTENCY_TOL': 1e-9,
    'TIE_LOG_TOL': 1e-12,
    'GAUSSIAN_CURVE_TOL': 1e-6,
    'QUAD_EPSABS': 1e-12,
    'MC_CHUNKS': 8,
    'BOOTSTRAP_RESAMPLES': 200,
    'PLUGIN_MAX_N': 200,
    'PLUGIN_MIN_SAMPLES': 100_000,
    'BETA_MIN_SAMPLES': 10_000,
    'CACHE_TIMEOUT': 3600,
}


def get_config() -> Dict[str, Any]:
    """ACCOUNTANT_CONFIG merged over the defaults"""
    config = dict(DEFAULTS)
    config.update(getattr(settings, 'ACCOUNTANT_CONFIG', {}))
    return config


def setting(key: str) -> Any:
    return get_config()[key]
