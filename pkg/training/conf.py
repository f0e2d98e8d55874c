# training/conf.py
from typing import Any, Dict

from django.conf import settings

DEFAULTS = {
    'ETA': 0.05,
    'EPOCHS': 50,
    'BLOCKS': 100,
    'CLIP': 10.0,
    'SAMPLES': 6000,
    'FEATURES': 2,
}


def get_config() -> Dict[str, Any]:
    """TRAINING_CONFIG merged over the defaults"""
    config = dict(DEFAULTS)
    config.update(getattr(settings, 'TRAINING_CONFIG', {}))
    return config


def setting(key: str) -> Any:
    return get_config()[key]
