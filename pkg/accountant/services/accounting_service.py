# accountant/services/accounting_service.py
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from django.core.cache import cache

from accountant import bounds
from accountant.conf import setting
from accountant.domain import RdpPoint, ShuffleParams
from accountant.exceptions import DomainError, require
from accountant.renyi import shuffle_rdp_profile

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['epsilon0', 'n', 'lambda', 'method', 'epsilon', 'error_bound', 'flags']
METHODS = ('exact', 'corollary2', 'theorem2_gdp', 'girgis_upper', 'girgis_lower', 'feldman_ref')


@dataclass(frozen=True)
class OutputRecord:
    """One (params, order, method) row of a comparison"""
    epsilon0: float
    n: int
    lam: float
    method: str
    epsilon: float
    error_bound: float = 0.0
    flags: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        require(self.method in METHODS, f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")

    @classmethod
    def from_point(cls, params: ShuffleParams, method: str, point: RdpPoint) -> 'OutputRecord':
        return cls(params.epsilon0, params.n, point.lam, method, point.epsilon, point.error_bound, point.flags)

    def sort_key(self):
        return self.epsilon0, self.lam, self.method, self.n

    def as_dict(self) -> dict:
        return {
            'epsilon0': self.epsilon0,
            'n': self.n,
            'lambda': self.lam,
            'method': self.method,
            'epsilon': self.epsilon,
            'error_bound': self.error_bound,
            'flags': list(self.flags),
        }

    def as_row(self) -> dict:
        row = self.as_dict()
        row['flags'] = ';'.join(self.flags)
        return row


def records_frame(records: Sequence[OutputRecord]) -> pd.DataFrame:
    return pd.DataFrame([record.as_row() for record in records], columns=CSV_COLUMNS)


def records_to_csv(records: Sequence[OutputRecord], target=None) -> Optional[str]:
    """Write to target, or return the CSV text when target is None"""
    return records_frame(records).to_csv(target, index=False)


class AccountingService:
    """Service class for exact and closed-form shuffle-model accounting"""

    CLOSED_FORMS: Dict[str, Callable[[ShuffleParams, float], RdpPoint]] = {
        'corollary2': bounds.corollary2_rdp,
        'theorem2_gdp': lambda params, lam: bounds.gdp_to_rdp(bounds.theorem2_gdp(params), lam),
        'girgis_upper': bounds.girgis_upper,
        'girgis_lower': bounds.girgis_lower,
        'feldman_ref': bounds.feldman_ref,
    }

    def __init__(self, tail_tol: Optional[float] = None, workers: Optional[int] = None):
        self.tail_tol = setting('DEFAULT_TAIL_TOL') if tail_tol is None else tail_tol
        self.workers = workers or setting('WORKERS')

    def _cache_key(self, params: ShuffleParams, lambdas: Sequence[float]) -> str:
        orders = ','.join(repr(float(lam)) for lam in lambdas)
        return f"shuffle_rdp:{params.epsilon0!r}:{params.n}:{self.tail_tol!r}:{orders}"

    def exact_profile(self, params: ShuffleParams, lambdas: Sequence[float]) -> List[RdpPoint]:
        """Exact RDP at several orders, memoised in the configured cache"""
        key = self._cache_key(params, lambdas)
        cached = cache.get(key)
        if cached is not None:
            return cached
        profile = shuffle_rdp_profile(params, lambdas, self.tail_tol)
        cache.set(key, profile, setting('CACHE_TIMEOUT'))
        return profile

    def exact_point(self, params: ShuffleParams, lam: float) -> RdpPoint:
        return self.exact_profile(params, [lam])[0]

    def closed_form(self, method: str, params: ShuffleParams, lam: float) -> Optional[RdpPoint]:
        """A closed-form bound, or None where the method does not apply"""
        if method == 'girgis_upper' and not float(lam).is_integer():
            logger.warning(f"skipping girgis_upper at non-integer lambda={lam}")
            return None
        if method == 'corollary2' and lam < 2:
            logger.warning(f"skipping corollary2 at lambda={lam} < 2")
            return None
        if method in ('corollary2', 'theorem2_gdp', 'girgis_upper') and params.n < 2:
            logger.warning(f"skipping {method} at n={params.n} < 2")
            return None
        return self.CLOSED_FORMS[method](params, lam)

    def _rows_for(self, params: ShuffleParams, lambdas: Sequence[float], methods: Sequence[str]) -> List[OutputRecord]:
        rows = []
        if 'exact' in methods:
            for point in self.exact_profile(params, lambdas):
                rows.append(OutputRecord.from_point(params, 'exact', point))
        for method in methods:
            if method == 'exact':
                continue
            for lam in lambdas:
                point = self.closed_form(method, params, lam)
                if point is not None:
                    rows.append(OutputRecord.from_point(params, method, point))
        return rows

    def compare_grid(self, epsilon0s: Iterable[float], ns: Iterable[int], lambdas: Iterable[float],
                     methods: Iterable[str]) -> List[OutputRecord]:
        """One row per grid point per method, sorted by (epsilon0, lambda, method)"""
        methods = list(dict.fromkeys(methods))
        lambdas = sorted({float(lam) for lam in lambdas})
        grid = [ShuffleParams(eps0, n) for eps0, n in product(sorted(set(epsilon0s)), sorted(set(ns)))]
        require(len(methods) > 0, "at least one method is needed")
        require(len(lambdas) > 0 and len(grid) > 0, "the comparison grid is empty")
        for method in methods:
            if method not in METHODS:
                raise DomainError(f"unknown method {method!r}; choose from {', '.join(METHODS)}",
                                  code='unknown_method')

        logger.info(f"comparing {len(methods)} methods over {len(grid)} parameter points "
                    f"and {len(lambdas)} orders with {self.workers} workers")
        with ThreadPoolExecutor(max_workers=max(1, min(self.workers, len(grid)))) as pool:
            chunks = list(pool.map(lambda params: self._rows_for(params, lambdas, methods), grid))
        records = [record for chunk in chunks for record in chunk]
        return sorted(records, key=OutputRecord.sort_key)


def preset_grid(name: str) -> dict:
    """Comparison grids for the two standard sweeps"""
    if name == 'fig2':
        return {
            'epsilon0s': np.linspace(0.1, 3.0, 15).tolist(),
            'ns': [10_000],
            'lambdas': [4.0],
        }
    if name == 'fig3':
        return {'epsilon0s': [2.0], 'ns': [10_000], 'lambdas': [float(lam) for lam in range(2, 17)]}
    raise DomainError(f"unknown preset {name!r}", code='unknown_preset')
