"""Decay-exponent evaluation for verification sweeps"""
from typing import Dict, Sequence, Tuple

import numpy as np

from brlab.errors import InputError


class DecayEvaluator:
    """Fit base-2 log-linear decay laws and score them"""

    @staticmethod
    def calculate_r2(actual: np.ndarray, predicted: np.ndarray) -> float:
        """Calculate R-squared score"""
        ss_res = np.sum((actual - predicted) ** 2)
        ss_tot = np.sum((actual - np.mean(actual)) ** 2)
        r2 = 1 - (ss_res / ss_tot) if ss_tot != 0 else 0.0
        return float(r2)

    @staticmethod
    def validate_series(xs: Sequence[float], ys: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise InputError("series must be two equal-length 1-D sequences")
        if x.size < 3:
            raise InputError(f"need at least 3 points to fit a decay, got {x.size}")
        if not np.all(np.isfinite(y)) or np.any(y <= 0):
            raise InputError("decay fit requires finite values y > 0")
        if np.any(np.diff(x) <= 0):
            raise InputError("series must be strictly increasing in the sweep variable")
        return x, y

    @staticmethod
    def fit_log2(xs: Sequence[float], ys: Sequence[float]) -> Dict[str, float]:
        """Least squares of log2 y against x"""
        x, y = DecayEvaluator.validate_series(xs, ys)
        log_y = np.log2(y)
        slope, intercept = np.polyfit(x, log_y, 1)
        r2 = DecayEvaluator.calculate_r2(log_y, slope * x + intercept)
        return {"slope": float(slope), "intercept": float(intercept), "r2": r2}

    @staticmethod
    def passes(fit: Dict[str, float], threshold: float, min_r2: float) -> bool:
        return fit["slope"] <= threshold and fit["r2"] >= min_r2
