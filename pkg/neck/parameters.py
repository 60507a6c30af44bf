"""
Parameter records shared by the configuration layer and the numerical modules.
"""
from dataclasses import dataclass

from neck.utils.errors import WeightWindowError


DELTA0_DEFAULT = 0.6

DISK_MARGIN = 0.05
SERIES_ABS_TOL = 1e-14
SERIES_MAX_TERMS = 10**6


@dataclass(frozen=True)
class SeriesSettings:
    """Stopping rule and disk margin of the hypergeometric series summation."""
    abs_tol: float = SERIES_ABS_TOL
    max_terms: int = SERIES_MAX_TERMS
    margin: float = DISK_MARGIN


def check_weight_scales(T, C3):
    if not 0.0 < C3 <= 1.0:
        raise WeightWindowError(f"C3 = {C3:g} not in (0, 1]")
    if T * C3 < 4.0:
        raise WeightWindowError(f"T = {T:g} below 4 / C3 = {4.0 / C3:g}")


@dataclass(frozen=True)
class WeightSpec:
    delta: float
    nu: float
    mu: float
    alpha: float
    T: float
    C3: float
    k: int = 0
    delta0: float = DELTA0_DEFAULT

    def validate(self):
        """
        Raises:
            WeightWindowError: a parameter outside its window, or T, C3 leaving the W zones unordered.
        """
        if not 0.0 < self.delta < self.delta0:
            raise WeightWindowError(f"delta = {self.delta:g} not in (0, {self.delta0:g})")
        if not -2.0 < self.nu < -1.5:
            raise WeightWindowError(f"nu = {self.nu:g} not in (-2, -3/2)")
        lower = max(self.delta, self.nu + 2.0)
        if not lower < self.mu < 1.0:
            raise WeightWindowError(f"mu = {self.mu:g} not in ({lower:g}, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise WeightWindowError(f"alpha = {self.alpha:g} not in (0, 1)")
        if self.k not in (0, 1, 2):
            raise WeightWindowError(f"derivative order k = {self.k} not in {{0, 1, 2}}")
        check_weight_scales(self.T, self.C3)
        return self
