"""
Special-function kernels: Gamma, Pochhammer symbols, the Gauss hypergeometric series on
the unit disk, its analytic continuation to |x| > 1 and the Gauss value at x = 1/2.

Everything here is a pure function of its arguments and of the active SeriesSettings,
which the command line installs with `using_series_settings`.
"""
import cmath
import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from neck.parameters import SeriesSettings
from neck.utils.errors import (
    BranchCutError,
    DegenerateParametersError,
    DomainError,
    PoleError,
    SeriesConvergenceError,
)
from neck.utils.logger import Logger


ILL_CONDITIONED = 1e8

_ACTIVE_SETTINGS = [SeriesSettings()]

LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def series_settings():
    return _ACTIVE_SETTINGS[-1]


@contextmanager
def using_series_settings(settings):
    """Make `settings` the default of every series evaluation inside the block."""
    _ACTIVE_SETTINGS.append(settings)
    try:
        yield settings
    finally:
        _ACTIVE_SETTINGS.pop()


def is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def pochhammer(n, k):
    """Rising factorial (n)_k = n(n+1)...(n+k-1), with (n)_0 = 1."""
    if k < 0 or int(k) != k:
        raise ValueError(f"pochhammer order must be a nonnegative integer, got {k}")
    result = 1.0
    for i in range(int(k)):
        result *= n + i
    return result


def _sin_pi(x):
    # reduce mod 2 first so large |x| keeps its digits
    r = x - 2.0 * math.floor(x / 2.0)
    return math.sin(math.pi * r)


def gamma_fn(x):
    """
    Euler Gamma by the Lanczos approximation (g = 7, nine coefficients), with the
    reflection formula below 1/2.

    Raises:
        PoleError: at x = 0, -1, -2, ...
    """
    x = float(x)
    if is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at {x:g}")

    if x < 0.5:
        return math.pi / (_sin_pi(x) * gamma_fn(1.0 - x))

    x -= 1.0
    a = LANCZOS_COEFFICIENTS[0]
    t = x + LANCZOS_G + 0.5
    for i in range(1, LANCZOS_G + 2):
        a += LANCZOS_COEFFICIENTS[i] / (x + i)
    return math.sqrt(2.0 * math.pi) * math.exp((x + 0.5) * math.log(t) - t) * a


def rgamma(x):
    """1/Gamma(x), which is entire: exactly zero at the poles of Gamma."""
    if is_nonpositive_integer(x):
        return 0.0
    return 1.0 / gamma_fn(x)


@dataclass(frozen=True)
class HypergeomParams:
    """
    Parameters (alpha, beta, gamma) of F(alpha, beta, gamma; x), stored with alpha >= beta
    (F is symmetric in its first two arguments). `lam` is the eigenvalue the triple was
    built from, when there is one.
    """
    alpha: float
    beta: float
    gamma: float
    lam: Optional[float] = None

    def __post_init__(self):
        if is_nonpositive_integer(self.gamma):
            raise PoleError(f"gamma = {self.gamma:g} is a nonpositive integer")
        if self.alpha < self.beta:
            alpha, beta = self.beta, self.alpha
            object.__setattr__(self, 'alpha', alpha)
            object.__setattr__(self, 'beta', beta)

    def shifted(self, n=1):
        """Parameters of the n-th derivative series (alpha+n, beta+n, gamma+n)."""
        return HypergeomParams(self.alpha + n, self.beta + n, self.gamma + n, self.lam)

    @property
    def exponent_gap(self):
        return self.alpha - self.beta


@dataclass(frozen=True)
class ContinuationBranch:
    """
    Logarithm used by the continued series: cut along the negative real axis of x,
    arg x in (-pi, pi], and log(-x) = log|x| + i(arg x - pi).
    """
    half_plane: int = 1

    def __post_init__(self):
        if self.half_plane not in (1, -1):
            raise ValueError(f"half_plane must be +1 or -1, got {self.half_plane}")

    @staticmethod
    def of(x):
        return ContinuationBranch(1 if complex(x).imag >= 0 else -1)

    @staticmethod
    def log_minus_x(x):
        x = complex(x)
        if x == 0:
            raise DomainError("log(-x) is undefined at x = 0")
        return complex(math.log(abs(x)), cmath.phase(x) - math.pi)

    def minus_x_power(self, x, exponent):
        """(-x)**exponent on this branch."""
        return cmath.exp(exponent * self.log_minus_x(x))

    def phase(self, exponent):
        """Phase factor multiplying a continued term in the lower half-plane."""
        if self.half_plane > 0:
            return 1.0
        return cmath.exp(-2j * math.pi * exponent)


class SeriesResult(NamedTuple):
    value: complex
    terms: int
    condition: float


def hyp2f1_disk(p, x, abs_tol=None, max_terms=None, margin=None):
    """
    Partial sums of the hypergeometric series inside |x| < 1 - margin.

    The sum stops at the first term whose modulus is below abs_tol times the modulus of
    the partial sum. The returned condition number is sum|term| / |sum|.

    Raises:
        DomainError: |x| >= 1 - margin.
        SeriesConvergenceError: more than max_terms terms were needed.
    """
    settings = series_settings()
    abs_tol = settings.abs_tol if abs_tol is None else abs_tol
    max_terms = settings.max_terms if max_terms is None else max_terms
    margin = settings.margin if margin is None else margin
    if abs(x) >= 1.0 - margin:
        raise DomainError(f"|x| = {abs(x):.6g} is outside the series disk (margin {margin})")

    a, b, c = p.alpha, p.beta, p.gamma
    term = 1.0
    total = 1.0
    magnitude = 1.0
    k = 0
    while True:
        term *= (a + k) * (b + k) / ((k + 1) * (c + k)) * x
        k += 1
        total += term
        magnitude += abs(term)
        if abs(term) <= abs_tol * abs(total):
            break
        if k >= max_terms:
            raise SeriesConvergenceError(f"hypergeometric series did not converge in {max_terms} terms at x = {x}")

    condition = magnitude / abs(total) if total != 0 else math.inf
    if condition > ILL_CONDITIONED:
        Logger.warning(f"hypergeometric sum at x = {x} lost digits to cancellation (condition {condition:.3g})")
    return SeriesResult(total, k + 1, condition)


def series_coefficients(a, b, c, count):
    """First `count` coefficients (a)_k (b)_k / ((c)_k k!) as a numpy array."""
    k = np.arange(count - 1, dtype=float)
    ratios = (a + k) * (b + k) / ((k + 1.0) * (c + k))
    return np.concatenate(([1.0], np.cumprod(ratios)))


def taylor_coefficients(p, x0, value, slope, radius, tol=1e-17, max_terms=600):
    """
    Taylor coefficients at x0 of the solution of the hypergeometric equation with the
    given value and first derivative at x0. Terms are generated until |c_n| radius**n
    falls below tol relative to the largest term seen, three times in a row.
    """
    a, b, c = p.alpha, p.beta, p.gamma
    p0 = x0 * (1.0 - x0)
    if p0 == 0:
        raise DomainError("Taylor centre sits on a singular point of the hypergeometric equation")
    q0 = c - (a + b + 1.0) * x0
    p1 = 1.0 - 2.0 * x0

    coefficients = [complex(value), complex(slope)]
    largest = max(abs(value), abs(slope) * radius)
    quiet = 0
    n = 0
    while len(coefficients) < max_terms:
        nxt = ((n + a) * (n + b) * coefficients[n] - (n + 1) * (p1 * n + q0) * coefficients[n + 1]) / (p0 * (n + 1) * (n + 2))
        coefficients.append(nxt)
        n += 1
        size = abs(nxt) * radius ** (n + 1)
        largest = max(largest, size)
        quiet = quiet + 1 if size <= tol * largest else 0
        if quiet >= 3:
            break
    else:
        raise SeriesConvergenceError(f"Taylor series at {x0} did not settle within {max_terms} terms")
    return np.array(coefficients)


def hyp2f1_bridge(p, x, margin=None):
    """
    F on the annulus 1 - margin < |x| < 1/(1 - margin): a Taylor expansion re-centred at the
    point of modulus 1 - 2*margin on the ray through x, seeded by the disk series and the
    derivative rule.
    """
    margin = series_settings().margin if margin is None else margin
    x = complex(x)
    centre_radius = 1.0 - 2.0 * margin
    x0 = x * (centre_radius / abs(x))
    t = x - x0
    reach = min(abs(x0), abs(1.0 - x0))
    if abs(t) > 0.75 * reach:
        raise DomainError(f"x = {x} is too close to the singular point x = 1")

    value = hyp2f1_disk(p, x0, margin=margin).value
    slope = p.alpha * p.beta / p.gamma * hyp2f1_disk(p.shifted(), x0, margin=margin).value
    coefficients = taylor_coefficients(p, x0, value, slope, abs(t))
    return np.polynomial.polynomial.polyval(t, coefficients)


def hyp2f1_continued(p, x, half_plane=None, margin=None):
    """
    Analytic continuation of F to |x| > 1 as the sum of two series in 1/x:

        f1 = G(b-a)G(c) / (G(b)G(c-a)) (-x)^(-a) F(a, a-c+1; a-b+1; 1/x)
        f2 = G(a-b)G(c) / (G(a)G(c-b)) (-x)^(-b) F(b, b-c+1; b-a+1; 1/x)

    F = f1 + f2 in the upper half-plane; in the lower half-plane the terms pick up the
    phases exp(-2 pi i a) and exp(-2 pi i b) because of the log convention of
    ContinuationBranch.

    Raises:
        DegenerateParametersError: alpha - beta is an integer.
        BranchCutError: x real and >= 1.
        DomainError: 1/x outside the series disk.
    """
    margin = series_settings().margin if margin is None else margin
    gap = p.exponent_gap
    if abs(gap - round(gap)) < 1e-12:
        raise DegenerateParametersError(f"alpha - beta = {gap:.12g} is an integer; use the Sigma path")

    x = complex(x)
    if x.imag == 0 and x.real >= 1.0:
        raise BranchCutError(f"x = {x.real:g} lies on the cut [1, oo)")

    branch = ContinuationBranch.of(x)
    if half_plane is not None and half_plane != branch.half_plane and x.imag != 0:
        raise DomainError(f"x = {x} is not in the half-plane {half_plane:+d}")

    a, b, c = p.alpha, p.beta, p.gamma
    u = 1.0 / x

    first = hyp2f1_disk(HypergeomParams(a, a - c + 1.0, a - b + 1.0), u, margin=margin).value
    second = hyp2f1_disk(HypergeomParams(b, b - c + 1.0, b - a + 1.0), u, margin=margin).value

    c1 = gamma_fn(b - a) * gamma_fn(c) * rgamma(b) * rgamma(c - a)
    c2 = gamma_fn(a - b) * gamma_fn(c) * rgamma(a) * rgamma(c - b)

    f1 = c1 * branch.minus_x_power(x, -a) * first
    f2 = c2 * branch.minus_x_power(x, -b) * second
    return branch.phase(a) * f1 + branch.phase(b) * f2


def hyp2f1(p, x, margin=None):
    """F(alpha, beta, gamma; x) anywhere off the cut [1, oo)."""
    margin = series_settings().margin if margin is None else margin
    modulus = abs(x)
    if modulus <= 1.0 - margin:
        return hyp2f1_disk(p, x, margin=margin).value
    if modulus * (1.0 - margin) >= 1.0:
        return hyp2f1_continued(p, x, margin=margin)
    return hyp2f1_bridge(p, x, margin=margin)


def hyp2f1_derivative(p, x, margin=None):
    """d/dx F(alpha, beta, gamma; x) = (alpha beta / gamma) F(alpha+1, beta+1, gamma+1; x)."""
    return p.alpha * p.beta / p.gamma * hyp2f1(p.shifted(), x, margin=margin)


def gauss_half_value(p):
    """
    Gauss' closed form for F(alpha, beta, (1+alpha+beta)/2; 1/2):

        G(1/2) G((1+a+b)/2) / (G((1+a)/2) G((1+b)/2))

    Raises:
        DomainError: gamma != (1 + alpha + beta)/2.
        PoleError: (1+alpha)/2 or (1+beta)/2 is a nonpositive integer.
    """
    expected = (1.0 + p.alpha + p.beta) / 2.0
    if abs(p.gamma - expected) > 1e-12 * max(1.0, abs(expected)):
        raise DomainError(f"Gauss identity needs gamma = {expected:g}, got {p.gamma:g}")
    for argument in ((1.0 + p.alpha) / 2.0, (1.0 + p.beta) / 2.0):
        if is_nonpositive_integer(argument):
            raise PoleError(f"Gamma((1+beta)/2) has a pole at {argument:g}")
    return math.sqrt(math.pi) * gamma_fn(expected) / (gamma_fn((1.0 + p.alpha) / 2.0) * gamma_fn((1.0 + p.beta) / 2.0))
