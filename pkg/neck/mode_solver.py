"""
Decaying solutions of the mode equation

    (z^2 + T^-2) f'' + 6 z f' + (4 - lam^2) f = 2 pi psi delta_0

one eigenvalue lam of the surface Laplacian at a time.

In the variable x = (1 + iTz)/2 the homogeneous equation is the hypergeometric equation with
(alpha, beta, gamma) = ((5 + k)/2, (5 - k)/2, 3), k = sqrt(9 + 4 lam^2). For z > 0 the decaying
solution is a real multiple of

    G(x) = exp(-i pi alpha / 2) (-x)^(-alpha) F(alpha, alpha - 2; alpha - beta + 1; 1/x),

which is real on the line x = (1 + iw)/2, and the solution is extended evenly to z < 0.
G is summed as a series in 1/x for |x| >= 1.25 and by a short chain of Taylor expansions
of the hypergeometric equation between |x| = 1.25 and x = 1/2. Every profile is stored for
T = 1 and unit source; `ModeSolution` applies f^T(z) = T psi u(T|z|).
"""
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp

from neck.specfun import (
    HypergeomParams,
    gamma_fn,
    hyp2f1,
    rgamma,
    series_coefficients,
    taylor_coefficients,
)
from neck.utils.errors import (
    ExtrapolationError,
    FitDegeneracyError,
    ModeOverflowError,
    SigmaDegeneracyError,
)
from neck.utils.logger import Logger


SIGMA_TOL = 1e-9
MAX_LAMBDA = 60.0
SIGMA_STEPS = (1e-3, 5e-4, 2.5e-4)
EXTRAPOLATION_TOL = 1e-6
ILL_CONDITIONED = 1e8


class SigmaClassification(NamedTuple):
    lam: float
    in_sigma: bool
    nearest_integer_gap: float


def hypergeom_params_of(lam):
    """(alpha, beta, gamma) of the mode equation for eigenvalue lam."""
    if lam < 0:
        raise ValueError(f"eigenvalue must be nonnegative, got {lam}")
    alpha = (5.0 + math.sqrt(9.0 + 4.0 * lam * lam)) / 2.0
    return HypergeomParams(alpha, 5.0 - alpha, 3.0, lam)


def classify_sigma(lam, tol=SIGMA_TOL):
    """lam is in Sigma when sqrt(9 + 4 lam^2) is an integer."""
    if lam <= 0:
        raise ValueError(f"Sigma classification needs lam > 0, got {lam}")
    root = math.sqrt(9.0 + 4.0 * lam * lam)
    gap = abs(root - round(root))
    return SigmaClassification(lam, gap < tol, gap)


def _require_outside_sigma(p, tol):
    gap = p.exponent_gap
    if abs(gap - round(gap)) < tol:
        raise SigmaDegeneracyError(f"lam = {p.lam} is in Sigma (alpha - beta = {gap:.12g})")


def wronskian_at_zero(p, T, tol=SIGMA_TOL):
    """
    W[v1, v2](0) for v1(z) = F(alpha, beta, 3; x(z)) and v2(z) = v1(-z), via Gauss' identity:

        -i T (alpha beta / gamma) G(1/2)^2 G((1+a+b)/2) G((3+a+b)/2)
        / (G((1+a)/2) G((2+a)/2) G((1+b)/2) G((2+b)/2))

    Raises:
        SigmaDegeneracyError: lam in Sigma, where the Wronskian vanishes.
    """
    _require_outside_sigma(p, tol)
    a, b, c = p.alpha, p.beta, p.gamma
    magnitude = (a * b / c) * math.pi * gamma_fn((1.0 + a + b) / 2.0) * gamma_fn((3.0 + a + b) / 2.0)
    magnitude *= rgamma((1.0 + a) / 2.0) * rgamma((2.0 + a) / 2.0) * rgamma((1.0 + b) / 2.0) * rgamma((2.0 + b) / 2.0)
    return complex(0.0, -T * magnitude)


def wronskian_by_differences(p, T, step=1e-5):
    """The same Wronskian from central differences of the two series at z = 0."""
    def v1(z):
        return hyp2f1(p, complex(0.5, T * z / 2.0))

    def v2(z):
        return v1(-z)

    d1 = (v1(step) - v1(-step)) / (2.0 * step)
    d2 = (v2(step) - v2(-step)) / (2.0 * step)
    return v1(0.0) * d2 - d1 * v2(0.0)


def decaying_amplitude(p):
    """
    Amplitude A = C1/2 of the decaying solution for T = 1 and unit source, and the
    coefficient rho = -tan(pi beta / 2).
    """
    a, b = p.alpha, p.beta
    amplitude = math.sqrt(math.pi) / 4.0 * gamma_fn(a / 2.0) * gamma_fn(b / 2.0)
    return amplitude, -math.tan(math.pi * b / 2.0)


class DecayingProfile:
    """
    Unit decaying profile u(w) = K Re G(x(w)), x(w) = (1 + iw)/2, w >= 0, with its first two
    w-derivatives.
    """
    FAR_RADIUS = 1.25
    HOP_RATIO = 0.5

    def __init__(self, p):
        self.params = p
        a, b = p.alpha, p.beta

        amplitude, _ = decaying_amplitude(p)
        c1 = 2.0 * gamma_fn(b - a) * rgamma(b) * rgamma(3.0 - a)
        self.scale = amplitude * c1 * math.sin(math.pi * (a - b) / 2.0) / math.cos(math.pi * b / 2.0)

        self.w_far = math.sqrt(4.0 * self.FAR_RADIUS**2 - 1.0)
        self._far_setup()
        self._chain_setup()

    def _far_setup(self):
        a, b = self.params.alpha, self.params.beta
        reach = 1.0 / self.FAR_RADIUS
        coefficients = series_coefficients(a, a - 2.0, a - b + 1.0, 4000)
        sizes = np.abs(coefficients) * reach ** np.arange(coefficients.size)
        keep = np.nonzero(sizes > 1e-18 * sizes.max())[0]
        coefficients = coefficients[: keep[-1] + 1]

        u0 = 1.0 / complex(0.5, self.w_far / 2.0)
        condition = float(np.sum(np.abs(coefficients) * abs(u0) ** np.arange(coefficients.size))) / abs(P.polyval(u0, coefficients))
        if condition > ILL_CONDITIONED:
            Logger.warning(f"far series for lam = {self.params.lam} loses digits (condition {condition:.3g})")

        self._h = coefficients
        self._dh = P.polyder(coefficients)
        self._ddh = P.polyder(coefficients, 2)

    def _far(self, x):
        a = self.params.alpha
        u = 1.0 / x
        log_minus_x = np.log(np.abs(x)) + 1j * (np.angle(x) - math.pi)
        prefactor = np.exp(-a * log_minus_x - 0.5j * math.pi * a)
        h = P.polyval(u, self._h)
        dh = P.polyval(u, self._dh)
        ddh = P.polyval(u, self._ddh)
        g = prefactor * h
        g_x = -u * prefactor * (a * h + u * dh)
        g_xx = u * u * prefactor * ((1.0 + a) * a * h + 2.0 * (1.0 + a) * u * dh + u * u * ddh)
        return g, g_x, g_xx

    def _chain_setup(self):
        p = self.params
        y = self.w_far / 2.0
        x0 = complex(0.5, y)
        g, g_x, _ = self._far(np.array([x0]))
        value, slope = g[0], g_x[0]

        self._centres = []
        while True:
            reach = math.hypot(0.5, y)
            step = self.HOP_RATIO * reach
            coefficients = taylor_coefficients(p, x0, value, slope, step, max_terms=4000)
            self._centres.append((y, reach, coefficients, P.polyder(coefficients), P.polyder(coefficients, 2)))
            if y - step <= 0.0:
                break
            y_next = max(y - 0.98 * step, 0.0)
            t = complex(0.0, y_next - y)
            value = P.polyval(t, coefficients)
            slope = P.polyval(t, self._centres[-1][3])
            y, x0 = y_next, complex(0.5, y_next)

    def _near(self, y):
        centres = np.array([centre[0] for centre in self._centres])
        reaches = np.array([centre[1] for centre in self._centres])
        nearest = np.argmin(np.abs(y[:, None] - centres[None, :]) / reaches[None, :], axis=1)

        g = np.empty(y.shape, dtype=complex)
        g_x = np.empty(y.shape, dtype=complex)
        g_xx = np.empty(y.shape, dtype=complex)
        for index, (yc, _, c0, c1, c2) in enumerate(self._centres):
            mask = nearest == index
            if not mask.any():
                continue
            t = 1j * (y[mask] - yc)
            g[mask] = P.polyval(t, c0)
            g_x[mask] = P.polyval(t, c1)
            g_xx[mask] = P.polyval(t, c2)
        return g, g_x, g_xx

    def complex_values(self, w):
        """G, dG/dx and d2G/dx2 on the line x = (1 + iw)/2."""
        w = np.atleast_1d(np.asarray(w, dtype=float))
        g = np.empty(w.shape, dtype=complex)
        g_x = np.empty(w.shape, dtype=complex)
        g_xx = np.empty(w.shape, dtype=complex)

        far = w >= self.w_far
        if far.any():
            g[far], g_x[far], g_xx[far] = self._far(0.5 + 0.5j * w[far])
        near = ~far
        if near.any():
            g[near], g_x[near], g_xx[near] = self._near(w[near] / 2.0)
        return g, g_x, g_xx

    def __call__(self, w):
        g, g_x, g_xx = self.complex_values(w)
        # dx/dw = i/2
        return (
            self.scale * g.real,
            self.scale * (0.5j * g_x).real,
            self.scale * (-0.25 * g_xx).real,
        )


def _zero_profile(w):
    w = np.atleast_1d(np.asarray(w, dtype=float))
    q = 1.0 + w * w
    value = (w + w**3 / 3.0) / q**2
    first = (1.0 - 2.0 * w**2 - w**4 / 3.0) / q**3
    second = (-10.0 * w + 20.0 / 3.0 * w**3 + 2.0 / 3.0 * w**5) / q**4
    return math.pi * value, math.pi * first, math.pi * second


class SigmaProfile:
    """Richardson limit of symmetric averages (u(lam+eps) + u(lam-eps))/2 in eps^2."""

    def __init__(self, lam_star, steps=SIGMA_STEPS):
        self.lam = lam_star
        self.steps = steps
        self._pairs = [
            (DecayingProfile(hypergeom_params_of(lam_star + eps)), DecayingProfile(hypergeom_params_of(lam_star - eps)))
            for eps in steps
        ]

    def levels(self, w):
        averaged = []
        for upper, lower in self._pairs:
            hi, lo = upper(w), lower(w)
            averaged.append(tuple(0.5 * (h + l) for h, l in zip(hi, lo)))

        # steps halve, so each Richardson level uses the 4^j ratio
        first = [tuple((4.0 * fine - coarse) / 3.0 for fine, coarse in zip(averaged[i + 1], averaged[i])) for i in range(2)]
        second = tuple((16.0 * fine - coarse) / 15.0 for fine, coarse in zip(first[1], first[0]))
        return first[1], second

    def __call__(self, w):
        return self.levels(w)[1]


@dataclass(frozen=True)
class ModeSolution:
    """
    f_lam^T(z) = T psi u(T|z|) for a unit profile u, with first and second z-derivatives.
    f'' at z = 0 is the right-sided value.
    """
    lam: float
    T: float
    C1: float
    rho_coeff: float
    psi_at_p: float
    params: Optional[HypergeomParams]
    evaluator: Callable = field(repr=False, compare=False)
    error_bar: float = 0.0

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        w = self.T * np.abs(z).ravel()
        sign = np.where(z.ravel() < 0.0, -1.0, 1.0)
        u, u_w, u_ww = self.evaluator(w)
        amplitude = self.T * self.psi_at_p
        shape = z.shape
        return (
            (amplitude * u).reshape(shape),
            (amplitude * self.T * sign * u_w).reshape(shape),
            (amplitude * self.T**2 * u_ww).reshape(shape),
        )

    def __call__(self, z):
        return self.evaluate(z)[0]

    def with_source(self, psi_at_p):
        """The same mode for another value of psi(p); the amplitude is linear in it."""
        ratio = psi_at_p / self.psi_at_p if self.psi_at_p else 0.0
        return ModeSolution(
            self.lam, self.T, self.C1 * ratio, self.rho_coeff, psi_at_p, self.params, self.evaluator, self.error_bar
        )


def decaying_mode(lam, T, psi_at_p=1.0, max_lambda=MAX_LAMBDA, sigma_tol=SIGMA_TOL):
    """
    The unique decaying solution for lam > 0 outside Sigma.

    Raises:
        SigmaDegeneracyError: lam in Sigma.
        ModeOverflowError: lam above max_lambda.
    """
    if lam <= 0:
        raise ValueError(f"decaying_mode needs lam > 0, got {lam}")
    if lam > max_lambda:
        raise ModeOverflowError(f"lam = {lam:g} exceeds the configured maximum {max_lambda:g}")
    p = hypergeom_params_of(lam)
    _require_outside_sigma(p, sigma_tol)

    amplitude, rho = decaying_amplitude(p)
    profile = DecayingProfile(p)
    return ModeSolution(lam, T, 2.0 * amplitude * T * psi_at_p, rho, psi_at_p, p, profile)


def mode_at_sigma(lambda_star, T, psi_at_p=1.0, steps=SIGMA_STEPS, tol=EXTRAPOLATION_TOL, max_lambda=MAX_LAMBDA, sigma_tol=SIGMA_TOL):
    """
    Limit of decaying_mode at a point of Sigma by Richardson extrapolation over
    lambda_star +- eps. The disagreement between the last two extrapolation levels, relative to
    max |u| on a sample grid, is the error bar.

    Raises:
        ExtrapolationError: error bar above tol.
    """
    if not classify_sigma(lambda_star, sigma_tol).in_sigma:
        raise ValueError(f"lam = {lambda_star} is not in Sigma")
    if lambda_star + steps[0] > max_lambda:
        raise ModeOverflowError(f"lam = {lambda_star:g} exceeds the configured maximum {max_lambda:g}")

    profile = SigmaProfile(lambda_star, steps)
    grid = np.linspace(0.0, 30.0, 61)
    lower, upper = profile.levels(grid)
    scale = np.max(np.abs(upper[0]))
    error_bar = float(np.max(np.abs(upper[0] - lower[0])) / scale) if scale > 0 else 0.0

    Logger.debug(f"Sigma mode lam = {lambda_star:.6g}: extrapolation error bar {error_bar:.3g}")
    if error_bar > tol:
        raise ExtrapolationError(f"Sigma extrapolation at lam = {lambda_star:.6g} disagrees by {error_bar:.3g} > {tol:g}")

    return ModeSolution(
        lambda_star, T, math.nan, math.nan, psi_at_p, hypergeom_params_of(lambda_star), profile, error_bar
    )


def zero_mode(T, psi0_at_p):
    """f0(z) = (2 sigma0(z) - 1) pi T^2 psi0 (z + T^2 z^3 / 3) / (1 + (Tz)^2)^2."""
    return ModeSolution(0.0, T, 2.0 * math.pi * T**2 * psi0_at_p, 0.0, psi0_at_p, hypergeom_params_of(0.0), _zero_profile)


def mode_for(lam, T, psi_at_p=1.0, max_lambda=MAX_LAMBDA, sigma_tol=SIGMA_TOL):
    """Zero mode, Sigma limit or plain decaying mode, whichever lam needs."""
    if lam == 0:
        return zero_mode(T, psi_at_p)
    if classify_sigma(lam, sigma_tol).in_sigma:
        return mode_at_sigma(lam, T, psi_at_p, max_lambda=max_lambda, sigma_tol=sigma_tol)
    return decaying_mode(lam, T, psi_at_p, max_lambda=max_lambda, sigma_tol=sigma_tol)


def mode_value_at_zero_closed_form(lam, T, psi_at_p, sigma_tol=SIGMA_TOL):
    """
    f(0) = -(pi/2) psi T tan(pi beta/2) G(alpha/2) G(beta/2) / (G((1+alpha)/2) G((1+beta)/2)).
    """
    if lam <= 2:
        raise ValueError(f"closed form f(0) is stated for lam > 2, got {lam}")
    p = hypergeom_params_of(lam)
    _require_outside_sigma(p, sigma_tol)
    a, b = p.alpha, p.beta
    return (
        -0.5 * math.pi * psi_at_p * T * math.tan(math.pi * b / 2.0)
        * gamma_fn(a / 2.0) * gamma_fn(b / 2.0)
        * rgamma((1.0 + a) / 2.0) * rgamma((1.0 + b) / 2.0)
    )


def variation_of_parameters_value(p, T, psi_at_p, z):
    """
    The two-solution formula f = (C1/2)(-Im v1 + rho Re v1) + C1 sigma0 Im v1 with
    v1 = F(alpha, beta, 3; (1 + iTz)/2). Suffers cancellation for large T|z| and large lam.
    """
    _require_outside_sigma(p, SIGMA_TOL)
    amplitude, rho = decaying_amplitude(p)
    amplitude *= T * psi_at_p
    values = []
    for point in np.atleast_1d(z):
        v1 = complex(hyp2f1(p, complex(0.5, T * point / 2.0)))
        step = 1.0 if point > 0 else 0.0
        values.append(amplitude * (-v1.imag + rho * v1.real) + 2.0 * amplitude * step * v1.imag)
    return np.array(values)


def mode_ode_residual(m, z):
    f, fp, fpp = m.evaluate(z)
    z = np.asarray(z, dtype=float)
    return (z * z + m.T**-2) * fpp + 6.0 * z * fp + (4.0 - m.lam**2) * f


class JumpCheck(NamedTuple):
    jump: float
    expected: float
    relative_error: float


def jump_at_zero(m, step=None):
    """One-sided second-order differences of f' across z = 0; expected jump 2 pi psi T^2."""
    h = step if step is not None else 1e-3 / m.T
    f = m(np.array([-2.0 * h, -h, 0.0, h, 2.0 * h]))
    right = (-3.0 * f[2] + 4.0 * f[3] - f[4]) / (2.0 * h)
    left = (3.0 * f[2] - 4.0 * f[1] + f[0]) / (2.0 * h)
    jump = float(right - left)
    expected = 2.0 * math.pi * m.psi_at_p * m.T**2
    return JumpCheck(jump, expected, abs(jump - expected) / abs(expected))


def integrate_mode_ode(lam, T, z0, f0, fp0, z_eval, rtol=1e-10):
    """
    Integrate the homogeneous mode equation from (z0, f0, f0') to the points z_eval, all on
    one side of z0 and away from 0, with an adaptive Runge-Kutta 5(4) scheme.
    """
    z_eval = np.asarray(z_eval, dtype=float)

    def rhs(z, y):
        return [y[1], -(6.0 * z * y[1] + (4.0 - lam * lam) * y[0]) / (z * z + T**-2)]

    scale = max(abs(f0), abs(fp0) / T, 1e-300)
    out = np.empty(z_eval.shape)
    for side in (z_eval >= z0, z_eval < z0):
        if not side.any():
            continue
        targets = z_eval[side]
        order = np.argsort(np.abs(targets - z0))
        ordered = targets[order]
        end = ordered[-1]
        solution = solve_ivp(rhs, (z0, end), [f0, fp0], method='RK45', t_eval=ordered, rtol=rtol, atol=1e-14 * scale)
        values = np.empty(ordered.shape)
        values[order] = solution.y[0]
        out[side] = values
    return out


class MonotonicityReport(NamedTuple):
    violations: Tuple[Tuple[float, float, float], ...]
    tolerance: float

    @property
    def passed(self):
        return not self.violations


def monotonicity_check(m, grid):
    """f nonincreasing on z <= 0 and nondecreasing on z >= 0, up to 1e-9 max|f|."""
    grid = np.sort(np.asarray(grid, dtype=float))
    values = m(grid)
    tolerance = 1e-9 * float(np.max(np.abs(values))) if values.size else 0.0

    violations = []
    for side, direction in ((grid <= 0.0, -1.0), (grid >= 0.0, 1.0)):
        zs, fs = grid[side], values[side]
        steps = direction * np.diff(fs)
        for i in np.nonzero(steps < -tolerance)[0]:
            violations.append((float(zs[i]), float(zs[i + 1]), float(-steps[i])))
    if violations:
        Logger.warning(f"lam = {m.lam:g}, T = {m.T:g}: {len(violations)} monotonicity violations")
    return MonotonicityReport(tuple(violations), tolerance)


class DecayFit(NamedTuple):
    slope: float
    residual: float


def decay_exponent_fit(m, window, points=50):
    """Least-squares slope of log|f| against log(Tz) on a window with Tz >= 5."""
    z_lo, z_hi = window
    if m.T * z_lo < 5.0 or z_hi <= z_lo:
        raise ValueError(f"window {window} is outside the asymptotic regime Tz >= 5")
    z = np.geomspace(z_lo, z_hi, points)
    values = np.abs(m(z))
    if not np.all(values > 0):
        raise FitDegeneracyError(f"f vanishes on the window {window} for lam = {m.lam:g}")
    x, y = np.log(m.T * z), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return DecayFit(float(slope), residual)


class GrowthFit(NamedTuple):
    order: float
    constant: float
    residual: float
    lambdas: Tuple[float, ...]


def lambda_growth_fit(lams, T=1.0, sigma_tol=SIGMA_TOL):
    """
    Fit |f_lam^T(0)| <= C lam^N across lams (Sigma points skipped); N from a log-log
    least-squares fit, C the smallest constant making the bound hold at every sample.
    For lam > 2 the maximum of |f| sits at z = 0 by monotonicity.
    """
    kept, values = [], []
    for lam in lams:
        if lam <= 2 or classify_sigma(lam, 1e-6).in_sigma:
            continue
        kept.append(lam)
        values.append(abs(mode_value_at_zero_closed_form(lam, T, 1.0, sigma_tol)))
    if len(kept) < 2:
        raise FitDegeneracyError("need at least two eigenvalues outside Sigma")
    x, y = np.log(kept), np.log(values)
    order, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (order * x + intercept)) ** 2)))
    constant = float(np.max(np.asarray(values) / np.asarray(kept) ** order))
    return GrowthFit(float(order), constant, residual, tuple(kept))
