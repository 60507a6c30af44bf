"""
Quantitative checks of the neck metric: weight functions, the Einstein error of the
zero-mode metric, comparisons against the rescaled limit geometries and a collocation
corrector for the D-invariant reduced system.
"""
import math
from typing import Dict, NamedTuple, Tuple

import numpy as np
from scipy.integrate import quad_vec

from neck.model_spaces import CalabiModel, cylinder_reduced
from neck.neck_assembly import (
    QUAD_ABS_TOL,
    QUAD_REL_TOL,
    NeckData,
    ReducedProfile,
    SingularChart,
    corrected_h,
    smoothstep,
)
from neck.parameters import WeightSpec, check_weight_scales
from neck.specfun import HypergeomParams, hyp2f1
from neck.utils.errors import (
    ContractionThresholdError,
    CorrectorDivergenceError,
    DomainError,
    FitDegeneracyError,
    NeckParameterError,
    QuadratureError,
    RegimeViolationError,
)
from neck.utils.logger import Logger


ZONES = ('inner', 'blend', 'outer')
SCAN_POINTS = 801
PATCH_FACTORS = (0.95, 1.0, 1.05)
CASE1_BOUND = 0.05
LIMIT_CONSTANT = 25.0
COLLOCATION_NODES = 64
NEWTON_DAMPING = 0.5
CORRECTOR_TOL = 1e-9
MAX_NEWTON_ITERATIONS = 50
MIN_STEP_SCALE = 1e-8
CONTRACTION_LIMIT = 1.0
ONE_SIDED_OFFSET = 1e-12
REGIME_SLACK = 1e-9


class WeightPoint(NamedTuple):
    """r_w is NaN away from the singular chart."""
    r_w: float
    w: float


def _scalar_or_array(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def weight_W(q, T, C3):
    """
    T^-1 for r_w <= T^-1, r_w on [2 T^-1, C3/2] and 1 for r_w >= C3 or off the chart, with
    quintic blends in between.
    """
    check_weight_scales(T, C3)
    r = np.asarray(q.r_w, dtype=float)
    r = np.where(np.isnan(r), C3, np.minimum(r, C3))

    s_inner, _ = smoothstep(T * r - 1.0)
    s_outer, _ = smoothstep(2.0 * r / C3 - 1.0)
    base = (1.0 - s_inner) / T + s_inner * r
    return _scalar_or_array((1.0 - s_outer) * base + s_outer)


def weight_rho(spec, q, order=None, nu_shift=0.0):
    """
    (1 + |w|)^-delta W^(nu + nu_shift + order) T^mu, where order stands for k + alpha and
    defaults to the one stored in the WeightSpec.

    Raises:
        WeightWindowError: spec outside its parameter windows.
    """
    spec.validate()
    order = spec.k + spec.alpha if order is None else order
    W = np.asarray(weight_W(q, spec.T, spec.C3))
    w = np.abs(np.asarray(q.w, dtype=float))
    exponent = spec.nu + nu_shift + order
    return _scalar_or_array((1.0 + w) ** -spec.delta * W**exponent * spec.T**spec.mu)


def weight_lower_bound(spec, T=None):
    """Lower bound of rho^(0) with nu + 2 over the neck, independent of the point."""
    T = spec.T if T is None else T
    near = 2.0 ** -spec.delta * T ** (spec.mu - spec.nu - 2.0)
    far = (1.0 + T) ** -spec.delta * T**spec.mu * min(1.0, (spec.C3 / 2.0) ** (spec.nu + 2.0))
    return min(near, far)


class WeightScan(NamedTuple):
    minimum: float
    bound: float
    holds: bool
    points: int


def weight_bound_scan(spec, side=100):
    """
    rho^(0) with nu + 2 over a side x side grid of chart points (r_w from T^-2 to 3, |w| <= r_w)
    plus side far points with |w| <= T, against weight_lower_bound.
    """
    spec.validate()
    T = spec.T
    r = np.geomspace(T**-2, 3.0, side)
    fraction = np.linspace(-1.0, 1.0, side)
    R, F = np.meshgrid(r, fraction, indexing='ij')
    W = F * np.minimum(R, T)
    chart = weight_rho(spec, WeightPoint(R.ravel(), W.ravel()), order=0.0, nu_shift=2.0)

    far_w = np.linspace(-T, T / 2.0, side)
    far = weight_rho(spec, WeightPoint(np.full(side, np.nan), far_w), order=0.0, nu_shift=2.0)

    minimum = float(min(np.min(chart), np.min(far)))
    bound = weight_lower_bound(spec, T)
    return WeightScan(minimum, bound, minimum >= bound * (1.0 - 1e-12), chart.size + far.size)


def _profile_of(data):
    if isinstance(data, ReducedProfile):
        return data
    if isinstance(data, NeckData):
        return data.zero_mode_profile()
    raise TypeError(f"expected NeckData or ReducedProfile, got {type(data).__name__}")


def kahler_potential_zero_mode(data):
    """
    phi(z) = int_0^z 2 h(u) u du + C', evaluated as z^2 int_0^1 2 t h(z t) dt with quad_vec.
    C' is the profile's potential offset (-log T^2 for the neck, log c for the exact family).

    Raises:
        QuadratureError: the quadrature error estimate exceeds its tolerance.
    """
    profile = _profile_of(data)

    def phi(z):
        z = np.asarray(z, dtype=float)
        flat = np.atleast_1d(z).ravel()

        def integrand(t):
            return 2.0 * t * profile.h(flat * t)

        value, error = quad_vec(integrand, 0.0, 1.0, epsabs=QUAD_ABS_TOL, epsrel=QUAD_REL_TOL, norm='max', limit=2000)
        if error > 1e3 * max(QUAD_ABS_TOL, QUAD_REL_TOL * float(np.max(np.abs(value)))):
            raise QuadratureError(f"Kahler potential quadrature error {error:.3g}")
        result = (flat * flat * value + profile.potential_offset).reshape(np.shape(z))
        return _scalar_or_array(result)

    return phi


class ErrReport(NamedTuple):
    T: float
    sup_err: float
    zone: str
    grid_points: int
    z_min: float
    z_max: float
    per_zone: Dict[str, float]


def err_scan_grid(T, points=SCAN_POINTS):
    """z = sinh(s) / T on an even s-grid over [-1, 1/2], z = 0 left out."""
    s = np.linspace(math.asinh(-T), math.asinh(T / 2.0), points)
    z = np.sinh(s) / T
    return z[z != 0.0]


def einstein_error_zero_mode(data, grid=None):
    """
    sup |(chi / h) e^-phi - 1| over the grid, per zone.

    Raises:
        ValueError: the grid contains z = 0.
    """
    profile = _profile_of(data)
    z = err_scan_grid(profile.T) if grid is None else np.asarray(grid, dtype=float)
    if np.any(z == 0.0):
        raise ValueError("Einstein error grid must avoid z = 0")

    phi = np.asarray(kahler_potential_zero_mode(profile)(z))
    err = np.abs(profile.chi(z) / profile.h(z) * np.exp(-phi) - 1.0)
    zones = np.asarray(profile.zones(z))

    per_zone = {zone: float(np.max(err[zones == zone])) for zone in ZONES if np.any(zones == zone)}
    worst = max(per_zone, key=per_zone.get)
    Logger.debug(f"T = {profile.T:g}: sup |Err| = {per_zone[worst]:.3g} in the {worst} zone")
    return ErrReport(float(profile.T), per_zone[worst], worst, int(z.size), float(z.min()), float(z.max()), per_zone)


class OrderFit(NamedTuple):
    order: float
    constant: float
    residual: float


def fit_order(Ts, values):
    """
    Least-squares fit values ~ constant * T^order in log-log coordinates.

    Raises:
        FitDegeneracyError: fewer than two distinct T, or a value that is not positive and finite.
    """
    Ts = np.asarray(Ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if Ts.size != values.size or np.unique(Ts).size < 2:
        raise FitDegeneracyError(f"need at least two distinct T values, got {Ts.tolist()}")
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise FitDegeneracyError(f"cannot fit an order through {values.tolist()}")

    x, y = np.log(Ts), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return OrderFit(float(slope), float(math.exp(intercept)), residual)


class LimitPoint(NamedTuple):
    """Offsets (a, b) from p on D and w = T z."""
    a: float
    b: float
    w: float

    @property
    def r_w(self):
        return math.sqrt(self.a * self.a + self.b * self.b + self.w * self.w)


class DeviationReport(NamedTuple):
    case: int
    T: float
    deviation: float
    bound: float
    passed: bool
    base: LimitPoint
    components: Tuple[Tuple[str, float], ...] = ()


def in_regime(case, point, T):
    r = point.r_w
    slack = REGIME_SLACK
    if case == 1:
        return 0.0 < T * r <= 5.0 + slack
    if case == 2:
        return T * r >= 10.0 - slack and r <= 0.1 + slack
    if case == 3:
        return 0.5 - slack <= r <= 2.0 + slack and abs(point.w) <= 5.0 + slack
    if case == 4:
        return abs(point.w) >= 10.0 - slack
    raise ValueError(f"unknown limit case {case}")


def _chart(points):
    return SingularChart(
        np.array([q.a for q in points]), np.array([q.b for q in points]), np.array([q.w for q in points])
    )


def _case_deviation(nd, case, points, limit_constant):
    T = nd.T
    if case in (1, 2):
        chart = _chart(points)
        h = nd.near_singular_h(chart) / T**2
        if case == 1:
            V = 1.0 + nd.source_charge / (2.0 * T * chart.r_w)
            return float(np.max(np.abs(h - V) / V)), CASE1_BOUND, ()
        chi = nd.near_singular_chi(chart)
        deviation = np.maximum(np.abs(h - 1.0), np.abs(chi - 1.0))
        bound = min((abs(nd.source_charge) + 1.0) / (T * q.r_w) + q.r_w**2 for q in points)
        return float(np.max(deviation)), bound, ()

    p = nd.spectrum.base_point
    t1 = p.theta1 + np.array([q.a for q in points])
    t2 = p.theta2 + np.array([q.b for q in points])
    w = np.array([q.w for q in points])
    z = w / T
    h = corrected_h(nd)(t1, t2, z)
    chi = nd.chi_eval(t1, t2, z)

    if case == 3:
        h_model, chi_model = cylinder_reduced(w)
        deviation = np.maximum(np.abs(h / T**2 - h_model), np.abs(chi - chi_model))
        return float(np.max(deviation)), limit_constant / T, ()

    h_deviation = chi_deviation = 0.0
    for h_value, chi_value, zi in zip(h, chi, z):
        n = nd.k_minus if zi < 0.0 else abs(nd.k_plus)
        model = CalabiModel(n)
        mirrored = zi if zi < 0.0 else -zi
        try:
            model.require_inside(mirrored)
        except DomainError as e:
            raise RegimeViolationError(f"Case 4 point z = {zi:g} outside the Calabi end: {e}")
        h_model = float(model.h(mirrored))
        h_deviation = max(h_deviation, abs(h_value - h_model) / h_model)
        chi_deviation = max(chi_deviation, abs(chi_value - float(model.chi(mirrored))))
    # chi carries the O(1/T) constants the nonzero modes leave behind on the ends
    components = (('h', h_deviation), ('chi', chi_deviation))
    return max(h_deviation, chi_deviation), limit_constant / T, components


def rescaled_limit_compare(nd, case, base, T=None, limit_constant=LIMIT_CONSTANT):
    """
    Sup deviation of the neck's reduced data from the limit geometry of the given case over a
    small radial patch around base:

        1  Taub-NUT, near_singular_h / T^2 against 1 + c / (2 T r_w), relative;
        2  flat product, near_singular_h / T^2 and near_singular_chi against 1;
        3  cylinder D x R, h / T^2 against 1 / (1 + w^2) and chi against 1;
        4  Calabi end of degree |k_-| or |k_+|, mirrored for z > 0: h relative and chi
           against 1 + k z, with the two parts listed in components.

    Raises:
        RegimeViolationError: base outside the case's regime.
    """
    if T is not None and T != nd.T:
        raise ValueError(f"neck data was built for T = {nd.T:g}, not {T:g}")
    T = nd.T
    base = LimitPoint(*base)
    if not in_regime(case, base, T):
        raise RegimeViolationError(f"Case {case}: point {tuple(base)} (r_w = {base.r_w:.3g}) outside its regime at T = {T:g}")

    patch = [LimitPoint(base.a * f, base.b * f, base.w * f) for f in PATCH_FACTORS]
    patch = [q for q in patch if in_regime(case, q, T)]
    deviation, bound, components = _case_deviation(nd, case, patch, limit_constant)
    passed = deviation < bound
    Logger.debug(f"Case {case}, T = {T:g}: deviation {deviation:.3g}, bound {bound:.3g}")
    return DeviationReport(case, float(T), deviation, float(bound), passed, base, components)


class GrowthReport(NamedTuple):
    lam: float
    slope: float
    expected: float
    threshold: float
    passed: bool


def cylinder_limit_growth(lam, w_window=(20.0, 200.0), points=24, rel_tol=0.05):
    """
    Slope of log |F(alpha, beta, 1; (1 + i w)/2)| against log w, with
    (alpha, beta) = ((1 +- sqrt(5 + 4 lam^2)) / 2), the growing solution of the limit equation
    x(x-1) f'' + (2x-1) f' - (1 + lam^2) f = 0. The expected slope is -beta > (sqrt 5 - 1)/2.

    Raises:
        DegenerateParametersError: alpha - beta is an integer.
    """
    root = math.sqrt(5.0 + 4.0 * lam * lam)
    params = HypergeomParams(0.5 * (1.0 + root), 0.5 * (1.0 - root), 1.0, lam)
    w = np.geomspace(w_window[0], w_window[1], points)
    values = np.array([abs(hyp2f1(params, complex(0.5, 0.5 * wi))) for wi in w])
    slope = float(np.polyfit(np.log(w), np.log(values), 1)[0])

    expected = -params.beta
    threshold = (math.sqrt(5.0) - 1.0) / 2.0
    passed = abs(slope - expected) <= rel_tol * expected and slope > threshold
    return GrowthReport(float(lam), slope, expected, threshold, passed)


def chebyshev_differentiation(count):
    """Gauss-Lobatto nodes cos(pi j / (count - 1)) on [-1, 1], descending, and the differentiation matrix."""
    N = count - 1
    j = np.arange(count)
    x = np.cos(np.pi * j / N)
    c = np.hstack((2.0, np.ones(N - 1), 2.0)) * (-1.0) ** j
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dX + np.eye(count))
    D -= np.diag(D.sum(axis=1))
    return x, D


class CorrectorResult(NamedTuple):
    T: float
    z: np.ndarray
    h: np.ndarray
    chi: np.ndarray
    iterations: int
    residual_log: Tuple[float, ...]
    initial_residual: float
    correction_norm: float
    C_L: float
    bound: float
    within_bound: bool

    @property
    def correction_ratio(self):
        """correction norm over initial residual."""
        if self.initial_residual == 0.0:
            return 0.0
        return self.correction_norm / self.initial_residual


class _ReducedSystem:
    """
    u = log h on two Chebyshev patches in s = asinh(T z): L = [asinh(-T), 0], R = [0, asinh(T/2)].
    Rows: on L the left-end slope condition and the equation at every other node; on R
    continuity with L at s = 0, the equation at the interior nodes and the right-end slope
    condition. The equation is

        u_s - (cosh s / T) (chi_z / chi - 2 e^u z) = 0,

    and the end slopes are those of the starting profile, which is the outer closed form there.
    """

    def __init__(self, profile, nodes):
        self.n = nodes
        T = profile.T
        x, D = chebyshev_differentiation(nodes)
        self.patches = []
        for lower, upper, side in ((math.asinh(-T), 0.0, -1.0), (0.0, math.asinh(T / 2.0), 1.0)):
            s = lower + 0.5 * (x + 1.0) * (upper - lower)
            z = np.sinh(s) / T
            z_eval = np.where(z == 0.0, side * ONE_SIDED_OFFSET, z)
            chi = np.asarray(profile.chi(z_eval), dtype=float)
            if np.any(chi <= 0.0):
                raise NeckParameterError(f"chi is not positive on [{z.min():g}, {z.max():g}]")
            self.patches.append({
                's': s,
                'z': z,
                'dz_ds': np.cosh(s) / T,
                'D': D * (2.0 / (upper - lower)),
                'chi': chi,
                'chi_ratio': np.asarray(profile.chi_z(z_eval), dtype=float) / chi,
            })

        left, right = self.patches
        self.left_slope = left['dz_ds'][-1] * float(profile.h_z(left['z'][-1]) / profile.h(left['z'][-1]))
        self.right_slope = right['dz_ds'][0] * float(profile.h_z(right['z'][0]) / profile.h(right['z'][0]))

    def split(self, u):
        return u[:self.n], u[self.n:]

    def residual(self, u):
        n = self.n
        uL, uR = self.split(u)
        left, right = self.patches
        ode_L = left['D'] @ uL - left['dz_ds'] * (left['chi_ratio'] - 2.0 * np.exp(uL) * left['z'])
        ode_R = right['D'] @ uR - right['dz_ds'] * (right['chi_ratio'] - 2.0 * np.exp(uR) * right['z'])

        F = np.empty(2 * n)
        F[:n - 1] = ode_L[:n - 1]
        F[n - 1] = (left['D'][-1] @ uL) - self.left_slope
        F[n] = uR[-1] - uL[0]
        F[n + 1:2 * n - 1] = ode_R[1:n - 1]
        F[2 * n - 1] = (right['D'][0] @ uR) - self.right_slope
        return F

    def jacobian(self, u):
        n = self.n
        uL, uR = self.split(u)
        left, right = self.patches
        J = np.zeros((2 * n, 2 * n))
        J_L = left['D'] + np.diag(2.0 * left['dz_ds'] * np.exp(uL) * left['z'])
        J_R = right['D'] + np.diag(2.0 * right['dz_ds'] * np.exp(uR) * right['z'])

        J[:n - 1, :n] = J_L[:n - 1]
        J[n - 1, :n] = left['D'][-1]
        J[n, 0] = -1.0
        J[n, 2 * n - 1] = 1.0
        J[n + 1:2 * n - 1, n:] = J_R[1:n - 1]
        J[2 * n - 1, n:] = right['D'][0]
        return J


def reduced_nonlinear_correct(data, tol=CORRECTOR_TOL, nodes=COLLOCATION_NODES, damping=NEWTON_DAMPING,
                              max_iterations=MAX_NEWTON_ITERATIONS, strict=False):
    """
    Damped Newton on the collocated D-invariant reduced system (see _ReducedSystem), started from
    log h of the given zero-mode profile. Each step is tried in full and halved by `damping` until
    the residual sup-norm drops.

    C_L is the sup-norm of the inverse Jacobian at the start; the correction is expected to stay
    below 2 C_L times the initial residual.

    Raises:
        NeckParameterError: h or chi not positive at the nodes.
        ContractionThresholdError: strict and 2 C_L |F(u0)| >= 1.
        CorrectorDivergenceError: no decrease along the Newton direction, or max_iterations reached.
    """
    profile = _profile_of(data)
    system = _ReducedSystem(profile, nodes)

    h0 = np.concatenate([np.asarray(profile.h(patch['z']), dtype=float) for patch in system.patches])
    if np.any(h0 <= 0.0):
        raise NeckParameterError("starting h is not positive on [-1, 1/2]")
    u0 = np.log(h0)

    F = system.residual(u0)
    norm = float(np.max(np.abs(F)))
    initial = norm
    try:
        C_L = float(np.linalg.norm(np.linalg.inv(system.jacobian(u0)), np.inf))
    except np.linalg.LinAlgError:
        raise CorrectorDivergenceError("singular Jacobian at the starting profile", residual=norm, iterations=0)

    bound = 2.0 * C_L * initial
    if bound >= CONTRACTION_LIMIT:
        message = f"T = {profile.T:g}: 2 C_L |F(u0)| = {bound:.3g} is not below {CONTRACTION_LIMIT:g}"
        if strict:
            raise ContractionThresholdError(message)
        Logger.warning(message)

    u = u0.copy()
    log = [norm]
    iterations = 0
    while norm >= tol:
        if iterations >= max_iterations:
            raise CorrectorDivergenceError(f"no convergence in {iterations} iterations", residual=norm, iterations=iterations)
        try:
            step = np.linalg.solve(system.jacobian(u), -F)
        except np.linalg.LinAlgError:
            raise CorrectorDivergenceError("singular Jacobian", residual=norm, iterations=iterations)

        scale = 1.0
        while True:
            trial = u + scale * step
            F_trial = system.residual(trial)
            trial_norm = float(np.max(np.abs(F_trial)))
            if np.isfinite(trial_norm) and trial_norm < norm:
                break
            scale *= damping
            if scale < MIN_STEP_SCALE:
                raise CorrectorDivergenceError("residual does not decrease along the Newton direction", residual=norm, iterations=iterations)

        u, F, norm = trial, F_trial, trial_norm
        iterations += 1
        log.append(norm)
        Logger.debug(f"T = {profile.T:g}: iteration {iterations}, step scale {scale:g}, residual {norm:.3g}")

    correction = float(np.max(np.abs(u - u0)))
    uL, uR = system.split(u)
    left, right = system.patches
    z = np.concatenate([left['z'][::-1], right['z'][::-1][1:]])
    h = np.exp(np.concatenate([uL[::-1], uR[::-1][1:]]))
    chi = np.concatenate([left['chi'][::-1], right['chi'][::-1][1:]])

    Logger.info(f"T = {profile.T:g}: corrector converged in {iterations} iterations, correction {correction:.3g}, bound {bound:.3g}")
    return CorrectorResult(
        T=float(profile.T),
        z=z,
        h=h,
        chi=chi,
        iterations=iterations,
        residual_log=tuple(log),
        initial_residual=initial,
        correction_norm=correction,
        C_L=C_L,
        bound=bound,
        within_bound=correction <= bound,
    )
