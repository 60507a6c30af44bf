"""
The approximate neck pair (chi, h) on D x [-1, 1/2].

delta h is the truncated eigen-expansion sum over lam <= Lambda_max of s f_lam^unit(z) K_lam(theta),
where K_lam(theta) = sum_i psi_i(p) psi_i(theta) over the eigenvalue group and
s = Q / (2 pi) rescales the unit source 2 pi delta_0 of the mode equation to the total source Q
of the delta h equation. Q = (k_+ - k_-) area(D), so the mean slope of chi jumps by k_+ - k_- across
z = 0. delta chi follows from the linearized equation, the corrected h blends h_0 + delta h into
the Calabi-type ends.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial import legendre
from scipy.integrate import quad_vec

from neck.mode_solver import MAX_LAMBDA, SIGMA_TOL, mode_for
from neck.spectrum import QUAD_NODES, fd_laplacian, torus_grid
from neck.utils.data_processing import CsvWriter
from neck.utils.errors import (
    NeckParameterError,
    QuadratureError,
    SingularityError,
    ZoneOverlapError,
)
from neck.utils.logger import Logger


C2_DEFAULT = 1.0
TAIL_EPSILON = 0.9
TAIL_WARNING = 1e-4
MATCH_RADIUS = 0.3
UNIT_SOURCE = -2.0 * math.pi
FD_STEP = 5e-4
QUAD_ABS_TOL = 1e-12
QUAD_REL_TOL = 1e-11


def smoothstep(x):
    """Quintic 6x^5 - 15x^4 + 10x^3 on [0, 1] and its derivative."""
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x), 30.0 * x * x * (1.0 - x) ** 2


def zone_labels(z, T, C2):
    a = np.abs(np.asarray(z, dtype=float))
    return np.where(a < C2 / (2.0 * T), 'inner', np.where(a < C2 / T, 'blend', 'outer'))


def outer_h(z, k_minus, k_plus, T):
    """(k z + 1) / ((2/3) k z^3 + z^2 + T^-2) with k = k_- for z < 0 and k_+ for z > 0, plus d/dz."""
    z = np.asarray(z, dtype=float)
    k = np.where(z < 0.0, float(k_minus), float(k_plus))
    numerator = k * z + 1.0
    denominator = (2.0 / 3.0) * k * z**3 + z * z + T**-2
    derivative = (k * denominator - numerator * (2.0 * k * z * z + 2.0 * z)) / denominator**2
    return numerator / denominator, derivative


@dataclass(frozen=True)
class SingularChart:
    """Chart (a, b, w) around p with w = Tz; (a, b) are the wrapped D offsets from p."""
    a: np.ndarray
    b: np.ndarray
    w: np.ndarray

    @classmethod
    def from_point(cls, spectrum, theta1, theta2, z, T):
        a, b = spectrum.wrapped_offset(theta1, theta2)
        return cls(np.asarray(a, dtype=float), np.asarray(b, dtype=float), T * np.asarray(z, dtype=float))

    @classmethod
    def on_axis(cls, w):
        w = np.asarray(w, dtype=float)
        return cls(np.zeros_like(w), np.zeros_like(w), w)

    @property
    def r_w(self):
        return np.sqrt(self.a**2 + self.b**2 + self.w**2)


class ModeGroup(NamedTuple):
    lam: float
    mode: object
    members: tuple


class DeltaH:
    """
    Truncated sum over eigenvalue groups in ascending lam. The summation order is fixed, so
    identical inputs give bit-identical values.
    """

    def __init__(self, spectrum, T, lambda_max, source_scale=1.0, max_lambda=MAX_LAMBDA, sigma_tol=SIGMA_TOL, tail_epsilon=TAIL_EPSILON):
        self.spectrum = spectrum
        self.T = float(T)
        self.lambda_max = lambda_max
        self.source_scale = source_scale
        self.groups = []

        for lam, members in spectrum.groups(lambda_max):
            if all(pair.psi_at_p == 0.0 for pair in members):
                Logger.debug(f"Skipping lam = {lam:.6g}: every psi vanishes at p")
                continue
            self.groups.append(ModeGroup(lam, mode_for(lam, self.T, 1.0, max_lambda, sigma_tol), members))

        self.tail_estimate, self.partial_sum = self._tail(tail_epsilon)
        if self.tail_estimate > TAIL_WARNING * abs(self.partial_sum):
            Logger.warning(
                f"Truncation at Lambda_max = {lambda_max:g} leaves an estimated tail of {self.tail_estimate:.3g} "
                f"against a partial sum of {self.partial_sum:.6g} (T = {self.T:g})"
            )

    def _tail(self, epsilon):
        """
        Geometric tail bound at Tz = 1: fit log|term| against lam over the decaying groups and
        sum the remaining terms with ratio exp(eps * slope * mean gap).
        """
        p = self.spectrum.base_point
        z_near = np.array([1.0 / self.T])
        terms, lams = [], []
        total = 0.0
        for group in self.groups:
            kernel = float(self.spectrum.kernel(group.members, p.theta1, p.theta2))
            term = self.source_scale * kernel * float(group.mode(z_near)[0])
            total += term
            if group.lam > 0.0 and term != 0.0:
                terms.append(abs(term))
                lams.append(group.lam)

        if len(lams) < 2:
            return 0.0, total
        slope = np.polyfit(lams, np.log(terms), 1)[0]
        if slope >= 0.0:
            return math.inf, total
        ratio = math.exp(epsilon * slope * float(np.mean(np.diff(lams))))
        return terms[-1] * ratio / (1.0 - ratio), total

    def evaluate(self, theta1, theta2, z):
        """delta h with its first and second z-derivatives."""
        theta1, theta2, z = np.broadcast_arrays(
            np.asarray(theta1, dtype=float), np.asarray(theta2, dtype=float), np.asarray(z, dtype=float)
        )
        unique_z, inverse = np.unique(z.ravel(), return_inverse=True)
        value = np.zeros(z.shape)
        first = np.zeros(z.shape)
        second = np.zeros(z.shape)

        for group in self.groups:
            kernel = self.source_scale * self.spectrum.kernel(group.members, theta1, theta2)
            f, fz, fzz = (part[inverse].reshape(z.shape) for part in group.mode.evaluate(unique_z))
            value += kernel * f
            first += kernel * fz
            second += kernel * fzz
        return value, first, second

    def __call__(self, theta1, theta2, z):
        return self.evaluate(theta1, theta2, z)[0]

    def laplacian_D(self, theta1, theta2, z, step=FD_STEP):
        return fd_laplacian(lambda t1, t2: self(t1, t2, z), theta1, theta2, step)


class DeltaChi:
    """
    delta chi = (z^2 + T^-2) delta h + 2 int_0^z s delta h ds + g_inf z.

    The integral is taken as z^2 int_0^1 t delta h(zt) dt, so the integration path never
    crosses the kink of delta h at z = 0.
    """

    def __init__(self, delta_h, g_inf=0.0):
        self.delta_h = delta_h
        self.g_inf = g_inf
        self.T = delta_h.T

    def _quad(self, integrand, shape):
        result, error = quad_vec(integrand, 0.0, 1.0, epsabs=QUAD_ABS_TOL, epsrel=QUAD_REL_TOL, norm="max", limit=400)
        result = np.broadcast_to(result, shape)
        if not np.all(np.isfinite(result)) or error > 1e-7 * max(1.0, float(np.max(np.abs(result)))):
            raise QuadratureError(f"delta chi quadrature error estimate {error:.3g}")
        return result

    def _arrays(self, theta1, theta2, z):
        return np.broadcast_arrays(np.asarray(theta1, dtype=float), np.asarray(theta2, dtype=float), np.asarray(z, dtype=float))

    def integral(self, theta1, theta2, z):
        theta1, theta2, z = self._arrays(theta1, theta2, z)
        inner = self._quad(lambda t: t * self.delta_h(theta1, theta2, z * t), z.shape)
        return z * z * inner

    def __call__(self, theta1, theta2, z):
        theta1, theta2, z = self._arrays(theta1, theta2, z)
        f = self.delta_h(theta1, theta2, z)
        return (z * z + self.T**-2) * f + 2.0 * self.integral(theta1, theta2, z) + self.g_inf * z

    def derivative(self, theta1, theta2, z):
        """d/dz delta chi = (z^2 + T^-2) delta h_z + 4 z delta h + g_inf."""
        f, fz, _ = self.delta_h.evaluate(theta1, theta2, z)
        z = np.asarray(z, dtype=float)
        return (z * z + self.T**-2) * fz + 4.0 * z * f + self.g_inf

    def second_derivative(self, theta1, theta2, z):
        f, fz, fzz = self.delta_h.evaluate(theta1, theta2, z)
        z = np.asarray(z, dtype=float)
        return (z * z + self.T**-2) * fzz + 6.0 * z * fz + 4.0 * f

    def derivative_by_quadrature(self, theta1, theta2, z):
        """d/dz of the quadrature form, differentiated under the integral sign."""
        theta1, theta2, z = self._arrays(theta1, theta2, z)
        f, fz, _ = self.delta_h.evaluate(theta1, theta2, z)

        def integrand(t):
            value, slope, _ = self.delta_h.evaluate(theta1, theta2, z * t)
            return np.stack([t * value, t * t * slope])

        parts = self._quad(integrand, (2,) + z.shape)
        d_integral = 2.0 * z * parts[0] + z * z * parts[1]
        return (z * z + self.T**-2) * fz + 2.0 * z * f + 2.0 * d_integral + self.g_inf


@dataclass(frozen=True)
class ReducedProfile:
    """D-invariant pair (chi(z), h(z)) with derivatives; potential_offset is the constant of phi."""
    T: float
    chi: Callable
    chi_z: Callable
    h: Callable
    h_z: Callable
    potential_offset: float
    zones: Callable


@dataclass(frozen=True)
class NeckData:
    T: float
    k_minus: int
    k_plus: int
    truncation: float
    spectrum: object
    C2: float
    delta_h: DeltaH = field(repr=False)
    delta_chi: DeltaChi = field(repr=False)
    source_total: float = UNIT_SOURCE
    singular_remainder: float = 0.0
    max_lambda: float = MAX_LAMBDA
    sigma_tol: float = SIGMA_TOL

    @property
    def g_inf(self):
        return self.delta_chi.g_inf

    @property
    def source_charge(self):
        """c = -Q / (2 pi); the Taub-NUT potential near p is c / (2 r)."""
        return -self.source_total / (2.0 * math.pi)

    def h_with_derivative(self, theta1, theta2, z):
        theta1, theta2, z = np.broadcast_arrays(
            np.asarray(theta1, dtype=float), np.asarray(theta2, dtype=float), np.asarray(z, dtype=float)
        )
        h_out, h_out_z = outer_h(z, self.k_minus, self.k_plus, self.T)
        h, h_z = h_out.copy(), h_out_z.copy()

        near = np.abs(z) < self.C2 / self.T
        if np.any(near):
            zn = z[near]
            q = zn * zn + self.T**-2
            dh, dh_z, _ = self.delta_h.evaluate(theta1[near], theta2[near], zn)
            h_in, h_in_z = 1.0 / q + dh, -2.0 * zn / q**2 + dh_z

            half = self.C2 / (2.0 * self.T)
            s, s_prime = smoothstep((np.abs(zn) - half) / half)
            s_z = s_prime * np.sign(zn) / half
            h[near] = (1.0 - s) * h_in + s * h_out[near]
            h_z[near] = (1.0 - s) * h_in_z + s * h_out_z[near] + s_z * (h_out[near] - h_in)
        return h, h_z

    def h_eval(self, theta1, theta2, z):
        return self.h_with_derivative(theta1, theta2, z)[0]

    def chi_eval(self, theta1, theta2, z):
        return 1.0 + self.delta_chi(theta1, theta2, z)

    def chi_z_eval(self, theta1, theta2, z):
        return self.delta_chi.derivative(theta1, theta2, z)

    def near_singular_h(self, chart):
        """T^2/(1 + w^2) + delta h_lead + the regular remainder measured at p."""
        lead, _ = singular_leading_terms(chart, self.T, self.source_total)
        return self.T**2 / (1.0 + chart.w**2) + lead + self.singular_remainder

    def near_singular_chi(self, chart):
        _, lead = singular_leading_terms(chart, self.T, self.source_total)
        return 1.0 + lead

    def zero_mode_only(self):
        if all(group.lam == 0.0 for group in self.delta_h.groups):
            return self
        return build_neck(self.spectrum, self.T, self.k_minus, self.k_plus, 0.0, self.C2, self.max_lambda, self.sigma_tol)

    def zero_mode_profile(self):
        nd = self.zero_mode_only()
        p = nd.spectrum.base_point
        T, C2 = nd.T, nd.C2
        return ReducedProfile(
            T=T,
            chi=lambda z: nd.chi_eval(p.theta1, p.theta2, z),
            chi_z=lambda z: nd.chi_z_eval(p.theta1, p.theta2, z),
            h=lambda z: nd.h_eval(p.theta1, p.theta2, z),
            h_z=lambda z: nd.h_with_derivative(p.theta1, p.theta2, z)[1],
            potential_offset=-math.log(T**2),
            zones=lambda z: zone_labels(z, T, C2),
        )


def assemble_delta_h(spec, T, lambda_max, source_scale=1.0, max_lambda=MAX_LAMBDA, sigma_tol=SIGMA_TOL, tail_epsilon=TAIL_EPSILON):
    """
    The truncated sum of s f_lam psi_lam over lam <= lambda_max.

    Raises:
        ModeOverflowError: lambda_max above max_lambda.
    """
    return DeltaH(spec, T, lambda_max, source_scale, max_lambda, sigma_tol, tail_epsilon)


def delta_chi_from(dh, T=None, g_inf=0.0):
    if T is not None and T != dh.T:
        raise ValueError(f"delta h was assembled for T = {dh.T:g}, not {T:g}")
    return DeltaChi(dh, g_inf)


def corrected_h(nd):
    """
    The three-zone h as a map (theta1, theta2, z) -> h: h_0 + delta h for |z| < C2/(2T), the
    quintic blend up to C2/T and the outer closed form beyond.

    Raises:
        ZoneOverlapError: C2/T >= 1/2.
    """
    if nd.C2 / nd.T >= 0.5:
        raise ZoneOverlapError(f"C2/T = {nd.C2 / nd.T:.3g} >= 1/2: the blend zone reaches the end of [-1, 1/2]")
    return nd.h_eval


def _check_parameters(T, k_minus, k_plus, C2, spectrum, lambda_max):
    if T <= 0 or C2 <= 0:
        raise NeckParameterError(f"T and C2 must be positive, got T = {T}, C2 = {C2}")
    if k_minus < 0 or k_plus > 0 or k_minus - k_plus != 1:
        raise NeckParameterError(f"need k_- >= 0, k_+ <= 0 and k_- - k_+ = 1, got ({k_minus}, {k_plus})")
    if C2 / T >= 0.5:
        raise ZoneOverlapError(f"C2/T = {C2 / T:.3g} >= 1/2: the blend zone reaches the end of [-1, 1/2]")
    if lambda_max > spectrum.complete_below:
        raise NeckParameterError(
            f"Lambda_max = {lambda_max:g} exceeds the range where the spectrum is complete ({spectrum.complete_below:g})"
        )

    interior = np.concatenate([np.linspace(-1.0, -C2 / T, 200)[1:], np.linspace(C2 / T, 0.5, 200)[:-1]])
    h, _ = outer_h(interior, k_minus, k_plus, T)
    if np.any(h <= 0.0) or not np.all(np.isfinite(h)):
        raise NeckParameterError(f"outer closed form is not positive on the ends for (k_-, k_+) = ({k_minus}, {k_plus})")


def build_neck(spectrum, T, k_minus=0, k_plus=-1, lambda_max=8.0, C2=C2_DEFAULT, max_lambda=MAX_LAMBDA, sigma_tol=SIGMA_TOL, tail_epsilon=TAIL_EPSILON, match_radius=MATCH_RADIUS):
    """
    Assemble NeckData. The source Q = (k_+ - k_-) area(D) and g_inf = (k_+ + k_-)/2 make the mean
    slope of chi equal k_- below and k_+ above z = 0.

    Raises:
        NeckParameterError: invalid k_+-, C2 or truncation.
        ZoneOverlapError: C2/T >= 1/2.
    """
    T = float(T)
    _check_parameters(T, k_minus, k_plus, C2, spectrum, lambda_max)

    source_total = (k_plus - k_minus) * spectrum.area
    dh = assemble_delta_h(spectrum, T, lambda_max, source_total / (2.0 * math.pi), max_lambda, sigma_tol, tail_epsilon)
    dchi = delta_chi_from(dh, T, g_inf=0.5 * (k_plus + k_minus))

    # regular part of delta h at p, read off on the w-axis
    chart = SingularChart.on_axis(np.array([match_radius]))
    p = spectrum.base_point
    lead, _ = singular_leading_terms(chart, T, source_total)
    remainder = float(dh(p.theta1, p.theta2, match_radius / T) - lead[0])

    Logger.info(
        f"Built neck T = {T:g}, (k_-, k_+) = ({k_minus}, {k_plus}), {len(dh.groups)} eigenvalue groups "
        f"up to {lambda_max:g}, remainder at p {remainder:.6g}"
    )
    return NeckData(T, k_minus, k_plus, lambda_max, spectrum, C2, dh, dchi, source_total, remainder, max_lambda, sigma_tol)


def singular_leading_terms(chart, T, source_total=UNIT_SOURCE):
    """
    delta h_lead = -Q T / (4 pi r_w) and delta chi_lead = -Q / (4 pi T r_w); the unit source
    Q = -2 pi gives T/(2 r_w) and 1/(2 T r_w).

    Raises:
        SingularityError: r_w = 0.
    """
    r = chart.r_w
    if np.any(r == 0.0):
        raise SingularityError("leading terms are singular at r_w = 0")
    charge = -source_total / (4.0 * math.pi)
    return charge * T / r, charge / (T * r)


def degree_integral_D_slice(nd, z0, nodes=QUAD_NODES):
    """
    (1/area) int_D d_z chi at z = z0 by the periodic trapezoid rule, checked against the same
    rule at half the nodes.

    Raises:
        QuadratureError: the two resolutions disagree.
    """
    if abs(z0) < nd.C2 / nd.T:
        raise ValueError(f"z0 = {z0:g} lies inside the blend zone |z| < {nd.C2 / nd.T:g}")

    def mean_slope(count):
        t1, t2 = torus_grid(count)
        return float(np.mean(nd.chi_z_eval(t1, t2, z0)))

    fine, coarse = mean_slope(nodes), mean_slope(nodes // 2)
    if abs(fine - coarse) > 1e-8 * max(1.0, abs(fine)):
        raise QuadratureError(f"D-slice integral at z0 = {z0:g} changed by {abs(fine - coarse):.3g} under refinement")
    return fine


def degree_integral_sphere(chart, T, eps, source_total=UNIT_SOURCE, nodes=48):
    """
    Flux of Gamma / (2 pi) through the sphere of radius eps about the chart centre, using the
    leading closed forms near p. In (a, b, w) the integrand field is

        F = c ( -a/(2r^3), -b/(2r^3), 2w/r - w/(2r^3) - w^3/(2r^3) ),  c = -Q/(2 pi),

    whose flux is -c + (17/15) c eps^2. The value does not depend on T.
    """
    c = -source_total / (2.0 * math.pi)
    centre = np.array([float(np.ravel(chart.a)[0]), float(np.ravel(chart.b)[0]), float(np.ravel(chart.w)[0])]) if chart is not None else np.zeros(3)

    cos_theta, weights = legendre.leggauss(nodes)
    phi = np.arange(2 * nodes) * (math.pi / nodes)
    ct, ph = np.meshgrid(cos_theta, phi, indexing='ij')
    st = np.sqrt(1.0 - ct * ct)
    normal = np.stack([st * np.cos(ph), st * np.sin(ph), ct])

    a, b, w = (centre[i] + eps * normal[i] for i in range(3))
    r = np.sqrt(a * a + b * b + w * w)
    field_values = np.stack([
        -c * a / (2.0 * r**3),
        -c * b / (2.0 * r**3),
        c * (2.0 * w / r - w / (2.0 * r**3) - w**3 / (2.0 * r**3)),
    ])
    flux_density = np.sum(field_values * normal, axis=0)
    flux = eps * eps * (math.pi / nodes) * np.sum(weights[:, None] * flux_density)
    return float(flux / (2.0 * math.pi))


def exact_family_profile(a, c, C2=C2_DEFAULT):
    """chi = a z + 1, h = (a z + 1) / ((2/3) a z^3 + z^2 + c): an exact D-invariant solution."""
    if a < 0 or c <= 0:
        raise NeckParameterError(f"exact family needs a >= 0 and c > 0, got ({a}, {c})")
    T = c**-0.5

    def h(z):
        z = np.asarray(z, dtype=float)
        return (a * z + 1.0) / ((2.0 / 3.0) * a * z**3 + z * z + c)

    def h_z(z):
        z = np.asarray(z, dtype=float)
        numerator = a * z + 1.0
        denominator = (2.0 / 3.0) * a * z**3 + z * z + c
        return (a * denominator - numerator * (2.0 * a * z * z + 2.0 * z)) / denominator**2

    return ReducedProfile(
        T=T,
        chi=lambda z: a * np.asarray(z, dtype=float) + 1.0,
        chi_z=lambda z: np.full(np.shape(z), float(a)),
        h=h,
        h_z=h_z,
        potential_offset=math.log(c),
        zones=lambda z: zone_labels(z, T, C2),
    )


def maineqn1_residual(field_data, z, theta=None):
    """(log h - log chi)_z + 2 h z for a ReducedProfile, or for NeckData at D-point theta."""
    z = np.asarray(z, dtype=float)
    if isinstance(field_data, ReducedProfile):
        h, h_z = field_data.h(z), field_data.h_z(z)
        chi, chi_z = field_data.chi(z), field_data.chi_z(z)
    else:
        theta = theta or field_data.spectrum.base_point
        h, h_z = field_data.h_with_derivative(theta.theta1, theta.theta2, z)
        chi = field_data.chi_eval(theta.theta1, theta.theta2, z)
        chi_z = field_data.chi_z_eval(theta.theta1, theta.theta2, z)
    return h_z / h - chi_z / chi + 2.0 * h * z


def maineqn2_residual(nd, theta1, theta2, z, step=FD_STEP):
    """d_z^2 chi + Delta_D h away from p, with Delta_D by finite differences."""
    chi_zz = nd.delta_chi.second_derivative(theta1, theta2, z)
    h = corrected_h(nd)
    return chi_zz + fd_laplacian(lambda t1, t2: h(t1, t2, z), theta1, theta2, step)


def maineqn3_residual(nd, theta1, theta2, z, step=FD_STEP):
    """Coefficient of omega_D in chi - 1 - z chi_z + (1/2) Delta_D (log h - log chi)."""
    chi = nd.chi_eval(theta1, theta2, z)
    chi_z = nd.chi_z_eval(theta1, theta2, z)
    h = corrected_h(nd)

    def log_ratio(t1, t2):
        return np.log(h(t1, t2, z)) - np.log(nd.chi_eval(t1, t2, z))

    return chi - 1.0 - np.asarray(z) * chi_z + 0.5 * fd_laplacian(log_ratio, theta1, theta2, step)


def linearized_residual(nd, theta1, theta2, z):
    """
    d_z(delta h / h_0) - delta chi_z + 2 z delta h, with delta chi_z taken from the quadrature
    form of delta chi and the g_inf z term removed (it is the integration constant).
    """
    z = np.asarray(z, dtype=float)
    f, fz, _ = nd.delta_h.evaluate(theta1, theta2, z)
    d_ratio = (z * z + nd.T**-2) * fz + 2.0 * z * f
    chi_z = nd.delta_chi.derivative_by_quadrature(theta1, theta2, z) - nd.g_inf
    return d_ratio - chi_z + 2.0 * z * f


def deltah_equation_residual(nd, theta1, theta2, z, step=FD_STEP):
    """(z^2 + T^-2) delta h_zz + 6 z delta h_z + (4 + Delta_D) delta h at points off z = 0."""
    z = np.asarray(z, dtype=float)
    f, fz, fzz = nd.delta_h.evaluate(theta1, theta2, z)
    return (z * z + nd.T**-2) * fzz + 6.0 * z * fz + 4.0 * f + nd.delta_h.laplacian_D(theta1, theta2, z, step)


class FieldGrid(NamedTuple):
    theta1: np.ndarray
    theta2: np.ndarray
    z: np.ndarray


def write_field_dump(nd, path, grid, header=()):
    t1, t2, z = np.meshgrid(grid.theta1, grid.theta2, grid.z, indexing='ij')
    t1, t2, z = t1.ravel(), t2.ravel(), z.ravel()

    delta_h = nd.delta_h(t1, t2, z)
    delta_chi = nd.delta_chi(t1, t2, z)
    h = corrected_h(nd)(t1, t2, z)
    chi = 1.0 + delta_chi

    lines = list(header) + [
        f"T={nd.T:g}",
        f"k_minus={nd.k_minus}",
        f"k_plus={nd.k_plus}",
        f"lambda_max={nd.truncation:g}",
        f"C2={nd.C2:g}",
        f"grid={len(grid.theta1)}x{len(grid.theta2)}x{len(grid.z)}",
    ]
    rows = zip(t1, t2, z, h, chi, delta_h, delta_chi)
    CsvWriter.write_table(path, lines, ('theta1', 'theta2', 'z', 'h', 'chi', 'delta_h', 'delta_chi'), rows)
    Logger.info(f"Wrote field dump with {len(z)} points to {path}")
