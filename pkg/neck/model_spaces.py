"""
Reduced data of the limit geometries: Taub-NUT, the Calabi model, the cylinder D x R and the
flat product C x R.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from neck.utils.errors import DomainError, SingularityError, StepSizeError
from neck.utils.logger import Logger


RICCI_STEP = 1e-3


def _as_pair(u):
    u = np.asarray(u, dtype=complex)
    return u[..., 0], u[..., 1]


def hopf(u):
    """(y, w) = (u1 u2, (|u1|^2 - |u2|^2)/2)."""
    u1, u2 = _as_pair(u)
    return u1 * u2, 0.5 * (np.abs(u1) ** 2 - np.abs(u2) ** 2)


def hopf_consistency(points):
    """max | r(Hopf(u)) - s^2/2 | over the sample."""
    y, w = hopf(points)
    u1, u2 = _as_pair(points)
    r = np.sqrt(np.abs(y) ** 2 + w**2)
    return float(np.max(np.abs(r - 0.5 * (np.abs(u1) ** 2 + np.abs(u2) ** 2))))


class TaubNUTReduced(NamedTuple):
    V: np.ndarray
    base_factor: np.ndarray
    fiber_factor: np.ndarray


@dataclass(frozen=True)
class TaubNUT:
    a: float

    def potential(self, r):
        return 1.0 / (2.0 * np.asarray(r, dtype=float)) + self.a

    def metric(self, x):
        """
        4x4 metric in x = (Re u1, Im u1, Re u2, Im u2):

            g = V (J_y^T J_y + grad w grad w^T) + V^-1 Theta Theta^T,  Theta = xi / (2r),

        with xi the generator of (u1, u2) -> (e^{it} u1, e^{-it} u2). For a = 0 this is the
        identity matrix.
        """
        x0, x1, x2, x3 = x
        r = 0.5 * (x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3)
        if r == 0.0:
            raise SingularityError("Taub-NUT metric is singular at the fixed point u = 0")
        V = 1.0 / (2.0 * r) + self.a

        jacobian = np.array([
            [x2, -x3, x0, -x1],
            [x3, x2, x1, x0],
            [x0, x1, -x2, -x3],
        ])
        theta = np.array([-x1, x0, x3, -x2]) / (2.0 * r)
        return V * jacobian.T @ jacobian + np.outer(theta, theta) / V


def taub_nut_reduced(a, point):
    """
    V = 1/(2r) + a and the Gibbons-Hawking factors (V on R^3, 1/V on the fibre) at (y, w).

    Raises:
        SingularityError: r = 0.
    """
    y, w = point
    r = np.sqrt(np.abs(np.asarray(y, dtype=complex)) ** 2 + np.asarray(w, dtype=float) ** 2)
    if np.any(r == 0.0):
        raise SingularityError("Taub-NUT potential is singular at r = 0")
    V = TaubNUT(a).potential(r)
    return TaubNUTReduced(V, V, 1.0 / V)


def taub_nut_metric(a, u):
    u1, u2 = complex(u[0]), complex(u[1])
    return TaubNUT(a).metric((u1.real, u1.imag, u2.real, u2.imag))


def ricci_tensor(metric, x, step):
    """Ricci tensor from central differences of the metric components (second order in step)."""
    x = np.asarray(x, dtype=float)
    dim = len(x)
    basis = np.eye(dim) * step

    g = metric(x)
    ginv = np.linalg.inv(g)
    dg = np.array([(metric(x + basis[m]) - metric(x - basis[m])) / (2.0 * step) for m in range(dim)])

    ddg = np.empty((dim, dim, dim, dim))
    for m in range(dim):
        for n in range(m, dim):
            if m == n:
                value = (metric(x + basis[m]) - 2.0 * g + metric(x - basis[m])) / step**2
            else:
                value = (
                    metric(x + basis[m] + basis[n]) - metric(x + basis[m] - basis[n])
                    - metric(x - basis[m] + basis[n]) + metric(x - basis[m] - basis[n])
                ) / (4.0 * step**2)
            ddg[m, n] = ddg[n, m] = value

    # first-kind symbols G[l, i, j] and their derivatives
    first_kind = 0.5 * (np.einsum('ijl->lij', dg) + np.einsum('jil->lij', dg) - dg)
    gamma = np.einsum('kl,lij->kij', ginv, first_kind)
    d_first_kind = 0.5 * (np.einsum('mijl->mlij', ddg) + np.einsum('mjil->mlij', ddg) - ddg)
    d_gamma = np.einsum('kl,mlij->mkij', ginv, d_first_kind - np.einsum('mlb,bij->mlij', dg, gamma))

    return (
        np.einsum('kkij->ij', d_gamma)
        - np.einsum('jkik->ij', d_gamma)
        + np.einsum('kkl,lij->ij', gamma, gamma)
        - np.einsum('kjl,lik->ij', gamma, gamma)
    )


class RicciReport(NamedTuple):
    max_ricci: float
    max_ricci_coarse: float
    max_ricci_fine: float
    order: float


def taub_nut_ricci_check(a, sample, step=RICCI_STEP):
    """
    max |Ric| of the Taub-NUT metric over sample (u1, u2)-points, Richardson-combined from the
    steps h and h/2. `order` is log2 of the ratio of the raw maxima, NaN when both sit at roundoff.

    Raises:
        StepSizeError: a point lies within 10 steps of the fixed point.
    """
    space = TaubNUT(a)
    coarse, fine, combined = [], [], []
    for u in sample:
        u1, u2 = complex(u[0]), complex(u[1])
        x = np.array([u1.real, u1.imag, u2.real, u2.imag])
        if np.linalg.norm(x) < 10.0 * step:
            raise StepSizeError(f"step {step:g} too large at |u| = {np.linalg.norm(x):.3g}")
        ric_h = ricci_tensor(space.metric, x, step)
        ric_half = ricci_tensor(space.metric, x, step / 2.0)
        coarse.append(np.max(np.abs(ric_h)))
        fine.append(np.max(np.abs(ric_half)))
        combined.append(np.max(np.abs((4.0 * ric_half - ric_h) / 3.0)))

    max_coarse, max_fine = float(max(coarse)), float(max(fine))
    order = math.log2(max_coarse / max_fine) if max_fine > 1e-10 else math.nan
    Logger.debug(f"Taub-NUT a = {a:g}: max |Ric| {max(combined):.3g}, order {order:.3g}")
    return RicciReport(float(max(combined)), max_coarse, max_fine, order)


def taub_nut_rescale_check(a, b, points):
    """
    Largest relative mismatch in a V_a(r) = b V_b(r_)(a/b)^2 and a / V_a(r) = b / V_b(r_),
    r_ = (a/b) r, the reduced form of a g_{TN,a} = b g_{TN,b} under y_ = (a/b) y, w_ = (a/b) w.
    """
    mismatch = 0.0
    for y, w in points:
        r = math.hypot(abs(complex(y)), w)
        r_scaled = (a / b) * r
        Va, Vb = TaubNUT(a).potential(r), TaubNUT(b).potential(r_scaled)
        base = abs(a * Va - b * Vb * (a / b) ** 2) / abs(a * Va)
        fiber = abs(a / Va - b / Vb) / abs(a / Va)
        mismatch = max(mismatch, float(base), float(fiber))
    return mismatch


def taub_nut_harmonicity(a, points, step=1e-3):
    """max |Delta_R3 V| at (y, w) points, seven-point stencil with one Richardson step."""
    space = TaubNUT(a)

    def V(p):
        return space.potential(np.linalg.norm(p))

    def laplacian(p, h):
        total = -6.0 * V(p)
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = h
            total += V(p + e) + V(p - e)
        return total / h**2

    worst = 0.0
    for y, w in points:
        p = np.array([complex(y).real, complex(y).imag, float(w)])
        value = (4.0 * laplacian(p, step / 2.0) - laplacian(p, step)) / 3.0
        worst = max(worst, abs(value))
    return worst


@dataclass(frozen=True)
class CalabiModel:
    """Degree-n Calabi model: mu(z) = n z^3/3 + z^2/2 on (-1/(2n), 0), or (-1, 0) for n = 0."""
    n: float

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"Calabi degree must be nonnegative, got {self.n}")

    @property
    def domain(self):
        return (-1.0 / (2.0 * self.n), 0.0) if self.n > 0 else (-1.0, 0.0)

    @property
    def anchor(self):
        return -1.0 / (4.0 * self.n) if self.n > 0 else -0.5

    def mu(self, z):
        return self.n * z**3 / 3.0 + z * z / 2.0

    def mu_prime(self, z):
        return self.n * z * z + z

    def h(self, z):
        """mu' / (2 z mu) = (n z + 1) / ((2/3) n z^3 + z^2)."""
        z = np.asarray(z, dtype=float)
        return (self.n * z + 1.0) / ((2.0 / 3.0) * self.n * z**3 + z * z)

    def chi(self, z):
        return 1.0 + self.n * np.asarray(z, dtype=float)

    def x(self, z):
        """int 2h from the anchor, so x is increasing toward the zero section z = 0."""
        value, _ = quad(lambda s: 2.0 * float(self.h(s)), self.anchor, z, epsabs=1e-13, epsrel=1e-13, limit=200)
        return value

    def require_inside(self, z):
        lower, upper = self.domain
        if not lower < z < upper:
            raise DomainError(f"z = {z:g} outside the Calabi domain ({lower:g}, {upper:g})")


class CalabiPoint(NamedTuple):
    h: float
    chi: float
    x: float


def calabi_profile(n, z):
    """
    Raises:
        DomainError: z not in the open domain.
    """
    model = CalabiModel(n)
    model.require_inside(z)
    return CalabiPoint(float(model.h(z)), float(model.chi(z)), model.x(z))


class CalabiConstancy(NamedTuple):
    values: np.ndarray
    variation: float
    expected: float


def calabi_ode_constancy(n, zs, step=1e-4, outer_step=1e-2):
    """
    log(F' F'') + x/n - F along z, with F(x) = log mu(z(x)) + x/n. Derivatives in x are taken
    as (d/dz) / (dx/dz), d/dz by five-point differences of local increments of F. The
    expected constant is -log n.
    """
    if n <= 0:
        raise ValueError(f"Calabi ODE check needs n > 0, got {n}")
    model = CalabiModel(n)

    def increment(z, offset):
        local, _ = quad(lambda s: 2.0 * float(model.h(s)), z, z + offset, epsabs=1e-15, epsrel=1e-14)
        return math.log(model.mu(z + offset)) - math.log(model.mu(z)) + local / n

    def five_point(func, z, h):
        return (func(z, -2 * h) - 8.0 * func(z, -h) + 8.0 * func(z, h) - func(z, 2 * h)) / (12.0 * h)

    def F_prime(z):
        return five_point(increment, z, step) / (2.0 * float(model.h(z)))

    def F_prime_increment(z, offset):
        return F_prime(z + offset) - F_prime(z)

    values = []
    for z in zs:
        for offset in (-2 * outer_step, 2 * outer_step):
            model.require_inside(z + offset)
        x = model.x(z)
        F = math.log(model.mu(z)) + x / n
        F_second = five_point(F_prime_increment, z, outer_step) / (2.0 * float(model.h(z)))
        values.append(math.log(F_prime(z) * F_second) + x / n - F)

    values = np.array(values)
    return CalabiConstancy(values, float(np.max(values) - np.min(values)), -math.log(n))


def cylinder_reduced(w):
    """(h / T^2, chi) of D x R: (1 / (w^2 + 1), 1)."""
    w = np.asarray(w, dtype=float)
    return 1.0 / (w * w + 1.0), np.ones_like(w)


def flat_product_reduced():
    return 1.0, 1.0
