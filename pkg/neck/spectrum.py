"""
Laplace eigendata (lam, psi_lam, psi_lam(p)) on a compact surface D.

Two providers: the flat torus [0, 2pi)^2 with its exact trigonometric eigenfunctions, and a
synthetic spectrum that only obeys Weyl's counting bound (its eigenfunctions are bounded
surrogates, not genuine eigenfunctions).
"""
import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Tuple

import numpy as np

from neck.mode_solver import classify_sigma
from neck.utils.data_processing import CsvWriter
from neck.utils.logger import Logger


TWO_PI = 2.0 * math.pi
TORUS_AREA = TWO_PI**2
QUAD_NODES = 256


class ProviderTag(str, Enum):
    TORUS = 'torus'
    SYNTHETIC = 'synthetic'


@dataclass(frozen=True)
class DPoint:
    theta1: float
    theta2: float

    def __post_init__(self):
        object.__setattr__(self, 'theta1', float(self.theta1) % TWO_PI)
        object.__setattr__(self, 'theta2', float(self.theta2) % TWO_PI)

    @property
    def coords(self):
        return self.theta1, self.theta2


class ConstantEigenfunction:
    def __init__(self, value):
        self.value = value

    def __call__(self, theta1, theta2):
        return np.full(np.broadcast(np.asarray(theta1), np.asarray(theta2)).shape, self.value)

    @property
    def meta(self):
        return "constant"


class TrigEigenfunction:
    """sign * cos(m t1 + n t2) / (sqrt(2) pi), or the same with sin."""

    NORM = 1.0 / (math.sqrt(2.0) * math.pi)

    def __init__(self, m, n, kind, sign=1):
        self.m, self.n, self.kind, self.sign = m, n, kind, sign
        self._trig = np.cos if kind == 'cos' else np.sin

    def __call__(self, theta1, theta2):
        return self.sign * self.NORM * self._trig(self.m * np.asarray(theta1) + self.n * np.asarray(theta2))

    @property
    def meta(self):
        return f"lattice {self.m} {self.n} {self.kind} {self.sign:+d}"


class SurrogateEigenfunction:
    """Bounded stand-in for the synthetic provider: amplitude * cos(k (t1 - p1))."""

    def __init__(self, amplitude, frequency, base_point):
        self.amplitude, self.frequency, self.base_point = amplitude, frequency, base_point

    def __call__(self, theta1, theta2):
        shape = np.broadcast(np.asarray(theta1), np.asarray(theta2)).shape
        values = self.amplitude * np.cos(self.frequency * (np.asarray(theta1) - self.base_point.theta1))
        return np.broadcast_to(values, shape)

    @property
    def meta(self):
        return f"surrogate {self.frequency}"


@dataclass(frozen=True)
class Eigenpair:
    lam: float
    psi_eval: Callable
    psi_at_p: float
    index: int

    @property
    def meta(self):
        return self.psi_eval.meta


@dataclass(frozen=True)
class SpectrumData:
    eigenpairs: Tuple[Eigenpair, ...]
    base_point: DPoint
    area: float
    provider_tag: ProviderTag
    complete_below: float = math.inf

    @property
    def psi0(self):
        return self.eigenpairs[0].psi_at_p

    def groups(self, lambda_max):
        """Eigenpairs with lam <= lambda_max grouped by eigenvalue, ascending."""
        grouped = []
        for pair in self.eigenpairs:
            if pair.lam > lambda_max + 1e-12:
                continue
            if grouped and abs(grouped[-1][0] - pair.lam) <= 1e-12 * max(1.0, pair.lam):
                grouped[-1][1].append(pair)
            else:
                grouped.append((pair.lam, [pair]))
        return [(lam, tuple(members)) for lam, members in grouped]

    def kernel(self, members, theta1, theta2):
        """sum_i psi_i(p) psi_i(theta) over one eigenvalue group."""
        total = 0.0
        for pair in members:
            if pair.psi_at_p != 0.0:
                total = total + pair.psi_at_p * pair.psi_eval(theta1, theta2)
        return total

    def wrapped_offset(self, theta1, theta2):
        """Chart offset (a, b) from the base point, each coordinate in [-pi, pi)."""
        a = (np.asarray(theta1) - self.base_point.theta1 + math.pi) % TWO_PI - math.pi
        b = (np.asarray(theta2) - self.base_point.theta2 + math.pi) % TWO_PI - math.pi
        return a, b


def _half_lattice(n_max):
    vectors = []
    for m in range(0, n_max + 1):
        for n in range(-n_max, n_max + 1):
            if m > 0 or n > 0:
                vectors.append((m, n))
    vectors.sort(key=lambda v: (v[0] ** 2 + v[1] ** 2, v[0], v[1]))
    return vectors


def torus_spectrum(n_max, p):
    """
    Eigenpairs lam^2 = m^2 + n^2, |m|, |n| <= n_max, of the flat torus of area (2 pi)^2:
    the constant 1/(2 pi), then cos and sin of m t1 + n t2 for each half-lattice vector in
    lexicographic order, each signed so psi(p) >= 0.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")

    pairs = [Eigenpair(0.0, ConstantEigenfunction(1.0 / TWO_PI), 1.0 / TWO_PI, 0)]
    for m, n in _half_lattice(n_max):
        lam = math.sqrt(m * m + n * n)
        for kind in ('cos', 'sin'):
            at_p = float(TrigEigenfunction(m, n, kind)(p.theta1, p.theta2))
            sign = -1 if at_p < -1e-14 else 1
            pairs.append(Eigenpair(lam, TrigEigenfunction(m, n, kind, sign), max(sign * at_p, 0.0), len(pairs)))

    return SpectrumData(tuple(pairs), p, TORUS_AREA, ProviderTag.TORUS, complete_below=float(n_max))


def synthetic_weyl_spectrum(count, C_weyl, seed, psi_slope=0.1, psi_cap=1.0, p=None):
    """
    `count` eigenvalues (lam0 = 0 included) drawn bin by bin so that at most floor(C_weyl k)
    of them fall in [k-1, k); psi(p) = min(psi_slope sqrt(lam), psi_cap).
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if C_weyl < 1.0:
        raise ValueError(f"C_weyl must be at least 1 so the first bin holds lam0, got {C_weyl}")

    p = p or DPoint(0.0, 0.0)
    rng = np.random.default_rng(seed)
    lambdas = [0.0]
    k = 1
    while len(lambdas) < count:
        allowed = int(math.floor(C_weyl * k)) - (1 if k == 1 else 0)
        drawn = int(rng.integers(1, allowed + 1)) if allowed > 0 else 0
        drawn = min(drawn, count - len(lambdas))
        lambdas.extend(np.sort(rng.uniform(max(k - 1.0, 1e-3), k, size=drawn)).tolist())
        k += 1

    pairs = [Eigenpair(0.0, ConstantEigenfunction(1.0 / TWO_PI), 1.0 / TWO_PI, 0)]
    for lam in lambdas[1:]:
        at_p = min(psi_slope * math.sqrt(lam), psi_cap)
        pairs.append(Eigenpair(lam, SurrogateEigenfunction(at_p, max(1, int(round(lam))), p), at_p, len(pairs)))
    return SpectrumData(tuple(pairs), p, TORUS_AREA, ProviderTag.SYNTHETIC)


class WeylReport(NamedTuple):
    bin_counts: Tuple[int, ...]
    fitted_C: float
    holds: bool
    cutoff: float


def weyl_count_check(s, C_weyl=None, cutoff=None):
    """
    Eigenvalue counts per bin [k-1, k) below the cutoff (default: where the provider's list
    is complete) and the smallest C with count_k <= C k. With C_weyl given, `holds` checks
    that bound instead.
    """
    lambdas = np.array([pair.lam for pair in s.eigenpairs])
    if cutoff is None:
        cutoff = s.complete_below if math.isfinite(s.complete_below) else float(np.ceil(lambdas.max() + 1e-12))
    bins = max(int(math.floor(cutoff)), 1)
    inside = lambdas[lambdas < bins]
    counts = np.bincount(np.floor(inside).astype(int), minlength=bins)[:bins]
    ks = np.arange(1, bins + 1)
    fitted = float(np.max(counts / ks))
    holds = bool(np.all(counts <= C_weyl * ks)) if C_weyl is not None else math.isfinite(fitted)
    return WeylReport(tuple(int(c) for c in counts), fitted, holds, float(cutoff))


def _is_sum_of_two_squares(s):
    return any(math.isqrt(s - m * m) ** 2 == s - m * m for m in range(math.isqrt(s) + 1))


def torus_sigma_values(lambda_max):
    """Torus eigenvalues sqrt(m^2 + n^2) <= lambda_max that lie in Sigma."""
    return [
        math.sqrt(s)
        for s in range(1, int(lambda_max**2) + 1)
        if _is_sum_of_two_squares(s) and classify_sigma(math.sqrt(s)).in_sigma
    ]


def reproducing_kernel(s, lam, theta1, theta2):
    """sum of psi(p) psi(theta) over the eigenpairs with eigenvalue lam."""
    for group_lam, members in s.groups(lam):
        if abs(group_lam - lam) <= 1e-12 * max(1.0, lam):
            return s.kernel(members, theta1, theta2)
    raise ValueError(f"{lam:g} is not an eigenvalue of this spectrum")


def torus_grid(nodes=QUAD_NODES):
    theta = np.arange(nodes) * (TWO_PI / nodes)
    return np.meshgrid(theta, theta, indexing='ij')


def torus_integral(values, nodes=QUAD_NODES):
    """Tensor-product trapezoid rule on the periodic grid of torus_grid."""
    return float(np.mean(values) * TORUS_AREA)


def inner_product(first, second, nodes=QUAD_NODES):
    t1, t2 = torus_grid(nodes)
    return torus_integral(first.psi_eval(t1, t2) * second.psi_eval(t1, t2), nodes)


def fd_laplacian(func, theta1, theta2, step=1e-3):
    """Five-point Laplacian in the flat torus chart."""
    theta1, theta2 = np.asarray(theta1, dtype=float), np.asarray(theta2, dtype=float)
    centre = func(theta1, theta2)
    total = func(theta1 + step, theta2) + func(theta1 - step, theta2) + func(theta1, theta2 + step) + func(theta1, theta2 - step)
    return (total - 4.0 * centre) / step**2


def export_spectrum_csv(s, path, header=()):
    lines = list(header) + [
        f"provider={s.provider_tag.value}",
        f"base_point={s.base_point.theta1!r},{s.base_point.theta2!r}",
        f"area={s.area!r}",
        f"complete_below={s.complete_below!r}",
    ]
    rows = [(pair.index, pair.lam, pair.psi_at_p, s.provider_tag.value, pair.meta) for pair in s.eigenpairs]
    CsvWriter.write_table(path, lines, ('index', 'lambda', 'psi_at_p', 'provider_tag', 'meta'), rows, float_format='.17g')
    Logger.info(f"Wrote {len(rows)} eigenpairs to {path}")


def import_spectrum_csv(path):
    """Rebuild SpectrumData from export_spectrum_csv output."""
    settings = {}
    rows = []
    with open(path, 'r', newline='') as handle:
        data_lines = []
        for line in handle:
            if line.startswith('#'):
                key, _, value = line[1:].strip().partition('=')
                settings[key.strip()] = value.strip()
            else:
                data_lines.append(line)
        rows = list(csv.DictReader(data_lines))

    theta1, theta2 = (float(v) for v in settings['base_point'].split(','))
    p = DPoint(theta1, theta2)
    tag = ProviderTag(settings['provider'])

    pairs = []
    for row in rows:
        lam, at_p = float(row['lambda']), float(row['psi_at_p'])
        words = row['meta'].split()
        if words[0] == 'constant':
            psi = ConstantEigenfunction(at_p)
        elif words[0] == 'lattice':
            psi = TrigEigenfunction(int(words[1]), int(words[2]), words[3], int(words[4]))
        else:
            psi = SurrogateEigenfunction(at_p, int(words[1]), p)
        pairs.append(Eigenpair(lam, psi, at_p, int(row['index'])))

    return SpectrumData(tuple(pairs), p, float(settings['area']), tag, float(settings['complete_below']))
