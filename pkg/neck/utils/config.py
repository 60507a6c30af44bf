import re
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from dotenv import dotenv_values

from neck.parameters import SeriesSettings, WeightSpec
from neck.utils.data_processing import config_hash
from neck.utils.errors import ConfigError
from neck.utils.logger import Logger


DEFAULTS = {
    # Run
    'T_LIST': '25,50,100',
    'LAMBDA_LIST': '1,3',
    'SPECTRUM': 'torus:8',
    'K_MINUS': '0',
    'K_PLUS': '-1',
    'OUTPUT_DIR': 'out',
    'SVG': 'true',

    # Neck construction
    'C2': '1.0',
    'LAMBDA_MAX': '8',
    'TAIL_EPSILON': '0.9',
    'QUAD_NODES': '256',

    # Special functions / mode solver
    'MAX_LAMBDA': '60',
    'DISK_MARGIN': '0.05',
    'SERIES_TOL': '1e-14',
    'SERIES_MAX_TERMS': '1000000',
    'SIGMA_TOL': '1e-9',

    # Weights
    'C3': '0.5',
    'DELTA': '0.3',
    'DELTA0': '0.6',
    'NU': '-1.8',
    'MU': '0.6',
    'ALPHA_HOLDER': '0.5',

    # Validation
    'COLLOCATION_NODES': '64',
    'NEWTON_DAMPING': '0.5',
    'CORRECTOR_TOL': '1e-9',
    'LIMIT_CONSTANT': '25',

    # Logging
    'LOG_LEVEL': '3',
    'LOG_DIR': 'data/logs',
}

# where results and logs go does not change them
NOT_HASHED = ('OUTPUT_DIR', 'LOG_LEVEL', 'LOG_DIR')

COMMANDS = ('modes', 'assemble', 'verify', 'limits', 'models', 'err-scan')


@dataclass(frozen=True)
class SpectrumSpec:
    provider: str
    n_max: int = 8
    count: int = 0
    seed: int = 0

    @property
    def tag(self):
        if self.provider == 'torus':
            return f"torus:{self.n_max}"
        return f"synthetic:{self.count},{self.seed}"


@dataclass(frozen=True)
class RunConfig:
    command: str
    T_list: Tuple[float, ...]
    lambda_list: Tuple[float, ...]
    spectrum: SpectrumSpec
    weights: WeightSpec
    output_dir: str
    k_minus: int = 0
    k_plus: int = -1
    C2: float = 1.0
    lambda_max: float = 8.0
    tail_epsilon: float = 0.9
    quad_nodes: int = 256
    max_lambda: float = 60.0
    series: SeriesSettings = field(default_factory=SeriesSettings)
    sigma_tol: float = 1e-9
    collocation_nodes: int = 64
    newton_damping: float = 0.5
    corrector_tol: float = 1e-9
    limit_constant: float = 25.0
    svg: bool = True
    exact_family: Optional[Tuple[float, float]] = None
    config_hash: str = field(default="", compare=False)

    @property
    def seed(self):
        """Seed of the synthetic spectrum; 0 for the torus."""
        return self.spectrum.seed

    def weights_at(self, T):
        return replace(self.weights, T=float(T))


class Config:
    def __init__(self, path=None, overrides=None):
        self.path = path
        self.logger = Logger()
        self._lines = {}
        raw = dict(DEFAULTS)

        if path is not None:
            raw.update(self.read_file(path))

        for key, value in (overrides or {}).items():
            if value is not None:
                raw[key] = str(value)

        self.raw = raw

        # Run Settings
        self.T_LIST = self.parse_float_list('T_LIST')
        self.LAMBDA_LIST = self.parse_float_list('LAMBDA_LIST', allow_empty=True)
        self.SPECTRUM = self.parse_spectrum('SPECTRUM')
        self.K_MINUS = self.parse_int('K_MINUS')
        self.K_PLUS = self.parse_int('K_PLUS')
        self.OUTPUT_DIR = raw['OUTPUT_DIR'] or self.raise_error("Missing OUTPUT_DIR", key='OUTPUT_DIR')
        self.SVG = self.parse_bool('SVG')

        # Neck Settings
        self.C2 = self.parse_float('C2', positive=True)
        self.LAMBDA_MAX = self.parse_float('LAMBDA_MAX', positive=True)
        self.TAIL_EPSILON = self.parse_float('TAIL_EPSILON', positive=True)
        self.QUAD_NODES = self.parse_int('QUAD_NODES', minimum=8)

        # Solver Settings
        self.MAX_LAMBDA = self.parse_float('MAX_LAMBDA', positive=True)
        self.DISK_MARGIN = self.parse_float('DISK_MARGIN', positive=True)
        self.SERIES_TOL = self.parse_float('SERIES_TOL', positive=True)
        self.SERIES_MAX_TERMS = self.parse_int('SERIES_MAX_TERMS', minimum=1)
        self.SIGMA_TOL = self.parse_float('SIGMA_TOL', positive=True)

        # Weight Settings
        self.C3 = self.parse_float('C3', positive=True)
        self.DELTA = self.parse_float('DELTA')
        self.DELTA0 = self.parse_float('DELTA0', positive=True)
        self.NU = self.parse_float('NU')
        self.MU = self.parse_float('MU')
        self.ALPHA_HOLDER = self.parse_float('ALPHA_HOLDER')

        # Validation Settings
        self.COLLOCATION_NODES = self.parse_int('COLLOCATION_NODES', minimum=8)
        self.NEWTON_DAMPING = self.parse_float('NEWTON_DAMPING', positive=True)
        self.CORRECTOR_TOL = self.parse_float('CORRECTOR_TOL', positive=True)
        self.LIMIT_CONSTANT = self.parse_float('LIMIT_CONSTANT', positive=True)

        # Logging Settings
        self.LOG_LEVEL = self.parse_int('LOG_LEVEL', minimum=1)
        self.LOG_DIR = raw['LOG_DIR'] or self.raise_error("Missing LOG_DIR", key='LOG_DIR')

        if list(self.T_LIST) != sorted(self.T_LIST):
            self.raise_error("T values must be ascending", key='T_LIST')
        if self.DISK_MARGIN >= 0.25:
            self.raise_error(f"must be below 0.25, got {self.DISK_MARGIN:g}", key='DISK_MARGIN')
        for lam in self.LAMBDA_LIST:
            if lam < 0 or lam > self.MAX_LAMBDA:
                self.raise_error(f"lambda {lam:g} outside [0, {self.MAX_LAMBDA:g}]", key='LAMBDA_LIST')

    def read_file(self, path):
        """
        Read a flat KEY=value file with python-dotenv and remember the line of every key
        so later parse errors can point at it.
        """
        try:
            with open(path, 'r') as handle:
                lines = handle.read().splitlines()
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}", path=path)

        pattern = re.compile(r'^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=')
        for number, line in enumerate(lines, start=1):
            match = pattern.match(line)
            if match:
                self._lines[match.group(1)] = number
            elif line.strip() and not line.lstrip().startswith('#'):
                raise ConfigError(f"expected KEY=value, got {line.strip()!r}", path=path, line=number)

        values = dotenv_values(path)
        for key in values:
            if key not in DEFAULTS:
                raise ConfigError("unknown key", path=path, line=self._lines.get(key), key=key)
            if values[key] is None:
                raise ConfigError("missing value", path=path, line=self._lines.get(key), key=key)
        return values

    def parse_float(self, key, positive=False):
        text = self.raw[key]
        try:
            value = float(text)
        except (TypeError, ValueError):
            self.raise_error(f"could not parse {text!r} as a number", key=key)
        if positive and not value > 0:
            self.raise_error(f"must be positive, got {text!r}", key=key)
        return value

    def parse_int(self, key, minimum=None):
        text = self.raw[key]
        try:
            value = int(text)
        except (TypeError, ValueError):
            self.raise_error(f"could not parse {text!r} as an integer", key=key)
        if minimum is not None and value < minimum:
            self.raise_error(f"must be at least {minimum}, got {value}", key=key)
        return value

    def parse_bool(self, key):
        text = str(self.raw[key]).strip().lower()
        if text in ('1', 'true', 'yes', 'on'):
            return True
        if text in ('0', 'false', 'no', 'off'):
            return False
        self.raise_error(f"could not parse {text!r} as a boolean", key=key)

    def parse_float_list(self, key, allow_empty=False):
        text = str(self.raw[key]).strip()
        if not text:
            if allow_empty:
                return ()
            self.raise_error("list is empty", key=key)
        try:
            return tuple(float(item) for item in text.split(',') if item.strip())
        except ValueError:
            self.raise_error(f"could not parse {text!r} as a comma separated list of numbers", key=key)

    def parse_spectrum(self, key):
        text = str(self.raw[key]).strip()
        provider, _, arguments = text.partition(':')
        try:
            if provider == 'torus':
                n_max = int(arguments)
                if n_max < 1:
                    raise ValueError
                return SpectrumSpec('torus', n_max=n_max)
            if provider == 'synthetic':
                count, seed = (int(item) for item in arguments.split(','))
                if count < 1:
                    raise ValueError
                return SpectrumSpec('synthetic', count=count, seed=seed)
        except ValueError:
            pass
        self.raise_error(f"expected torus:N or synthetic:count,seed, got {text!r}", key=key)

    def run_config(self, command, exact_family=None):
        """Freeze the parsed settings into the RunConfig for one command."""
        weights = WeightSpec(
            delta=self.DELTA, nu=self.NU, mu=self.MU, alpha=self.ALPHA_HOLDER,
            T=self.T_LIST[-1], C3=self.C3, k=0, delta0=self.DELTA0,
        )
        return RunConfig(
            command=command,
            T_list=self.T_LIST,
            lambda_list=self.LAMBDA_LIST,
            spectrum=self.SPECTRUM,
            weights=weights,
            output_dir=self.OUTPUT_DIR,
            k_minus=self.K_MINUS,
            k_plus=self.K_PLUS,
            C2=self.C2,
            lambda_max=self.LAMBDA_MAX,
            tail_epsilon=self.TAIL_EPSILON,
            quad_nodes=self.QUAD_NODES,
            max_lambda=self.MAX_LAMBDA,
            series=SeriesSettings(abs_tol=self.SERIES_TOL, max_terms=self.SERIES_MAX_TERMS, margin=self.DISK_MARGIN),
            sigma_tol=self.SIGMA_TOL,
            collocation_nodes=self.COLLOCATION_NODES,
            newton_damping=self.NEWTON_DAMPING,
            corrector_tol=self.CORRECTOR_TOL,
            limit_constant=self.LIMIT_CONSTANT,
            svg=self.SVG,
            exact_family=exact_family,
            config_hash=self.config_hash(command, exact_family),
        )

    def config_hash(self, command, exact_family=None):
        payload = {key: self.raw[key] for key in sorted(self.raw) if key not in NOT_HASHED}
        payload['COMMAND'] = command
        payload['EXACT_FAMILY'] = list(exact_family) if exact_family else None
        return config_hash(payload)

    def __getitem__(self, key):
        return getattr(self, key, None)

    def raise_error(self, msg, key=None):
        line = self._lines.get(key) if key is not None else None
        path = self.path if line is not None else None
        raise ConfigError(msg, path=path, line=line, key=key)
