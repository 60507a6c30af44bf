import argparse

from neck.utils.config import COMMANDS


def _number_list(text):
    try:
        values = [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}")
    return ",".join(repr(value) for value in values)


def _exact_family(text):
    try:
        a, c = (float(item) for item in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A,C, got {text!r}")
    return a, c


class ArgumentParser:
    # flag destination -> configuration key
    OVERRIDES = {
        'T': 'T_LIST',
        'lambda_list': 'LAMBDA_LIST',
        'spectrum': 'SPECTRUM',
        'k_minus': 'K_MINUS',
        'k_plus': 'K_PLUS',
        'out': 'OUTPUT_DIR',
        'svg': 'SVG',
        'lambda_max': 'LAMBDA_MAX',
    }

    def __init__(self, argv=None):
        self.args = self.parse_arguments(argv)

    def parse_arguments(self, argv=None):
        """
        Parse `neck <command> [flags]`. argparse exits with status 2 on usage errors.
        """
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('-v', '--verbose', action='store_true', help='Enable verbose logging')
        common.add_argument('--config', metavar='PATH', help='KEY=value configuration file')
        common.add_argument('--out', metavar='DIR', help='Output directory')
        common.add_argument('--T', type=_number_list, metavar='a,b,c', help='Values of T, ascending')
        common.add_argument('--lambda', dest='lambda_list', type=_number_list, metavar='a,b,c', help='Eigenvalues for the modes command')
        common.add_argument('--spectrum', metavar='torus:N|synthetic:count,seed', help='Spectrum provider')
        common.add_argument('--k-minus', type=int, help='Degree k_- of the z < 0 end')
        common.add_argument('--k-plus', type=int, help='Degree k_+ of the z > 0 end')
        common.add_argument('--lambda-max', type=float, help='Truncation Lambda_max of the eigen-expansion')
        common.add_argument('--svg', action=argparse.BooleanOptionalAction, default=None, help='Write SVG plots')

        parser = argparse.ArgumentParser(prog='neck', description='Neck metric construction and verification')
        commands = parser.add_subparsers(dest='command', required=True, metavar='command')
        for command in COMMANDS:
            sub = commands.add_parser(command, parents=[common])
            if command == 'err-scan':
                sub.add_argument('--exact-family', type=_exact_family, metavar='A,C', help='Scan the exact family instead of the neck')

        args = parser.parse_args(argv)
        if args.command == 'modes' and args.lambda_list == "":
            parser.error("--lambda needs at least one value")
        return args

    def overrides(self):
        values = {}
        for dest, key in self.OVERRIDES.items():
            value = getattr(self.args, dest, None)
            if value is None:
                continue
            if isinstance(value, bool):
                value = 'true' if value else 'false'
            values[key] = str(value)
        return values

    @property
    def exact_family(self):
        return getattr(self.args, 'exact_family', None)
