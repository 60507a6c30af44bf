import os
import sys
import math

import numpy as np

from neck.mode_solver import (
    classify_sigma,
    decay_exponent_fit,
    hypergeom_params_of,
    jump_at_zero,
    mode_for,
    mode_value_at_zero_closed_form,
    monotonicity_check,
)
from neck.model_spaces import CalabiModel, TaubNUT
from neck.neck_assembly import FieldGrid, build_neck, corrected_h, exact_family_profile, write_field_dump
from neck.specfun import using_series_settings
from neck.spectrum import TWO_PI, export_spectrum_csv
from neck.suites import ORDER_TOLERANCE, VerificationSuite, spectrum_from
from neck.utils.argument_parser import ArgumentParser
from neck.utils.config import Config
from neck.utils.data_processing import CacheManager, CsvWriter, SvgPlotter
from neck.utils.errors import ConfigError, FitDegeneracyError, NeckError, UsageError
from neck.utils.logger import Logger
from neck.utils.task_handler import REPORT_COLUMNS, TaskHandler
from neck.validation import einstein_error_zero_mode, err_scan_grid, fit_order, kahler_potential_zero_mode


EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

MODE_GRID_POINTS = 301
FIELD_GRID = (12, 12, 25)


def header_lines(cfg, *extra):
    lines = [f"command={cfg.command}", f"config_hash={cfg.config_hash}", f"spectrum={cfg.spectrum.tag}"]
    if cfg.spectrum.provider == 'torus':
        lines.append("curvature=flat (machinery verification only)")
    return [*lines, *extra]


def output_path(cfg, filename):
    return os.path.join(cfg.output_dir, filename)


def mode_grid(T, points=MODE_GRID_POINTS):
    s = np.linspace(math.asinh(-T), math.asinh(T / 2.0), points)
    return np.sinh(s) / T


def cmd_modes(cfg):
    """
    Tables of f and f' per (T, lambda), a summary with the closed-form f(0), the jump at 0, the
    monotonicity verdict and decay fits, and one SVG of the f curves per T.
    """
    if not cfg.lambda_list:
        raise UsageError("modes needs at least one eigenvalue (LAMBDA_LIST or --lambda)")

    curve_rows, summary_rows = [], []
    for T in cfg.T_list:
        z = mode_grid(T)
        curves = []
        for lam in cfg.lambda_list:
            m = mode_for(lam, T, 1.0, cfg.max_lambda, cfg.sigma_tol)
            f, f_z, _ = m.evaluate(z)
            curve_rows.extend((T, lam, zi, fi, fzi) for zi, fi, fzi in zip(z, f, f_z))
            curves.append((f"lambda={lam:g}", z, f))

            closed_form = math.nan
            if lam > 2 and not classify_sigma(lam, cfg.sigma_tol).in_sigma:
                closed_form = mode_value_at_zero_closed_form(lam, T, 1.0, cfg.sigma_tol)

            slope, expected = math.nan, (-1.0 if lam == 0 else -hypergeom_params_of(lam).alpha)
            if 50.0 / T <= 0.5:
                slope = decay_exponent_fit(m, (10.0 / T, 50.0 / T)).slope

            monotone = monotonicity_check(m, z).passed
            summary_rows.append((
                T, lam, float(m(np.array([0.0]))[0]), closed_form, jump_at_zero(m).relative_error,
                monotone, slope, expected, m.error_bar,
            ))

        if cfg.svg:
            SvgPlotter.line_plot(output_path(cfg, f"modes_T{T:g}.svg"), curves, title=f"f_lambda, T = {T:g}", xlabel="z", ylabel="f")

    CsvWriter.write_table(output_path(cfg, "modes.csv"), header_lines(cfg), ('T', 'lambda', 'z', 'f', 'f_z'), curve_rows)
    CsvWriter.write_table(
        output_path(cfg, "modes_summary.csv"),
        header_lines(cfg, "decay slope fitted on T z in [10, 50], nan when 50/T > 1/2"),
        ('T', 'lambda', 'f0', 'f0_closed_form', 'jump_relative_error', 'monotone', 'decay_slope', 'expected_slope', 'sigma_error_bar'),
        summary_rows,
    )
    return EXIT_PASS


def cmd_assemble(cfg):
    """Field dump of (h, chi, delta h, delta chi) per T, the spectrum used and h/T^2 plots at p."""
    spectrum = spectrum_from(cfg.spectrum)
    export_spectrum_csv(spectrum, output_path(cfg, "spectrum.csv"), header_lines(cfg))

    n1, n2, nz = FIELD_GRID
    for T in cfg.T_list:
        nd = build_neck(spectrum, T, cfg.k_minus, cfg.k_plus, cfg.lambda_max, cfg.C2, cfg.max_lambda, cfg.sigma_tol, cfg.tail_epsilon)
        p = spectrum.base_point
        grid = FieldGrid(
            p.theta1 + np.linspace(0.0, TWO_PI, n1, endpoint=False) + 0.5 * TWO_PI / n1,
            p.theta2 + np.linspace(0.0, TWO_PI, n2, endpoint=False) + 0.5 * TWO_PI / n2,
            mode_grid(T, nz),
        )
        write_field_dump(nd, output_path(cfg, f"assemble_T{T:g}.csv"), grid, header_lines(cfg))

        if cfg.svg:
            z = mode_grid(T)
            z = z[z != 0.0]
            antipode = (p.theta1 + math.pi, p.theta2 + math.pi)
            h = corrected_h(nd)
            curves = [
                ("at p", z, h(p.theta1, p.theta2, z) / T**2),
                ("antipode", z, h(antipode[0], antipode[1], z) / T**2),
            ]
            SvgPlotter.line_plot(output_path(cfg, f"assemble_T{T:g}.svg"), curves, title=f"h / T^2, T = {T:g}", xlabel="z", ylabel="h / T^2")
    return EXIT_PASS


def write_report(cfg, handler, filename):
    columns = REPORT_COLUMNS
    CsvWriter.write_table(output_path(cfg, f"{filename}.csv"), header_lines(cfg), columns, handler.rows)

    def clean(value):
        return None if isinstance(value, float) and math.isnan(value) else value

    data = {
        "command": cfg.command,
        "config_hash": cfg.config_hash,
        "rows": [{column: clean(value) for column, value in zip(columns, row)} for row in handler.rows],
    }
    difference = CacheManager.get_cache_difference(output_path(cfg, f"{filename}.json"), data)
    if difference:
        Logger.info(f"{filename} changed since the previous run: {difference}")
    else:
        Logger.info(f"{filename} unchanged since the previous run")


def run_suite(cfg):
    suite = VerificationSuite(cfg)
    handler = TaskHandler()
    for test_id, task in suite.tasks(cfg.command):
        handler.run(test_id, task)

    write_report(cfg, handler, "report" if cfg.command == 'verify' else cfg.command)
    for failure in handler.failed():
        Logger.warning(f"FAILED {failure.test_id} T = {failure.T:g} {failure.zone_or_case}: {failure.value:.6g} > {failure.bound:.6g}")
    return handler


def cmd_verify(cfg):
    handler = run_suite(cfg)
    return EXIT_PASS if handler.all_passed else EXIT_FAILURE


def cmd_limits(cfg):
    handler = run_suite(cfg)
    if cfg.svg:
        curves = []
        for test_id in sorted({row.test_id for row in handler.rows if not row.test_id.endswith('_order')}):
            rows = [row for row in handler.rows if row.test_id == test_id and not math.isnan(row.T) and row.value > 0]
            for label in sorted({row.zone_or_case for row in rows}):
                selected = [row for row in rows if row.zone_or_case == label]
                if len(selected) > 1:
                    curves.append((f"{test_id} {label}", [row.T for row in selected], [row.value for row in selected]))
        if curves:
            SvgPlotter.line_plot(output_path(cfg, "limits.svg"), curves, title="deviation from the limit geometries", xlabel="T", ylabel="deviation", logx=True, logy=True)
    return EXIT_PASS if handler.all_passed else EXIT_FAILURE


def cmd_models(cfg):
    handler = run_suite(cfg)
    if cfg.svg:
        r = np.geomspace(0.05, 5.0, 200)
        SvgPlotter.line_plot(
            output_path(cfg, "models_taub_nut.svg"),
            [(f"a={a:g}", r, TaubNUT(a).potential(r)) for a in (0.5, 1.0, 2.0)],
            title="Taub-NUT potential", xlabel="r", ylabel="V", logx=True, logy=True,
        )
        curves = []
        for n in (1, 2):
            lower, _ = CalabiModel(n).domain
            z = np.linspace(0.98 * lower, 0.02 * lower, 200)
            curves.append((f"n={n}", z, CalabiModel(n).h(z)))
        SvgPlotter.line_plot(output_path(cfg, "models_calabi.svg"), curves, title="Calabi h", xlabel="z", ylabel="h", logy=True)
    return EXIT_PASS if handler.all_passed else EXIT_FAILURE


def cmd_err_scan(cfg):
    """
    sup |Err| per zone for each T and the fitted order, or the exact family's errors at the
    quadrature floor (no fit). A fitted order outside -1 +- 0.3 is flagged with exit status 1.
    """
    rows = []
    curves = []
    if cfg.exact_family is not None:
        a, c = cfg.exact_family
        profiles = [exact_family_profile(a, c, cfg.C2)]
    else:
        if len(cfg.T_list) < 3:
            raise UsageError(f"err-scan needs at least three T values, got {len(cfg.T_list)}")
        spectrum = spectrum_from(cfg.spectrum)
        profiles = [
            build_neck(spectrum, T, cfg.k_minus, cfg.k_plus, 0.0, cfg.C2, cfg.max_lambda, cfg.sigma_tol).zero_mode_profile()
            for T in cfg.T_list
        ]

    sups = []
    for profile in profiles:
        z = err_scan_grid(profile.T)
        if cfg.exact_family is not None:
            a, _ = cfg.exact_family
            z = z[a * z + 1.0 > 0.0]
        report = einstein_error_zero_mode(profile, z)
        sups.append(report.sup_err)
        rows.extend((report.T, zone, value) for zone, value in report.per_zone.items())
        if cfg.svg:
            phi = kahler_potential_zero_mode(profile)(z)
            err = np.abs(profile.chi(z) / profile.h(z) * np.exp(-phi) - 1.0)
            curves.append((f"T={profile.T:g}", z, np.maximum(err, 1e-300)))

    flagged = False
    extra = []
    try:
        if cfg.exact_family is not None:
            raise FitDegeneracyError("exact family: one profile, errors at the quadrature floor")
        fit = fit_order([profile.T for profile in profiles], sups)
        flagged = abs(fit.order + 1.0) > ORDER_TOLERANCE
        extra = [f"fitted_order={fit.order:.6g}", f"fit_constant={fit.constant:.6g}", f"flagged={'true' if flagged else 'false'}"]
        Logger.info(f"Einstein error order {fit.order:.4g} (constant {fit.constant:.4g})")
        if flagged:
            Logger.warning(f"Einstein error order {fit.order:.4g} is not within {ORDER_TOLERANCE} of -1")
    except FitDegeneracyError as e:
        extra = ["fitted_order=skipped"]
        Logger.info(f"Order fit skipped: {e}")

    CsvWriter.write_table(output_path(cfg, "err_scan.csv"), header_lines(cfg, *extra), ('T', 'zone', 'sup_err'), rows)
    if cfg.svg:
        SvgPlotter.line_plot(output_path(cfg, "err_scan.svg"), curves, title="|Err| of the zero-mode metric", xlabel="z", ylabel="|Err|", logy=True)
    return EXIT_FAILURE if flagged else EXIT_PASS


COMMAND_HANDLERS = {
    'modes': cmd_modes,
    'assemble': cmd_assemble,
    'verify': cmd_verify,
    'limits': cmd_limits,
    'models': cmd_models,
    'err-scan': cmd_err_scan,
}


def main(argv=None):
    try:
        parser = ArgumentParser(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    args = parser.args

    try:
        config = Config(args.config, parser.overrides())
        cfg = config.run_config(args.command, parser.exact_family)
    except ConfigError as e:
        sys.stderr.write(f"neck: {e}\n")
        return EXIT_USAGE

    Logger.configure(config.LOG_LEVEL, f"neck-{args.command}", output_dir=config.LOG_DIR, console=args.verbose)
    os.makedirs(cfg.output_dir, exist_ok=True)

    try:
        with using_series_settings(cfg.series):
            status = COMMAND_HANDLERS[args.command](cfg)
    except UsageError as e:
        Logger.error(str(e))
        sys.stderr.write(f"neck: {e}\n")
        return EXIT_USAGE
    except NeckError as e:
        Logger.exception(f"{args.command} failed: {type(e).__name__}: {e}")
        sys.stderr.write(f"neck: {type(e).__name__}: {e}\n")
        return EXIT_FAILURE

    Logger.info(f"{args.command} finished with exit status {status}")
    return status


if __name__ == "__main__":
    sys.exit(main())
