import csv
import math

from neck.main import EXIT_FAILURE, EXIT_PASS, EXIT_USAGE, main


def read_rows(path):
    with open(path) as handle:
        return list(csv.DictReader(line for line in handle if not line.startswith('#')))


def test_unknown_command(workdir):
    assert main(['bogus']) == EXIT_USAGE


def test_config_errors_are_usage_errors(workdir, capsys):
    config = workdir / "bad.env"
    config.write_text("NOT_A_KEY=1\n")
    assert main(['models', '--config', str(config)]) == EXIT_USAGE
    assert "NOT_A_KEY" in capsys.readouterr().err


def test_err_scan_needs_three_T(workdir):
    assert main(['err-scan', '--T', '25', '--out', str(workdir / 'out')]) == EXIT_USAGE


def test_modes_needs_an_eigenvalue(workdir):
    config = workdir / "empty.env"
    config.write_text("LAMBDA_LIST=\n")
    assert main(['modes', '--config', str(config), '--out', str(workdir / 'out')]) == EXIT_USAGE


def test_err_scan_on_the_exact_family(workdir):
    out = workdir / 'out'
    assert main(['err-scan', '--exact-family', '0,0.01', '--out', str(out)]) == EXIT_PASS

    text = (out / 'err_scan.csv').read_text()
    assert "# fitted_order=skipped" in text
    rows = read_rows(out / 'err_scan.csv')
    assert rows and all(float(row['sup_err']) < 1e-10 for row in rows)
    assert (out / 'err_scan.svg').exists()
    assert list((workdir / 'data' / 'logs').glob('neck-err-scan.log'))


def test_small_T_is_reported_as_a_failure(workdir):
    out = workdir / 'out'
    assert main(['limits', '--T', '2', '--out', str(out)]) == EXIT_FAILURE

    rows = read_rows(out / 'limits.csv')
    overlaps = [row for row in rows if row['zone_or_case'] == 'ZoneOverlapError']
    assert {row['test_id'] for row in overlaps} == {'limit_case1', 'limit_case3', 'limit_case4'}
    assert all(row['pass'] == 'false' for row in overlaps)
    assert (out / 'limits.json').exists()


def test_modes_outputs(workdir):
    out = workdir / 'out'
    assert main(['modes', '--T', '10', '--lambda', '1,3', '--no-svg', '--out', str(out)]) == EXIT_PASS

    summary = read_rows(out / 'modes_summary.csv')
    assert [float(row['lambda']) for row in summary] == [1.0, 3.0]
    assert float(summary[1]['f0']) <= 0.0
    assert abs(float(summary[1]["f0"]) / float(summary[1]["f0_closed_form"]) - 1.0) < 1e-7
    assert not list(out.glob('*.svg'))


def test_outputs_are_reproducible(workdir):
    first, second = workdir / 'first', workdir / 'second'
    for out in (first, second):
        assert main(['modes', '--T', '10', '--lambda', '3', '--out', str(out)]) == EXIT_PASS
    for name in ('modes.csv', 'modes_summary.csv', 'modes_T10.svg'):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_ricci_order_row_needs_a_finite_order(workdir):
    out = workdir / 'out'
    main(['models', '--no-svg', '--out', str(out)])

    rows = [row for row in read_rows(out / 'models.csv') if row['test_id'] == 'taub_nut_ricci_order']
    assert len(rows) == 1
    assert math.isfinite(float(rows[0]['value']))
    assert rows[0]['pass'] == 'true'
