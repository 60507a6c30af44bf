import pytest

from neck.utils.argument_parser import ArgumentParser


def test_flags_become_config_overrides():
    parser = ArgumentParser(['verify', '--T', '25,50', '--k-minus', '1', '--k-plus', '0', '--no-svg', '--out', 'runs'])
    assert parser.args.command == 'verify'
    assert parser.overrides() == {
        'T_LIST': '25.0,50.0',
        'K_MINUS': '1',
        'K_PLUS': '0',
        'SVG': 'false',
        'OUTPUT_DIR': 'runs',
    }
    assert parser.exact_family is None


def test_unset_flags_leave_the_config_alone():
    assert ArgumentParser(['models']).overrides() == {}


def test_modes_lambda_list():
    parser = ArgumentParser(['modes', '--lambda', '1,3.5', '-v'])
    assert parser.overrides()['LAMBDA_LIST'] == '1.0,3.5'
    assert parser.args.verbose


def test_exact_family_flag():
    parser = ArgumentParser(['err-scan', '--exact-family', '1,0.05'])
    assert parser.exact_family == (1.0, 0.05)


@pytest.mark.parametrize("argv", [
    [],
    ['bogus'],
    ['verify', '--T', 'ten'],
    ['modes', '--lambda', ''],
    ['verify', '--exact-family', '1,0.05'],
    ['err-scan', '--exact-family', '1'],
])
def test_usage_errors_exit_with_status_2(argv):
    with pytest.raises(SystemExit) as error:
        ArgumentParser(argv)
    assert error.value.code == 2
