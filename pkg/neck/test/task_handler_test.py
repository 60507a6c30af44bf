import math

from neck.utils.errors import ZoneOverlapError
from neck.utils.task_handler import REPORT_COLUMNS, ReportRow, TaskHandler


def test_report_columns():
    assert REPORT_COLUMNS == ('test_id', 'T', 'zone_or_case', 'value', 'bound', 'pass')


def test_rows_are_collected():
    handler = TaskHandler()
    rows = handler.run('check', lambda: [ReportRow('check', 25.0, 'inner', 0.1, 1.0, True)])
    assert rows == handler.rows
    assert handler.all_passed
    assert handler.failed() == []


def test_errors_become_failed_rows():
    def task():
        raise ZoneOverlapError("C2/T = 0.5 >= 1/2")

    handler = TaskHandler()
    handler.run('check', lambda: [ReportRow('check', 25.0, 'inner', 0.1, 1.0, True)])
    handler.run('limit_case1', task)

    assert not handler.all_passed
    failed = handler.failed()
    assert len(failed) == 1
    assert failed[0].test_id == 'limit_case1'
    assert failed[0].zone_or_case == 'ZoneOverlapError'
    assert math.isnan(failed[0].T)
    assert handler.errors == ["limit_case1: ZoneOverlapError: C2/T = 0.5 >= 1/2"]
