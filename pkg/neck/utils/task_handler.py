from typing import Callable, List, NamedTuple

from neck.utils.errors import NeckError
from neck.utils.logger import Logger


class ReportRow(NamedTuple):
    test_id: str
    T: float
    zone_or_case: str
    value: float
    bound: float
    passed: bool


REPORT_COLUMNS = ReportRow._fields[:-1] + ('pass',)


class TaskHandler:
    def __init__(self):
        self.logging = Logger()
        self.rows: List[ReportRow] = []
        self.errors: List[str] = []

    def run(self, test_id: str, task: Callable[[], List[ReportRow]]) -> List[ReportRow]:
        """
        Run one named verification task and collect its report rows.

        A task raising a NeckError is logged and recorded as a single failed row carrying the
        test id and the error, so the run continues and the failure is surfaced in the report.

        Args:
            test_id (str): Identifier written to the report.
            task (Callable): Returns the task's ReportRows.

        Returns:
            list: The rows added for this task.
        """
        try:
            rows = list(task())
        except NeckError as e:
            self.logging.error(f"[{test_id}] {type(e).__name__}: {e}")
            self.errors.append(f"{test_id}: {type(e).__name__}: {e}")
            rows = [ReportRow(test_id, float('nan'), type(e).__name__, float('nan'), float('nan'), False)]

        for row in rows:
            verdict = "pass" if row.passed else "FAIL"
            self.logging.info(f"[{row.test_id}] T = {row.T:g} {row.zone_or_case}: {row.value:.6g} (bound {row.bound:.6g}) {verdict}")
        self.rows.extend(rows)
        return rows

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def failed(self) -> List[ReportRow]:
        return [row for row in self.rows if not row.passed]
