import logging

import pytest

from neck.utils.logger import Logger


@pytest.fixture
def log_dir(tmp_path):
    yield tmp_path
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, "_neck_handler", False)]:
        root.removeHandler(handler)
        handler.close()


def report_progress():
    Logger.warning("halfway")


class Runner:
    def step(self):
        Logger.info("step done")


def test_records_carry_the_caller(log_dir):
    Logger.configure(3, "neck-test", output_dir=str(log_dir))
    report_progress()
    Runner().step()
    Logger.debug("hidden at INFO")

    text = (log_dir / "neck-test.log").read_text()
    assert text.splitlines()[0].endswith("Command executed:")
    assert f"{__name__}.report_progress:halfway" in text
    assert "Runner.step:step done" in text
    assert "hidden at INFO" not in text


def test_reconfigure_replaces_the_handlers(log_dir):
    Logger.configure(2, "first", output_dir=str(log_dir))
    Logger.configure(2, "second", output_dir=str(log_dir), console=True)
    ours = [h for h in logging.getLogger().handlers if getattr(h, "_neck_handler", False)]
    assert len(ours) == 2

    Logger.error("only once")
    assert "only once" not in (log_dir / "first.log").read_text()
    assert (log_dir / "second.log").read_text().count("only once") == 1
