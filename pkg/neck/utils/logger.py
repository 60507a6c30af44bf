import os
import sys
import logging
import inspect
from logging.handlers import TimedRotatingFileHandler


LEVELS = {1: logging.ERROR, 2: logging.WARNING, 3: logging.INFO, 4: logging.DEBUG}


class Logger:
    """
    Root-logger setup for a run plus static helpers that prefix each record with the
    calling Class.method or module.function.
    """

    @staticmethod
    def configure(log_level, filename_prefix, output_dir="data/logs", days_to_keep=10, console=False):
        """
        Daily rotating file <output_dir>/<filename_prefix>.log, first record the command line.

        Args:
            log_level (int): 1=ERROR, 2=WARNING, 3=INFO, 4=DEBUG; anything else is DEBUG.
            console (bool): Also stream records to stderr (set by --verbose).
        """
        os.makedirs(output_dir, exist_ok=True)

        formatter = logging.Formatter("%(asctime)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S")
        handler = TimedRotatingFileHandler(
            os.path.join(output_dir, f"{filename_prefix}.log"), when='D', interval=1, backupCount=days_to_keep
        )
        handler.suffix = "%Y-%m-%d"
        handlers = [handler]
        if console:
            handlers.append(logging.StreamHandler(sys.stderr))

        logger = logging.getLogger()
        logger.setLevel(LEVELS.get(log_level, logging.DEBUG))

        # configure() may run more than once in a test session
        for existing in list(logger.handlers):
            if getattr(existing, "_neck_handler", False):
                logger.removeHandler(existing)
                existing.close()

        for h in handlers:
            h.setFormatter(formatter)
            h._neck_handler = True
            logger.addHandler(h)

        logger.info("Command executed:\n# %s\n", " ".join(sys.argv))

    @staticmethod
    def _emit(log_func, message):
        frame = inspect.currentframe()
        try:
            # _emit <- Logger.<level> <- caller
            caller = frame.f_back.f_back
            code = caller.f_code
            if "self" in caller.f_locals:
                where = f"{caller.f_locals['self'].__class__.__name__}.{code.co_name}"
            else:
                where = f"{caller.f_globals.get('__name__', '?')}.{code.co_name}"
        finally:
            del frame
        log_func("%s:%s", where, message)

    @staticmethod
    def info(message):
        Logger._emit(logging.info, message)

    @staticmethod
    def warning(message):
        Logger._emit(logging.warning, message)

    @staticmethod
    def error(message):
        Logger._emit(logging.error, message)

    @staticmethod
    def exception(message):
        Logger._emit(logging.exception, message)

    @staticmethod
    def debug(message):
        Logger._emit(logging.debug, message)
