import os
import json
import hashlib
import tempfile
from typing import Any, Dict, Iterable, Sequence

import deepdiff
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from neck import __version__  # noqa: E402
from neck.utils.logger import Logger  # noqa: E402


def config_hash(mapping: Dict[str, Any]) -> str:
    """sha256 (first 16 hex digits) of the sorted, JSON-encoded configuration."""
    return hashlib.sha256(json.dumps(mapping, sort_keys=True).encode()).hexdigest()[:16]


def atomic_write(path, text):
    """Write text to a temporary file beside path, then rename it over path."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(handle, "w", newline="") as stream:
            stream.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise


class CsvWriter:
    @staticmethod
    def format_value(value, float_format=".12g"):
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, int):
            return str(value)
        if isinstance(value, float):
            return format(value, float_format)
        try:
            return format(float(value), float_format)
        except (TypeError, ValueError):
            text = str(value)
            return f'"{text}"' if "," in text else text

    @staticmethod
    def write_table(path: str, header: Iterable[str], columns: Sequence[str], rows: Iterable[Sequence[Any]], float_format=".12g") -> None:
        """
        Write a CSV table whose first lines are '#'-prefixed metadata (tool version first),
        then the column names and rows. The file is replaced atomically.

        Args:
            path (str): Destination file.
            header (Iterable[str]): Metadata lines without the '#'.
            columns (Sequence[str]): Column names.
            rows (Iterable[Sequence]): Row values; floats are written with float_format.
            float_format (str): Format spec for floats. Defaults to ".12g".
        """
        lines = [f"# tool=neck {__version__}"]
        lines.extend(f"# {line}" for line in header)
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(CsvWriter.format_value(value, float_format) for value in row))
        atomic_write(path, "\n".join(lines) + "\n")


class SvgPlotter:
    @staticmethod
    def line_plot(path, curves, title="", xlabel="", ylabel="", logx=False, logy=False):
        """
        Save a line plot as SVG. `curves` is a list of (label, x, y). A fixed hash salt and
        no Date metadata keep the file byte-identical across reruns.
        """
        with plt.rc_context({"svg.hashsalt": "neck", "svg.fonttype": "none"}):
            figure, axes = plt.subplots(figsize=(6.4, 4.0))
            for label, x, y in curves:
                axes.plot(x, y, label=label, linewidth=1.2)
            if logx:
                axes.set_xscale("log")
            if logy:
                axes.set_yscale("log")
            axes.set_title(title)
            axes.set_xlabel(xlabel)
            axes.set_ylabel(ylabel)
            if len(curves) > 1:
                axes.legend(loc="best", fontsize="small")
            axes.grid(True, linewidth=0.3)

            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            temporary = os.path.join(directory, f".tmp-{os.path.basename(path)}")
            figure.savefig(temporary, format="svg", metadata={"Date": None})
            plt.close(figure)
        os.replace(temporary, path)
        Logger.debug(f"Saved plot {path}")


class CacheManager:
    @staticmethod
    def save_data_to_cache(filename: str, data: Dict[str, Any]) -> None:
        """Save data to a JSON file."""
        atomic_write(filename, json.dumps(data, indent=4, sort_keys=True) + "\n")

    @staticmethod
    def load_data_from_cache(filename: str) -> Dict[str, Any]:
        """Load data from a JSON file."""
        with open(filename, 'r') as cache:
            cached_file = json.load(cache)
        return cached_file

    @staticmethod
    def get_cache_difference(full_path: str, data: Dict[str, Any]) -> Dict[str, Any]:
        """
        Compare data with the cached copy at full_path using deepdiff, then store data as the
        new cached copy. The first run has nothing to compare against and returns {}.
        """
        if not os.path.isfile(full_path):
            CacheManager.save_data_to_cache(full_path, data)
            return {}

        cached_data = CacheManager.load_data_from_cache(full_path)

        # significant_digits keeps float noise below the report precision out of the diff
        difference = deepdiff.DeepDiff(cached_data, data, ignore_order=True, significant_digits=10).to_json()
        result = json.loads(difference)
        CacheManager.save_data_to_cache(full_path, data)
        if len(result) == 0:
            return {}
        else:
            return result
