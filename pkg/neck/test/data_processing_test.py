import numpy as np

from neck import __version__
from neck.utils.data_processing import CacheManager, CsvWriter, SvgPlotter, config_hash


def test_csv_table(tmp_path):
    path = tmp_path / "table.csv"
    CsvWriter.write_table(str(path), ["command=verify"], ('name', 'value', 'pass'), [
        ('a,b', 0.1, True),
        ('c', 1.0 / 3.0, False),
        ('d', 7, True),
    ])
    assert path.read_text().splitlines() == [
        f"# tool=neck {__version__}",
        "# command=verify",
        "name,value,pass",
        '"a,b",0.1,true',
        "c,0.333333333333,false",
        "d,7,true",
    ]
    assert [p.name for p in tmp_path.iterdir()] == ["table.csv"]


def test_numpy_values_are_formatted_as_floats():
    assert CsvWriter.format_value(np.float64(2.5)) == "2.5"
    assert CsvWriter.format_value(np.nan) == "nan"


def test_svg_is_reproducible(tmp_path):
    x = np.linspace(0.0, 1.0, 20)
    curves = [("square", x, x**2), ("cube", x, x**3)]
    first, second = tmp_path / "first.svg", tmp_path / "second.svg"
    SvgPlotter.line_plot(str(first), curves, title="powers", xlabel="x", ylabel="y")
    SvgPlotter.line_plot(str(second), curves, title="powers", xlabel="x", ylabel="y")

    assert first.read_bytes() == second.read_bytes()
    assert b"<dc:date>" not in first.read_bytes()


def test_cache_difference(tmp_path):
    path = str(tmp_path / "report.json")
    data = {"rows": [{"test_id": "gauss_identity", "value": 1e-15, "pass": True}]}
    assert CacheManager.get_cache_difference(path, data) == {}
    assert CacheManager.get_cache_difference(path, data) == {}

    changed = {"rows": [{"test_id": "gauss_identity", "value": 1e-15, "pass": False}]}
    difference = CacheManager.get_cache_difference(path, changed)
    assert "values_changed" in difference
    assert CacheManager.load_data_from_cache(path) == changed


def test_config_hash():
    assert config_hash({"a": 1, "b": "x"}) == config_hash({"b": "x", "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
    assert len(config_hash({})) == 16
