import math
import os
import pathlib
import struct

import pytest

import cellpop

DATA = pathlib.Path(os.environ.get("CELLPOP_TEST_DATA_DIR", pathlib.Path(__file__).parents[2] / "tests" / "data"))
TOY = DATA / "corpus" / "toy"


@pytest.fixture(scope="module")
def toy():
    return cellpop.load_dataset(TOY)


def test_load(toy):
    assert toy.name == "toy"
    assert toy.samples == ["S1", "S2", "S3"]
    assert toy.cell_types == ["T", "B", "NK"]
    assert toy.counts == [[8, 2, 0], [5, 5, 0], [0, 1, 9]]


def test_cf_filter_row_proportions(toy):
    view = cellpop.apply_view(
        toy,
        {
            "filters": [{"axis": "samples", "field": "disease", "op": "equals", "operand": "CF"}],
            "normalization": "row_proportion",
        },
    )
    assert view["rows"] == ["S3"]
    assert view["cols"] == ["NK", "B", "T"]
    assert view["values"] == pytest.approx([0.9, 0.1, 0.0], abs=1e-12)


def test_default_config_round_trips(toy):
    config = cellpop.default_config(toy)
    assert config["row_sort"] == [{"field": "count_total", "direction": "desc"}]
    assert cellpop.apply_view(toy, config) == cellpop.apply_view(toy)


def test_render_model_and_svg(toy):
    model = cellpop.render_model(toy)
    assert len(model["grid_cells"]) == 9
    svg = cellpop.render_svg(toy, None, 400, 300)
    assert "<svg" in svg and svg == cellpop.render_svg(toy, None, 400, 300)

    stacked = cellpop.render_model(toy, cellpop.preset_stacked_bars(toy))
    assert stacked["grid_cells"] == []
    for entry in stacked["col_panel"]["entries"]:
        assert sum(s["value"] for s in entry["segments"]) == pytest.approx(1.0, abs=1e-9)


def test_png_size(toy):
    png = cellpop.render_png(toy, None, 1)
    assert png[:8] == b"\x89PNG\r\n\x1a\n"
    assert struct.unpack(">II", png[16:24]) == (1200, 900)


def test_errors(toy):
    with pytest.raises(cellpop.CellpopError) as err:
        cellpop.apply_view(toy, {"normalization": "sqrt"})
    assert err.value.code == "InvalidConfig"
    assert any(field == "normalization" for field, _ in err.value.violations)

    with pytest.raises(cellpop.CellpopError) as err:
        cellpop.kde([5, 5, 5])
    assert err.value.code == "Degenerate"

    with pytest.raises(cellpop.CellpopError):
        cellpop.dataset_from_counts_csv("sample,T\nS1,1,2\n")


def test_kde_direct_sum():
    values = [1.0, 2.0, 3.0]
    curve = cellpop.kde(values, 256)
    h = curve["bandwidth"]
    for g, d in list(zip(curve["grid"], curve["density"]))[::32]:
        direct = sum(math.exp(-0.5 * ((g - x) / h) ** 2) for x in values) / (3 * h * math.sqrt(2 * math.pi))
        assert d == pytest.approx(direct, abs=1e-9)


def test_unique_type_summary():
    a = cellpop.dataset_from_counts_csv("sample,A,B,Z\ns1,1,2,0\n", "a")
    b = cellpop.dataset_from_counts_csv("sample,B,C,D\ns1,1,1,1\n", "b")
    assert cellpop.unique_type_summary([a, b]).splitlines()[-1] == "mean,,2.50"


def test_zarr_store():
    ds = cellpop.load_dataset(DATA / "zarr" / "toy")
    assert sorted(ds.samples) == ["S1", "S2", "S3"]
