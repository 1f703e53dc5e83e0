"""Cell-population heatmap engine: load counts, apply views, render figures."""

import json as _json

from . import _cellpop
from ._cellpop import CellpopError, Dataset, discover_datasets, kde, load_dataset

__all__ = [
    "CellpopError",
    "Dataset",
    "apply_view",
    "dataset_from_counts_csv",
    "default_config",
    "discover_datasets",
    "kde",
    "load_dataset",
    "preset_stacked_bars",
    "render_model",
    "render_png",
    "render_svg",
    "unique_type_summary",
]


def _dump(config):
    return "" if config is None else _json.dumps(config)


def dataset_from_counts_csv(text, name="dataset"):
    return _cellpop.dataset_from_counts_csv(text, name)


def default_config(dataset):
    return _json.loads(_cellpop.default_config(dataset))


def preset_stacked_bars(dataset):
    return _json.loads(_cellpop.preset_stacked_bars(dataset))


def apply_view(dataset, config=None):
    """Displayed rows, columns and values. `config` is a partial ViewConfig dict."""
    return _json.loads(_cellpop.apply_view(dataset, _dump(config)))


def render_model(dataset, config=None):
    return _json.loads(_cellpop.render_model(dataset, _dump(config)))


def render_svg(dataset, config=None, width=1200, height=900):
    return _cellpop.render_svg(dataset, _dump(config), width, height)


def render_png(dataset, config=None, scale=2):
    return _cellpop.render_png(dataset, _dump(config), scale)


def unique_type_summary(datasets):
    return _cellpop.unique_type_summary(list(datasets))
