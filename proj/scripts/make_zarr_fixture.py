#!/usr/bin/env python3
"""Write the zarr v2 test stores under tests/data/zarr.

The stores are encoded by hand (json + zlib + struct) following the zarr v2
storage spec and the AnnData on-disk layout, so the fixture does not depend on
the reader under test or on the zarr package.

Stores:
  toy/     3 samples x 3 cell types, chunked codes, zlib. cells.csv.expected
           and counts.csv.expected hold the same data in CSV form.
  blosc/   same layout, but the codes use the blosc compressor.
  chunking/  one int32 vector stored as one chunk and as 1-element chunks.
  edge/    legacy __categories layout, gzip, '/' chunk keys, big-endian
           codes, a missing chunk, unassigned cells and a nullable column.
"""

import gzip
import json
import random
import shutil
import struct
import zlib
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "tests" / "data" / "zarr"

TOY = {
    "S1": {"T": 8, "B": 2, "NK": 0},
    "S2": {"T": 5, "B": 5, "NK": 0},
    "S3": {"T": 0, "B": 1, "NK": 9},
}
DISEASE = {"S1": "healthy", "S2": "healthy", "S3": "CF"}


def write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def group(path, attrs=None):
    write_json(path / ".zgroup", {"zarr_format": 2})
    if attrs is not None:
        write_json(path / ".zattrs", attrs)


def vlen_utf8(items):
    out = struct.pack("<i", len(items))
    for s in items:
        b = s.encode("utf-8")
        out += struct.pack("<i", len(b)) + b
    return out


def compress(raw, compressor):
    if compressor is None:
        return raw
    if compressor["id"] == "zlib":
        return zlib.compress(raw, compressor.get("level", 1))
    if compressor["id"] == "gzip":
        return gzip.compress(raw, compressor.get("level", 1), mtime=0)
    raise ValueError(compressor["id"])


def int_array(path, values, dtype, chunk, compressor, sep=".", skip_chunks=(), fill=0, attrs=None):
    """1-d integer array; every chunk (edge included) is stored at full size."""
    fmt = {"<i1": "<b", "<i2": "<h", ">i2": ">h", "<i4": "<i", ">i4": ">i", "|b1": "<?", "|i1": "<b"}[dtype]
    meta = {
        "zarr_format": 2,
        "shape": [len(values)],
        "chunks": [chunk],
        "dtype": dtype,
        "compressor": compressor,
        "fill_value": fill,
        "order": "C",
        "filters": None,
    }
    if sep != ".":
        meta["dimension_separator"] = sep
    write_json(path / ".zarray", meta)
    if attrs is not None:
        write_json(path / ".zattrs", attrs)
    n_chunks = (len(values) + chunk - 1) // chunk
    for c in range(n_chunks):
        if c in skip_chunks:
            continue
        block = list(values[c * chunk:(c + 1) * chunk])
        block += [fill] * (chunk - len(block))
        raw = b"".join(struct.pack(fmt, v) for v in block)
        (path / str(c)).write_bytes(compress(raw, compressor))


def str_array(path, items, compressor, attrs=None):
    write_json(path / ".zarray", {
        "zarr_format": 2,
        "shape": [len(items)],
        "chunks": [len(items)],
        "dtype": "|O",
        "compressor": compressor,
        "fill_value": None,
        "order": "C",
        "filters": [{"id": "vlen-utf8"}],
    })
    if attrs is not None:
        write_json(path / ".zattrs", attrs)
    (path / "0").write_bytes(compress(vlen_utf8(items), compressor))


def categorical(path, labels, categories, code_dtype, chunk, compressor):
    group(path, {"encoding-type": "categorical", "encoding-version": "0.2.0", "ordered": False})
    codes = [categories.index(x) if x is not None else -1 for x in labels]
    int_array(path / "codes", codes, code_dtype, chunk, compressor)
    str_array(path / "categories", categories, compressor)


def toy_cells(seed):
    cells = [(s, t) for s, row in TOY.items() for t, n in row.items() for _ in range(n)]
    random.Random(seed).shuffle(cells)
    return cells


def first_appearance(seq):
    out = []
    for x in seq:
        if x not in out:
            out.append(x)
    return out


def anndata_store(store, cells, codes_compressor, with_disease=True):
    zc = {"id": "zlib", "level": 1}
    group(store, {"encoding-type": "anndata", "encoding-version": "0.1.0"})
    cols = ["sample", "cell_type"] + (["disease"] if with_disease else [])
    group(store / "obs", {"encoding-type": "dataframe", "encoding-version": "0.2.0", "_index": "_index",
                          "column-order": cols})
    str_array(store / "obs" / "_index", [f"cell{i}" for i in range(len(cells))], zc)
    samples = [s for s, _ in cells]
    types = [t for _, t in cells]
    categorical(store / "obs" / "sample", samples, sorted(set(samples)), "<i1", 8, codes_compressor)
    categorical(store / "obs" / "cell_type", types, sorted(set(types)), "<i2", 7, codes_compressor)
    if with_disease:
        categorical(store / "obs" / "disease", [DISEASE[s] for s in samples], ["CF", "healthy"], "<i1", 8,
                    codes_compressor)


def write_toy(root):
    cells = toy_cells(seed=7)
    anndata_store(root / "toy.zarr", cells, {"id": "zlib", "level": 1})
    write_json(root / "anndata.json", {"sample_key": "sample", "type_key": "cell_type",
                                       "metadata_keys": ["disease"]})

    # CSV equivalents for the test oracle, in the same first-appearance order.
    with open(root / "cells.csv.expected", "w") as f:
        f.write("cell,sample,cell_type\n")
        for i, (s, t) in enumerate(cells):
            f.write(f"cell{i},{s},{t}\n")
    samples = first_appearance(s for s, _ in cells)
    types = first_appearance(t for _, t in cells)
    with open(root / "counts.csv.expected", "w") as f:
        f.write("sample," + ",".join(types) + "\n")
        for s in samples:
            f.write(s + "," + ",".join(str(TOY[s][t]) for t in types) + "\n")


def write_blosc(root):
    blosc = {"id": "blosc", "cname": "lz4", "clevel": 5, "shuffle": 1, "blocksize": 0}
    cells = toy_cells(seed=7)
    # Chunk payloads are never decoded: the reader must reject the metadata.
    zc = {"id": "zlib", "level": 1}
    anndata_store(root / "toy.zarr", cells, zc, with_disease=False)
    meta_path = root / "toy.zarr" / "obs" / "sample" / "codes" / ".zarray"
    meta = json.loads(meta_path.read_text())
    meta["compressor"] = blosc
    write_json(meta_path, meta)


def write_edge(root):
    """Legacy layout: obs/<key> holds codes, obs/__categories/<key> the labels."""
    store = root / "edge.zarr"
    gz = {"id": "gzip", "level": 5}
    group(store, {"encoding-type": "anndata"})
    group(store / "obs", {"_index": "_index", "column-order": ["donor", "label", "age"]})
    group(store / "obs" / "__categories")
    # 10 cells; cell 4 has no donor (code -1).
    donors = [0, 0, 1, 1, -1, 1, 0, 2, 2, 2]
    int_array(store / "obs" / "donor", donors, ">i2", 4, gz, sep="/")
    str_array(store / "obs" / "__categories" / "donor", ["d1", "d2", "d3"], gz)
    # Chunk 1 (cells 4..7) is not written, so those cells read the fill value 0.
    labels = [2, 1, 1, 1, -9, -9, -9, -9, 0, 2]
    int_array(store / "obs" / "label", labels, "<i4", 4, None, skip_chunks=(1,))
    str_array(store / "obs" / "__categories" / "label", ["alpha", "beta", "gamma"], None)
    # Nullable integer: age per cell, masked for cell 0.
    group(store / "obs" / "age", {"encoding-type": "nullable-integer", "encoding-version": "0.1.0"})
    int_array(store / "obs" / "age" / "values", [30, 30, 50, 50, 50, 50, 30, 70, 70, 70], "<i4", 5, gz)
    int_array(store / "obs" / "age" / "mask", [1, 0, 0, 0, 0, 0, 0, 0, 0, 0], "|b1", 10, None, fill=False)
    write_json(root / "anndata.json", {"sample_key": "donor", "type_key": "label", "metadata_keys": ["age"]})


def write_chunking(root):
    """The same int32 vector stored as one chunk and as 1-element chunks."""
    values = [(i * 37) % 101 - 50 for i in range(20)]
    int_array(root / "one.zarr", values, "<i4", len(values), {"id": "zlib", "level": 1})
    int_array(root / "many.zarr", values, "<i4", 1, {"id": "zlib", "level": 1})
    write_json(root / "values.json", values)


def main():
    if ROOT.exists():
        shutil.rmtree(ROOT)
    for name, fn in [("toy", write_toy), ("blosc", write_blosc), ("edge", write_edge),
                     ("chunking", write_chunking)]:
        d = ROOT / name
        d.mkdir(parents=True)
        fn(d)
    print(f"wrote fixtures under {ROOT}")


if __name__ == "__main__":
    main()
