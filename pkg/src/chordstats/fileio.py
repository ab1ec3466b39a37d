"""Self-describing sample and table files.

Every CSV written by this package starts with a header line

    # chordstats v<semver> json=<inline metadata>

so a file separated from the command that produced it still knows its box,
model, parameters and seed.  Two sample layouts exist: raw (one length per
row) and histogram (t_lo,t_hi,count rows).  The same payloads can be written
as a single JSON object instead.
"""

from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .stats import Histogram

try:
    VERSION = version("chordstats")
except PackageNotFoundError:  # running from a source tree
    VERSION = "0.0.0"

__all__ = ["SampleFile", "write_samples", "write_histogram", "read_sample_file",
           "write_table", "VERSION"]


@dataclass
class SampleFile:
    """Parsed contents of a sample file: raw lengths or binned counts."""

    meta: dict
    lengths: np.ndarray | None = None
    histogram: Histogram | None = None

    @property
    def is_histogram(self) -> bool:
        return self.histogram is not None

    @property
    def count(self) -> int:
        if self.lengths is not None:
            return int(self.lengths.size)
        return self.histogram.total



@contextmanager
def _open_out(path):
    """Writable handle for a path, with '-' (or None) meaning stdout."""
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh

def _header(meta: dict) -> str:
    return f"# chordstats v{VERSION} json={json.dumps(meta, separators=(',', ':'))}"


def write_samples(path, lengths, meta: dict, fmt: str = "csv"):
    meta = {**meta, "kind": "samples", "count": int(np.asarray(lengths).size)}
    if fmt == "json":
        payload = {"meta": meta, "lengths": np.asarray(lengths).tolist()}
        with _open_out(path) as fh:
            json.dump(payload, fh)
            fh.write("\n")
        return
    with _open_out(path) as fh:
        fh.write(_header(meta) + "\n")
        for v in np.asarray(lengths, dtype=np.float64):
            fh.write(f"{float(v)!r}\n")


def write_histogram(path, hist: Histogram, meta: dict, fmt: str = "csv"):
    meta = {
        **meta,
        "kind": "histogram",
        "count": hist.total,
        "range": [0.0, float(hist.edges[-1])],
        "bins": int(hist.bins),
    }
    if fmt == "json":
        payload = {
            "meta": meta,
            "bins": [
                [float(lo), float(hi), int(c)]
                for lo, hi, c in zip(hist.edges[:-1], hist.edges[1:], hist.counts)
            ],
        }
        with _open_out(path) as fh:
            json.dump(payload, fh)
            fh.write("\n")
        return
    with _open_out(path) as fh:
        fh.write(_header(meta) + "\n")
        fh.write("t_lo,t_hi,count\n")
        for lo, hi, c in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
            fh.write(f"{float(lo)!r},{float(hi)!r},{int(c)}\n")


def write_table(path, columns: dict, meta: dict, fmt: str = "csv"):
    """Write aligned columns (e.g. t and pdf values) with metadata."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    meta = {**meta, "kind": "table", "columns": names, "rows": int(arrays[0].size)}
    if fmt == "json":
        payload = {"meta": meta, **{n: a.tolist() for n, a in zip(names, arrays)}}
        with _open_out(path) as fh:
            json.dump(payload, fh)
            fh.write("\n")
        return
    with _open_out(path) as fh:
        fh.write(_header(meta) + "\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _histogram_from_rows(rows: list[tuple[float, float, int]]) -> Histogram:
    if not rows:
        raise ValueError("histogram file has no bins")
    edges = np.array([r[0] for r in rows] + [rows[-1][1]])
    counts = np.array([r[2] for r in rows], dtype=np.int64)
    widths = np.diff(edges)
    if not np.allclose(widths, widths[0], rtol=1e-9):
        raise ValueError("histogram bins are not uniform")
    return Histogram(edges, counts)


def read_sample_file(path) -> SampleFile:
    """Read a raw-sample or histogram file, CSV or JSON."""
    with open(path) as fh:
        first = fh.readline()
        if not first:
            raise ValueError(f"{path}: empty file")
        if first.lstrip().startswith("{"):
            payload = json.loads(first + fh.read())
            meta = payload.get("meta", {})
            if "lengths" in payload:
                return SampleFile(meta, lengths=np.asarray(payload["lengths"], dtype=np.float64))
            rows = [(b[0], b[1], int(b[2])) for b in payload["bins"]]
            return SampleFile(meta, histogram=_histogram_from_rows(rows))
        if not first.startswith("# chordstats"):
            raise ValueError(f"{path}: missing chordstats header")
        j = first.index("json=")
        meta = json.loads(first[j + len("json="):])
        body = [ln.strip() for ln in fh if ln.strip()]
    if meta.get("kind") == "histogram":
        rows = []
        for ln in body:
            if ln.startswith("t_lo"):
                continue
            lo, hi, c = ln.split(",")
            rows.append((float(lo), float(hi), int(c)))
        return SampleFile(meta, histogram=_histogram_from_rows(rows))
    lengths = np.array([float(ln) for ln in body], dtype=np.float64)
    return SampleFile(meta, lengths=lengths)
