"""Embedding-set loading, saving, validation and synthesis.

File formats are deliberately narrow so that round trips are bit-exact:
npy is restricted to version 1.0 headers, little-endian float32/float64,
C order, 2-D shape; csv is plain '.'-decimal, ','-separated, with one
optional header line that is auto-detected.
"""

import ast
import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, FormatError, IoError, ParameterError
from .validation import as_matrix

NPY_MAGIC = b"\x93NUMPY"

# Generator family and normal transform are fixed and echoed in reports so a
# run can be reproduced from its provenance alone.
RNG_DESCRIPTION = "philox4x64+ziggurat"


@dataclass(frozen=True)
class EmbeddingSet:
    """An immutable N x D matrix of feature vectors with a label.

    Rows are samples, columns are feature coordinates. The matrix is
    validated (finite float64) and frozen at construction, so instances are
    safe to share across threads.
    """

    data: np.ndarray
    label: str = "unlabeled"
    source: str = "memory"

    def __post_init__(self):
        arr = as_matrix(self.data, name=self.label)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_features(self) -> int:
        return self.data.shape[1]

    def relabel(self, label: str) -> "EmbeddingSet":
        return EmbeddingSet(self.data, label=label, source=self.source)


def _read_npy(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(6)
        if magic != NPY_MAGIC:
            raise FormatError(f"{path}: not an npy file (bad magic)")
        version = fh.read(2)
        if version != b"\x01\x00":
            raise FormatError(f"{path}: only npy format version 1.0 is supported")
        raw_len = fh.read(2)
        if len(raw_len) != 2:
            raise FormatError(f"{path}: truncated npy header")
        (header_len,) = struct.unpack("<H", raw_len)
        header = fh.read(header_len)
        if len(header) != header_len:
            raise FormatError(f"{path}: truncated npy header")
        try:
            meta = ast.literal_eval(header.decode("latin-1").strip())
        except (ValueError, SyntaxError) as exc:
            raise FormatError(f"{path}: unparseable npy header: {exc}") from exc
        if not isinstance(meta, dict):
            raise FormatError(f"{path}: npy header is not a dict")
        descr = meta.get("descr")
        if descr not in ("<f4", "<f8"):
            raise FormatError(f"{path}: unsupported dtype {descr!r}, need '<f4' or '<f8'")
        if meta.get("fortran_order") is not False:
            raise FormatError(f"{path}: fortran-order npy files are rejected")
        shape = meta.get("shape")
        if not (isinstance(shape, tuple) and len(shape) == 2
                and all(isinstance(s, int) and s >= 0 for s in shape)):
            raise FormatError(f"{path}: npy payload must be 2-D, got shape {shape!r}")
        n, d = shape
        if n < 1 or d < 1:
            raise DataError(f"{path}: embedding set must have at least one row and column")
        dtype = np.dtype(descr)
        expected = n * d * dtype.itemsize
        payload = fh.read(expected)
        if len(payload) != expected:
            raise FormatError(f"{path}: truncated npy payload "
                              f"({len(payload)} of {expected} bytes)")
        arr = np.frombuffer(payload, dtype=dtype).reshape(n, d)
    return arr.astype(np.float64)


def _write_npy(path, arr: np.ndarray) -> None:
    header = "{'descr': '<f8', 'fortran_order': False, 'shape': (%d, %d), }" % arr.shape
    # pad so magic + version + length word + header is a multiple of 64
    unpadded = len(NPY_MAGIC) + 2 + 2 + len(header) + 1
    header = header + " " * (-unpadded % 64) + "\n"
    try:
        with open(path, "wb") as fh:
            fh.write(NPY_MAGIC)
            fh.write(b"\x01\x00")
            fh.write(struct.pack("<H", len(header)))
            fh.write(header.encode("latin-1"))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes(order="C"))
    except OSError as exc:
        raise IoError(f"{path}: cannot write npy file: {exc}") from exc


def _parse_csv_line(line: str):
    return [cell.strip() for cell in line.split(",")]


def _read_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DataError(f"{path}: empty csv file")

    def try_floats(cells):
        try:
            return [float(c) for c in cells]
        except ValueError:
            return None

    start = 0
    first = try_floats(_parse_csv_line(lines[0]))
    if first is None:
        start = 1  # header line
        if len(lines) == 1:
            raise DataError(f"{path}: csv contains only a header line")
    rows = []
    width = None
    for offset, line in enumerate(lines[start:]):
        cells = _parse_csv_line(line)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise FormatError(f"{path}: ragged csv at data row {offset} "
                              f"(expected {width} columns, got {len(cells)})")
        values = try_floats(cells)
        if values is None:
            bad = next(i for i, c in enumerate(cells) if try_floats([c]) is None)
            raise FormatError(f"{path}: unparseable cell at data row {offset}, column {bad}")
        for j, v in enumerate(values):
            if not np.isfinite(v):
                raise DataError(f"{path}: non-finite value at data row {offset}, column {j}")
        rows.append(values)
    return np.array(rows, dtype=np.float64)


def _write_csv(path, arr: np.ndarray) -> None:
    # repr() emits the shortest decimal that round-trips the float64 exactly
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for row in arr:
                fh.write(",".join(repr(float(v)) for v in row))
                fh.write("\n")
    except OSError as exc:
        raise IoError(f"{path}: cannot write csv file: {exc}") from exc


def _format_of(path, format=None) -> str:
    if format is not None:
        if format not in ("npy", "csv"):
            raise ParameterError(f"unknown embedding format {format!r}")
        return format
    name = str(path).lower()
    if name.endswith(".npy"):
        return "npy"
    if name.endswith(".csv"):
        return "csv"
    raise ParameterError(f"{path}: cannot infer format from extension; pass format=")


def load_embeddings(path, format: str = None, label: str = None) -> EmbeddingSet:
    """Load an embedding set from an npy (v1.0, 2-D float) or csv file."""
    fmt = _format_of(path, format)
    arr = _read_npy(path) if fmt == "npy" else _read_csv(path)
    return EmbeddingSet(arr, label=label or str(path), source=str(path))


def save_embeddings(embeddings, path, format: str = None) -> None:
    """Persist to npy (bit-exact float64 round trip) or csv (17-digit decimal)."""
    fmt = _format_of(path, format)
    arr = as_matrix(embeddings, name="embeddings")
    if fmt == "npy":
        _write_npy(path, arr)
    else:
        _write_csv(path, arr)


def sample_gaussian(n: int, d: int, mean: float = 0.0, seed=0,
                    label: str = None) -> EmbeddingSet:
    """Draw n i.i.d. points from an isotropic d-dimensional Gaussian.

    Every coordinate has variance 1 and is shifted by `mean`. Sampling uses
    the counter-based Philox generator with the ziggurat normal transform,
    so equal seeds give bit-identical draws on every platform.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    rng = np.random.Generator(np.random.Philox(seed))
    data = rng.standard_normal((n, d))
    if mean != 0.0:
        data += mean
    return EmbeddingSet(
        data,
        label=label or f"gaussian-{n}x{d}",
        source=f"sampler:gaussian(n={n}, d={d}, mean={mean}, seed={seed}, rng={RNG_DESCRIPTION})",
    )


@dataclass(frozen=True)
class ManifestEntry:
    label: str
    path: str
    expected_rows: int = None
    expected_dims: int = None


@dataclass(frozen=True)
class DatasetManifest:
    """Labeled list of embedding files plus the seed used for any sampling."""

    entries: tuple
    seed: int = 0

    def __post_init__(self):
        labels = [e.label for e in self.entries]
        if len(set(labels)) != len(labels):
            dup = next(l for l in labels if labels.count(l) > 1)
            raise ConfigError(f"duplicate manifest label {dup!r}")

    def entry(self, label: str) -> ManifestEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise ConfigError(f"manifest has no entry labeled {label!r}")


def load_manifest(path) -> DatasetManifest:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"{path}: cannot read manifest: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: manifest is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ConfigError(f"{path}: manifest must be an object with an 'entries' list")
    entries = []
    for i, node in enumerate(doc["entries"]):
        for key in ("label", "path"):
            if key not in node:
                raise ConfigError(f"{path}: entries[{i}] is missing {key!r}")
        entries.append(ManifestEntry(
            label=str(node["label"]),
            path=str(node["path"]),
            expected_rows=node.get("expected_rows"),
            expected_dims=node.get("expected_dims"),
        ))
    return DatasetManifest(entries=tuple(entries), seed=int(doc.get("seed", 0)))


def load_manifest_entry(manifest: DatasetManifest, label: str) -> EmbeddingSet:
    entry = manifest.entry(label)
    loaded = load_embeddings(entry.path, label=entry.label)
    if entry.expected_rows is not None and loaded.n_samples != entry.expected_rows:
        raise DataError(f"{entry.path}: expected {entry.expected_rows} rows, "
                        f"got {loaded.n_samples}")
    if entry.expected_dims is not None and loaded.n_features != entry.expected_dims:
        raise DataError(f"{entry.path}: expected {entry.expected_dims} dims, "
                        f"got {loaded.n_features}")
    return loaded
