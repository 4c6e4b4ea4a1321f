"""Stacks of binary undirected networks: validation, I/O and lower-triangle vectorization.

Pair order
----------
Node pairs ``(u, v)`` with ``u > v`` are enumerated column-major over the
strict lower triangle: ``v = 0..V-2`` outer, ``u = v+1..V-1`` inner (0-based
internally). For ``V = 3`` this gives ``(1,0), (2,0), (2,1)``.

File formats
------------
matrix
    One V x V matrix per block, entries separated by whitespace and/or commas.
    Blocks are separated by one or more blank lines. A directory is read as
    the concatenation of its files in lexicographic order.
edgelist
    A header line ``V=<int>`` followed by one ``u v`` pair per line, with
    1-based node indices. A new ``V=`` header starts the next network. Edges
    are undirected and are mirrored on load.
labels
    CSV with header ``id,label`` and one row per network in stack order.
    ``id`` is a subject identifier (repeated for scan-rescan pairs); ``label``
    may be left empty.

Lines starting with ``#`` are ignored in all formats.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

FORMATS = ("matrix", "edgelist")


class NetworkFormatError(ValueError):
    """Raised for unreadable files and for inputs that violate the adjacency invariants."""


@lru_cache(maxsize=64)
def _pair_index(V: int):
    cols, rows = np.triu_indices(V, 1)
    rows.flags.writeable = False
    cols.flags.writeable = False
    return rows, cols


def pair_index(V: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(u, v)`` index arrays (``u > v``) in the fixed pair order."""
    if V < 2:
        raise ValueError("need V >= 2 for node pairs")
    return _pair_index(int(V))


def n_pairs(V: int) -> int:
    return V * (V - 1) // 2


def nodes_from_pairs(L: int) -> int:
    V = int(round((1 + np.sqrt(1 + 8 * L)) / 2))
    if n_pairs(V) != L:
        raise ValueError(f"{L} is not a triangular number V(V-1)/2")
    return V


def vectorize_lower(M) -> np.ndarray:
    """Strict lower triangle of ``M`` (or of each matrix in a stack) as a vector of length L."""
    M = np.asarray(M)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {M.shape}")
    rows, cols = pair_index(M.shape[-1])
    return M[..., rows, cols]


def devectorize(vec, V: int | None = None, diagonal: float = 0.0) -> np.ndarray:
    """Inverse of :func:`vectorize_lower`: symmetric matrix with the given diagonal."""
    vec = np.asarray(vec)
    L = vec.shape[-1]
    if V is None:
        V = nodes_from_pairs(L)
    elif n_pairs(V) != L:
        raise ValueError(f"vector length {L} does not match V={V}")
    rows, cols = pair_index(V)
    out = np.full(vec.shape[:-1] + (V, V), diagonal, dtype=np.result_type(vec.dtype, float))
    out[..., rows, cols] = vec
    out[..., cols, rows] = vec
    return out


def validate_adjacency(A, where: str = "") -> np.ndarray:
    """Check the binary/symmetric/hollow invariants and return a uint8 copy."""
    A = np.asarray(A)
    tag = f" ({where})" if where else ""
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NetworkFormatError(f"adjacency must be square{tag}, got shape {A.shape}")
    if A.shape[0] < 2:
        raise NetworkFormatError(f"adjacency needs at least 2 nodes{tag}")
    if not np.all((A == 0) | (A == 1)):
        raise NetworkFormatError(f"non-binary entry{tag}")
    if np.any(np.diag(A) != 0):
        raise NetworkFormatError(f"nonzero diagonal{tag}")
    if not np.array_equal(A, A.T):
        raise NetworkFormatError(f"asymmetric adjacency{tag}")
    return A.astype(np.uint8)


@dataclass(frozen=True)
class NetworkStack:
    """``n`` adjacency matrices over a shared node set, with optional ids and labels."""

    adjacency: np.ndarray
    labels: tuple | None = None
    ids: tuple | None = None

    def __post_init__(self):
        A = np.asarray(self.adjacency)
        if A.ndim == 2:
            A = A[None]
        if A.ndim != 3 or A.shape[0] < 1:
            raise NetworkFormatError("a stack needs at least one V x V matrix")
        A = np.stack([validate_adjacency(a, f"network {i}") for i, a in enumerate(A)])
        A.flags.writeable = False
        object.__setattr__(self, "adjacency", A)
        n = A.shape[0]
        for name in ("labels", "ids"):
            val = getattr(self, name)
            if val is not None:
                val = tuple(val)
                if len(val) != n:
                    raise NetworkFormatError(f"{name} has length {len(val)}, expected {n}")
                object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def V(self) -> int:
        return self.adjacency.shape[1]

    @property
    def L(self) -> int:
        return n_pairs(self.V)

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> np.ndarray:
        return self.adjacency[i]

    def vectors(self) -> np.ndarray:
        """(n, L) float array of lower-triangle responses."""
        return vectorize_lower(self.adjacency).astype(float)

    def subset(self, idx) -> "NetworkStack":
        idx = np.asarray(idx)
        pick = lambda t: None if t is None else tuple(t[int(j)] for j in idx)
        return NetworkStack(self.adjacency[idx], labels=pick(self.labels), ids=pick(self.ids))

    def with_meta(self, labels=None, ids=None) -> "NetworkStack":
        return NetworkStack(self.adjacency, labels=labels, ids=ids)

    def __eq__(self, other):
        if not isinstance(other, NetworkStack):
            return NotImplemented
        return (
            np.array_equal(self.adjacency, other.adjacency)
            and self.labels == other.labels
            and self.ids == other.ids
        )

    __hash__ = None


def mean_adjacency(stack: NetworkStack) -> np.ndarray:
    """Entrywise mean of the adjacency matrices."""
    return stack.adjacency.mean(axis=0)


# --------------------------------------------------------------------------- I/O

_SPLIT = re.compile(r"[,\s]+")


def _content_lines(text: str):
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            continue
        yield line


def _parse_matrix_blocks(text: str, where: str, dtype=float) -> list[np.ndarray]:
    blocks, cur = [], []
    for line in list(_content_lines(text)) + [""]:
        if line:
            try:
                cur.append([dtype(tok) for tok in _SPLIT.split(line) if tok])
            except ValueError as exc:
                raise NetworkFormatError(f"unparseable entry in {where}: {exc}") from None
        elif cur:
            widths = {len(r) for r in cur}
            if len(widths) != 1:
                raise NetworkFormatError(f"ragged rows in {where}")
            blocks.append(np.array(cur, dtype=float))
            cur = []
    return blocks


def _parse_edgelist(text: str, where: str) -> list[np.ndarray]:
    nets = []
    A = None
    for line in _content_lines(text):
        if not line:
            continue
        if line.replace(" ", "").upper().startswith("V="):
            try:
                V = int(line.split("=", 1)[1])
            except ValueError:
                raise NetworkFormatError(f"bad header {line!r} in {where}") from None
            if V < 2:
                raise NetworkFormatError(f"V must be >= 2 in {where}")
            A = np.zeros((V, V), dtype=np.uint8)
            nets.append(A)
            continue
        if A is None:
            raise NetworkFormatError(f"edge before V= header in {where}")
        toks = [t for t in _SPLIT.split(line) if t]
        if len(toks) != 2:
            raise NetworkFormatError(f"expected 'u v' in {where}, got {line!r}")
        try:
            u, v = int(toks[0]) - 1, int(toks[1]) - 1
        except ValueError:
            raise NetworkFormatError(f"non-integer node in {where}: {line!r}") from None
        V = A.shape[0]
        if not (0 <= u < V and 0 <= v < V):
            raise NetworkFormatError(f"node index out of range 1..{V} in {where}: {line!r}")
        if u == v:
            raise NetworkFormatError(f"nonzero diagonal: self-loop {u + 1} in {where}")
        A[u, v] = A[v, u] = 1
    return nets


def _source_files(source: Path) -> list[Path]:
    if source.is_dir():
        files = sorted(p for p in source.iterdir() if p.is_file() and not p.name.startswith("."))
        files = [p for p in files if p.suffix.lower() != ".csv" or "label" not in p.stem.lower()]
        if not files:
            raise NetworkFormatError(f"no network files in {source}")
        return files
    if source.is_file():
        return [source]
    raise NetworkFormatError(f"no such file or directory: {source}")


def _read_text(path: Path) -> str:
    try:
        return path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise NetworkFormatError(f"unreadable file {path}: {exc}") from None


def read_labels(path) -> tuple[tuple, tuple | None]:
    """Read an ``id,label`` CSV; returns ``(ids, labels)``; labels is None if all empty."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise NetworkFormatError(f"unreadable labels file {path}: {exc}") from None
    if rows and not {"id", "label"} <= set(rows[0]):
        raise NetworkFormatError(f"labels file {path} needs an 'id,label' header")
    ids = tuple(r["id"] for r in rows)
    labels = tuple(r["label"] if r["label"] != "" else None for r in rows)
    if all(lab is None for lab in labels):
        labels = None
    return ids, labels


def write_labels(path, ids, labels) -> None:
    n = len(ids) if ids is not None else len(labels)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"])
        for i in range(n):
            w.writerow([
                "" if ids is None else ids[i],
                "" if labels is None or labels[i] is None else labels[i],
            ])


def load_stack(source, format: str = "matrix", labels=None) -> NetworkStack:
    """Load and validate a stack from a file or directory.

    Edge lists are symmetrized by construction; matrix input must already be
    symmetric, binary and hollow.
    """
    if format not in FORMATS:
        raise NetworkFormatError(f"unknown format {format!r}; expected one of {FORMATS}")
    mats = []
    for path in _source_files(Path(source)):
        text = _read_text(path)
        if format == "matrix":
            mats.extend(_parse_matrix_blocks(text, str(path)))
        else:
            mats.extend(_parse_edgelist(text, str(path)))
    if not mats:
        raise NetworkFormatError(f"no networks found in {source}")
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise NetworkFormatError(f"dimension mismatch across matrices: {sorted(shapes)}")
    mats = [validate_adjacency(m, f"network {i}") for i, m in enumerate(mats)]
    ids = lab = None
    if labels is not None:
        ids, lab = read_labels(labels)
    return NetworkStack(np.stack(mats), labels=lab, ids=ids)


def save_stack(stack: NetworkStack, path, format: str = "matrix", labels_path=None) -> None:
    """Write ``stack`` to a single file; ids/labels go to ``labels_path`` when given."""
    path = Path(path)
    parts = []
    for A in stack.adjacency:
        if format == "matrix":
            parts.append("\n".join(" ".join(str(int(x)) for x in row) for row in A))
        elif format == "edgelist":
            rows, cols = pair_index(stack.V)
            on = A[rows, cols] == 1
            lines = [f"V={stack.V}"] + [f"{u + 1} {v + 1}" for u, v in zip(rows[on], cols[on])]
            parts.append("\n".join(lines))
        else:
            raise NetworkFormatError(f"unknown format {format!r}")
    path.write_text("\n\n".join(parts) + "\n")
    if labels_path is not None and (stack.ids is not None or stack.labels is not None):
        ids = stack.ids if stack.ids is not None else tuple(str(i) for i in range(stack.n))
        write_labels(labels_path, ids, stack.labels)


def load_prob_stack(source) -> np.ndarray:
    """Real-valued (n, V, V) stack in the matrix layout (e.g. externally computed probabilities)."""
    mats = []
    for path in _source_files(Path(source)):
        mats.extend(_parse_matrix_blocks(_read_text(path), str(path)))
    if not mats:
        raise NetworkFormatError(f"no matrices found in {source}")
    shapes = {m.shape for m in mats}
    if len(shapes) != 1 or mats[0].shape[0] != mats[0].shape[1]:
        raise NetworkFormatError(f"dimension mismatch across matrices: {sorted(shapes)}")
    return np.stack(mats)


def save_prob_stack(P: Sequence[np.ndarray], path) -> None:
    blocks = ["\n".join(" ".join(repr(float(x)) for x in row) for row in M) for M in P]
    Path(path).write_text("\n\n".join(blocks) + "\n")
