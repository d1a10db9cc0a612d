"""Dense embedding tables in word2vec text format, plus the two vector
primitives (cosine, centroid) used throughout the package.

A store keeps every vector in one contiguous ``(n, dim)`` float64 array and
maps token keys to rows.  Stores built from a lowercased load fold query
tokens the same way, so callers can look up raw text directly.
"""
from __future__ import annotations

import enum
import logging
import os
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

log = logging.getLogger(__name__)


class EmbeddingFormatError(ValueError):
    """Raised when an embedding file violates the word2vec text format."""


class CaseMode(str, enum.Enum):
    AS_IS = "as-is"
    LOWERCASED = "lowercased"


@dataclass(eq=False)
class EmbeddingStore:
    keys: list[str]
    vectors: np.ndarray
    dimension: int
    case_mode: CaseMode = CaseMode.AS_IS
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"dimension must be positive, got {self.dimension}")
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.size == 0:
            self.vectors = self.vectors.reshape(0, self.dimension)
        if self.vectors.ndim != 2 or self.vectors.shape != (len(self.keys), self.dimension):
            raise ValueError(
                f"vector table shape {self.vectors.shape} does not match "
                f"{len(self.keys)} keys x {self.dimension} dims"
            )
        self.case_mode = CaseMode(self.case_mode)
        self._index = {}
        for i, key in enumerate(self.keys):
            if key in self._index:
                raise ValueError(f"duplicate token key {key!r}")
            self._index[key] = i

    @classmethod
    def empty(cls, dimension: int, case_mode: CaseMode = CaseMode.AS_IS) -> "EmbeddingStore":
        return cls([], np.zeros((0, dimension)), dimension, case_mode)

    @classmethod
    def from_dict(cls, table: dict[str, Sequence[float]], dimension: int | None = None,
                  case_mode: CaseMode = CaseMode.AS_IS) -> "EmbeddingStore":
        keys = list(table)
        if dimension is None:
            if not keys:
                raise ValueError("cannot infer dimension of an empty table")
            dimension = len(table[keys[0]])
        vectors = np.array([table[k] for k in keys], dtype=np.float64).reshape(len(keys), dimension)
        return cls(keys, vectors, dimension, case_mode)

    def fold(self, token: str) -> str:
        return token.lower() if self.case_mode is CaseMode.LOWERCASED else token

    def row(self, token: str) -> int | None:
        return self._index.get(self.fold(token))

    def get(self, token: str) -> np.ndarray | None:
        i = self.row(token)
        return None if i is None else self.vectors[i]

    def __getitem__(self, token: str) -> np.ndarray:
        i = self.row(token)
        if i is None:
            raise KeyError(token)
        return self.vectors[i]

    def __contains__(self, token: object) -> bool:
        return isinstance(token, str) and self.row(token) is not None

    def __len__(self) -> int:
        return len(self.keys)

    def __iter__(self) -> Iterator[str]:
        return iter(self.keys)

    def copy(self) -> "EmbeddingStore":
        return EmbeddingStore(list(self.keys), self.vectors.copy(), self.dimension, self.case_mode)

    def subset(self, rows: Sequence[int]) -> "EmbeddingStore":
        rows = list(rows)
        return EmbeddingStore([self.keys[i] for i in rows], self.vectors[rows].copy(),
                              self.dimension, self.case_mode)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; raises ``ValueError`` for zero-norm input."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for a zero-norm vector")
    c = float(np.dot(a, b) / (na * nb))
    return min(1.0, max(-1.0, c))


def centroid(vs: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """Componentwise mean of a nonempty list of equal-length vectors."""
    arr = np.asarray(vs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("centroid of an empty list is undefined")
    return arr.mean(axis=0)


def load_embeddings(path: str | os.PathLike, format: str = "word2vec-text",
                    lowercase: bool = False) -> EmbeddingStore:
    """Read a word2vec text file.

    The first line is ``<count> <dimension>``; at most ``count`` vector rows
    are read.  When ``lowercase`` is set every token is lowercased on load and
    the store remembers it.  Repeated tokens keep their first vector.
    """
    if format != "word2vec-text":
        raise ValueError(f"unsupported embedding format {format!r}")
    path = Path(path)
    case_mode = CaseMode.LOWERCASED if lowercase else CaseMode.AS_IS
    with path.open("r", encoding="utf-8", newline="\n") as f:
        header = f.readline()
        parts = header.split()
        try:
            if len(parts) != 2:
                raise ValueError
            count, dim = int(parts[0]), int(parts[1])
            if count < 0 or dim < 1:
                raise ValueError
        except ValueError:
            raise EmbeddingFormatError(
                f"{path}: malformed header at line 1: expected '<count> <dimension>', got {header.rstrip()!r}"
            ) from None

        keys: list[str] = []
        rows: list[np.ndarray] = []
        seen: set[str] = set()
        lineno = 1
        n_rows = 0
        for line in f:
            lineno += 1
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            if n_rows == count:
                break
            n_rows += 1
            fields = line.rstrip(" ").split(" ")
            token, values = fields[0], fields[1:]
            if len(values) != dim:
                raise EmbeddingFormatError(
                    f"{path}: dimension mismatch at line {lineno} for token {token!r}: "
                    f"expected {dim} values, got {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(
                    f"{path}: non-numeric value at line {lineno} for token {token!r}"
                ) from None
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(f"{path}: non-finite value at line {lineno} for token {token!r}")
            if lowercase:
                token = token.lower()
            if token in seen:
                warnings.warn(f"{path}: duplicate token {token!r} at line {lineno}; keeping first occurrence",
                              stacklevel=2)
                continue
            seen.add(token)
            keys.append(token)
            rows.append(vec)
    vectors = np.vstack(rows) if rows else np.zeros((0, dim))
    log.info("loaded %d vectors of dimension %d from %s", len(keys), dim, path)
    return EmbeddingStore(keys, vectors, dim, case_mode)


def _format_row(vec: np.ndarray) -> str:
    return " ".join(format(float(x), ".9g") for x in vec)


def save_embeddings(store: EmbeddingStore, path: str | os.PathLike, format: str = "word2vec-text") -> None:
    """Write ``store`` atomically (temp file + rename) in word2vec text format."""
    if format != "word2vec-text":
        raise ValueError(f"unsupported embedding format {format!r}")
    lines = [f"{len(store)} {store.dimension}\n"]
    lines.extend(f"{key} {_format_row(vec)}\n" for key, vec in zip(store.keys, store.vectors))
    atomic_write_text(path, "".join(lines))


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def filter_vocabulary(store: EmbeddingStore, keep: Iterable[str]) -> EmbeddingStore:
    """Keep only entries whose key (after case folding) is in ``keep``; store order is preserved."""
    wanted = {store.fold(k) for k in keep}
    rows = [i for i, k in enumerate(store.keys) if k in wanted]
    return store.subset(rows)


def normalize_all(store: EmbeddingStore) -> EmbeddingStore:
    """Scale every vector to unit length; zero vectors are dropped with a warning."""
    norms = np.linalg.norm(store.vectors, axis=1)
    zero = norms == 0.0
    if zero.any():
        dropped = [k for k, z in zip(store.keys, zero) if z]
        warnings.warn(f"dropping {len(dropped)} zero vector(s): {dropped[:5]}", stacklevel=2)
    rows = np.flatnonzero(~zero)
    out = store.subset(rows)
    out.vectors /= norms[rows][:, None]
    return out
