from __future__ import annotations

import enum
import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

FMX_MAGIC = b"FMX1"


class MethodTag(str, enum.Enum):
    TFIDF = "TFIDF"
    LSI = "LSI"
    LSI_CO = "LSI_CO"
    TFIDF_NP = "TFIDF_NP"
    BM25 = "BM25"


@dataclass
class FeatureMatrix:
    """Rows are documents, columns are method-specific features."""

    values: np.ndarray | sp.csr_matrix
    labels: np.ndarray
    method_tag: MethodTag
    label_set: tuple[str, ...] = ()
    col_meta: list[str] | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.values.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"labels length {self.labels.shape[0]} != rows {self.values.shape[0]}"
            )

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.values)

    def dense(self) -> np.ndarray:
        return self.values.toarray() if self.is_sparse else np.asarray(self.values)

    def take(self, idx) -> "FeatureMatrix":
        idx = np.asarray(idx)
        return replace(self, values=self.values[idx], labels=self.labels[idx])

    def is_finite(self) -> bool:
        data = self.values.data if self.is_sparse else self.values
        return bool(np.all(np.isfinite(data)))


def save_fmx(fm: FeatureMatrix, path) -> None:
    """Write a JSON header followed by little-endian f64 row-major values."""
    header = {
        "method_tag": fm.method_tag.value,
        "rows": fm.rows,
        "cols": fm.cols,
        "label_set": list(fm.label_set),
        "labels": fm.labels.tolist(),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(FMX_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(fm.dense(), dtype="<f8").tobytes())


def load_fmx(path) -> FeatureMatrix:
    with open(path, "rb") as fh:
        if fh.read(4) != FMX_MAGIC:
            raise ValueError(f"{path}: not an .fmx file")
        (n,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(n).decode("utf-8"))
        payload = fh.read()
    rows, cols = header["rows"], header["cols"]
    values = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(np.float64)
    return FeatureMatrix(values, np.array(header["labels"]), MethodTag(header["method_tag"]),
                         tuple(header["label_set"]))
