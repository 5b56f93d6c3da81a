"""Dense square complex matrices with a normalized trace.

The ambient structure everywhere in this package is ``(M_n(C), tr/n)``:
a square complex matrix together with the normalized trace.  ``CMatrix``
is a thin immutable wrapper around a ``numpy`` array that enforces
squareness and finiteness and fixes the JSON wire format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["CMatrix", "load_matrix", "save_matrix"]


@dataclass(frozen=True)
class CMatrix:
    """Square complex matrix; entries immutable after construction.

    Parameters
    ----------
    entries : array_like
        ``(dim, dim)`` complex values, all finite.
    """

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a.view(float))):
            raise ValueError("matrix entries must be finite")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Read-only ndarray view of the entries."""
        return self.entries

    def trace(self) -> complex:
        """Normalized trace (1/dim) * sum of diagonal entries."""
        return complex(np.trace(self.entries)) / self.dim

    def norm(self) -> float:
        """Operator (spectral) norm."""
        return float(np.linalg.norm(self.entries, 2))

    def adjoint(self) -> "CMatrix":
        return CMatrix(self.entries.conj().T)

    def shifted(self, lam: complex) -> "CMatrix":
        """Return ``self - lam*I``."""
        return CMatrix(self.entries - lam * np.eye(self.dim))

    def __matmul__(self, other: "CMatrix") -> "CMatrix":
        return CMatrix(self.entries @ other.entries)

    def __add__(self, other: "CMatrix") -> "CMatrix":
        return CMatrix(self.entries + other.entries)

    def __sub__(self, other: "CMatrix") -> "CMatrix":
        return CMatrix(self.entries - other.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CMatrix):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.entries, other.entries)

    @staticmethod
    def identity(dim: int) -> "CMatrix":
        return CMatrix(np.eye(dim, dtype=complex))

    @staticmethod
    def zeros(dim: int) -> "CMatrix":
        return CMatrix(np.zeros((dim, dim), dtype=complex))

    def to_json_obj(self) -> dict:
        """Wire format: ``{"dim": n, "entries": [[re, im], ...]}`` row-major.

        Floats serialize via shortest round-trip decimal, so reading the
        object back reproduces every entry within 1 ulp (exactly, for
        CPython's repr).
        """
        flat = self.entries.reshape(-1)
        return {"dim": self.dim, "entries": [[float(z.real), float(z.imag)] for z in flat]}

    @staticmethod
    def from_json_obj(obj: dict) -> "CMatrix":
        dim = int(obj["dim"])
        ents = obj["entries"]
        if len(ents) != dim * dim:
            raise ValueError(f"expected {dim * dim} entries, got {len(ents)}")
        flat = np.array([complex(re, im) for re, im in ents])
        return CMatrix(flat.reshape(dim, dim))


def save_matrix(m: CMatrix, path) -> None:
    with open(path, "w") as fh:
        json.dump(m.to_json_obj(), fh)
        fh.write("\n")


def load_matrix(path) -> CMatrix:
    with open(path) as fh:
        return CMatrix.from_json_obj(json.load(fh))
