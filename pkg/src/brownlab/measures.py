"""Spectral distributions and splitting projections for matrices.

The spectral distribution of a matrix is the eigenvalue counting
measure with algebraic multiplicity, normalized by the dimension; atoms
carry exact rational weights k/dim.  For a Borel-set description B with
eigenvalue-free boundary there is a unique splitting projection onto
the span of the generalized eigenspaces of the eigenvalues inside B; it
leaves the matrix block upper triangular, its normalized rank equals
the measure of B, and the two diagonal compressions carry the inside
and outside parts of the spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .matrix import CMatrix
from .numerics import PrecisionPolicy, STANDARD, schur, reorder_schur
from .regions import Region

__all__ = [
    "BrownMeasure", "Projection", "FKIdentity", "MixtureCheck",
    "BoundaryAmbiguityError", "NonInvariantProjectionError",
    "CLUSTER_RADIUS_FACTOR", "BOUNDARY_TOL_FACTOR", "RANK_TOL",
    "cluster_radius", "boundary_tol", "brown", "fk_identity",
    "hs_projection", "brown_split", "join", "meet", "range_basis",
]

CLUSTER_RADIUS_FACTOR = 1e-8   # times max(1, ||T||), single linkage
BOUNDARY_TOL_FACTOR = 1e-8     # refusal band around region boundaries
RANK_TOL = 1e-10               # rank decisions for joins and meets


class BoundaryAmbiguityError(ValueError):
    """An eigenvalue sits too close to the boundary of the region."""

    def __init__(self, eigenvalue, region):
        self.eigenvalue = eigenvalue
        self.region = region
        super().__init__(
            f"eigenvalue {eigenvalue} lies within the boundary tolerance of the region; "
            "membership would be a guess")


class NonInvariantProjectionError(ValueError):
    """The projection does not leave the matrix block upper triangular."""


def cluster_radius(t: CMatrix) -> float:
    return CLUSTER_RADIUS_FACTOR * max(1.0, t.norm())


def boundary_tol(t: CMatrix) -> float:
    return BOUNDARY_TOL_FACTOR * max(1.0, t.norm())


def _single_linkage(values: np.ndarray, radius: float):
    """Cluster complex values, chaining pairs within radius; returns index lists."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


@dataclass(frozen=True)
class BrownMeasure:
    """Atomic probability measure: ((location, weight), ...), weights exact."""

    atoms: tuple  # of (complex, Fraction)

    def __post_init__(self):
        if sum(w for _, w in self.atoms) != 1:
            raise ValueError("atom weights must sum to 1 exactly")

    @property
    def locations(self):
        return [z for z, _ in self.atoms]

    def weight_in(self, region: Region, tol: float) -> Fraction:
        total = Fraction(0)
        for z, w in self.atoms:
            inside, amb = region.classify(z, tol)
            if amb:
                raise BoundaryAmbiguityError(z, region)
            if inside:
                total += w
        return total

    def close_to(self, other: "BrownMeasure", radius: float) -> bool:
        """Exact weights, atom locations matched within radius."""
        if len(self.atoms) != len(other.atoms):
            return False
        used = [False] * len(other.atoms)
        for z, w in self.atoms:
            hit = None
            for j, (z2, w2) in enumerate(other.atoms):
                if not used[j] and w2 == w and abs(z - z2) <= radius:
                    hit = j
                    break
            if hit is None:
                return False
            used[hit] = True
        return True

    @staticmethod
    def from_values(values, dim: int, radius: float) -> "BrownMeasure":
        values = np.asarray(values, dtype=complex)
        atoms = []
        for idx in _single_linkage(values, radius):
            members = sorted((values[i] for i in idx), key=lambda z: (z.real, z.imag))
            center = sum(members) / len(members)
            atoms.append((complex(center), Fraction(len(members), dim)))
        atoms.sort(key=lambda a: (a[0].real, a[0].imag))
        return BrownMeasure(tuple(atoms))

    @staticmethod
    def mixture(parts) -> "BrownMeasure":
        """Exact convex combination of (weight, measure) pairs, atoms merged by location."""
        raw = []
        for w, m in parts:
            for z, wa in m.atoms:
                raw.append((z, w * wa))
        raw.sort(key=lambda a: (a[0].real, a[0].imag))
        return BrownMeasure(tuple(raw))

    def coarsened(self, radius: float) -> "BrownMeasure":
        """Re-cluster atom locations, summing weights; for mixture comparison."""
        locs = np.array([z for z, _ in self.atoms])
        out = []
        for idx in _single_linkage(locs, radius):
            members = sorted(idx)
            w = sum(self.atoms[i][1] for i in members)
            vals = sorted((self.atoms[i][0] for i in members), key=lambda z: (z.real, z.imag))
            center = sum(vals) / len(vals)
            out.append((complex(center), w))
        out.sort(key=lambda a: (a[0].real, a[0].imag))
        return BrownMeasure(tuple(out))


@dataclass(frozen=True)
class Projection:
    """Orthogonal projection with its rank and an orthonormal range basis."""

    matrix: CMatrix
    rank: int
    basis: np.ndarray  # dim x rank, orthonormal columns

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def trace_weight(self) -> Fraction:
        return Fraction(self.rank, self.dim)

    def complement(self) -> "Projection":
        comp = CMatrix(np.eye(self.dim) - self.matrix.array)
        return Projection(comp, self.dim - self.rank, range_basis(comp, self.dim - self.rank))

    @staticmethod
    def from_basis(b: np.ndarray) -> "Projection":
        b = np.asarray(b, dtype=complex).copy()
        b.setflags(write=False)
        return Projection(CMatrix(b @ b.conj().T), b.shape[1], b)


def range_basis(p: CMatrix, rank: int) -> np.ndarray:
    """First `rank` left singular vectors; orthonormal basis of the range."""
    u, _, _ = np.linalg.svd(p.array)
    return u[:, :rank]


def brown(t: CMatrix) -> BrownMeasure:
    """Eigenvalue counting measure with clustered atoms and exact weights."""
    form = schur(t)
    return BrownMeasure.from_values(np.array(form.diag), t.dim, cluster_radius(t))


@dataclass(frozen=True)
class FKIdentity:
    """Both sides of the log-determinant identity at a point.

    lhs integrates log against the singular-value distribution of
    T - lambda; rhs integrates log distance against the eigenvalue
    measure.  Both are -inf (degenerate) when lambda is an eigenvalue.
    """

    lhs: float
    rhs: float
    degenerate: bool = False


def fk_identity(t: CMatrix, lam: complex, measure: BrownMeasure | None = None) -> FKIdentity:
    m = measure if measure is not None else brown(t)
    scale = max(1.0, t.norm(), abs(lam))
    if min(abs(z - lam) for z in m.locations) <= 1e-13 * scale:
        return FKIdentity(-math.inf, -math.inf, degenerate=True)
    sv = np.linalg.svd(t.array - lam * np.eye(t.dim), compute_uv=False)
    if sv[-1] <= 0:
        return FKIdentity(-math.inf, -math.inf, degenerate=True)
    lhs = float(np.log(sv).sum() / t.dim)
    rhs = float(sum(float(w) * math.log(abs(z - lam)) for z, w in m.atoms))
    return FKIdentity(lhs, rhs)


def _classify_eigenvalues(diag, region: Region, tol: float, radius: float):
    """Map each eigenvalue to inside/outside; refuse boundary-ambiguous ones."""
    values = np.asarray(diag)
    inside = {}
    for z in values:
        member, amb = region.classify(complex(z), tol)
        if amb:
            raise BoundaryAmbiguityError(complex(z), region)
        inside[complex(z)] = member
    # clusters must classify coherently, else membership is a guess
    for idx in _single_linkage(values, radius):
        flags = {inside[complex(values[i])] for i in idx}
        if len(flags) > 1:
            raise BoundaryAmbiguityError(complex(values[idx[0]]), region)
    return inside


def hs_projection(t: CMatrix, region: Region, policy: PrecisionPolicy = STANDARD) -> Projection:
    """Splitting projection of ``t`` for the region.

    Construction: reorder a Schur form so the eigenvalues inside the
    region occupy the leading diagonal; the projection onto the span of
    the leading Schur vectors is exactly the projection onto the span of
    the generalized eigenspaces for those eigenvalues.

    Raises BoundaryAmbiguityError when any eigenvalue is within the
    boundary tolerance of the region's boundary.
    """
    form = schur(t, policy)
    tol = boundary_tol(t)
    inside = _classify_eigenvalues(form.diag, region, tol, cluster_radius(t))
    ordered = reorder_schur(form, key=lambda z: 0 if inside[complex(z)] else 1)
    k = sum(1 for z in form.diag if inside[complex(z)])
    basis = ordered.u.array[:, :k]
    return Projection.from_basis(basis)


def compress(t: CMatrix, basis: np.ndarray) -> CMatrix:
    """The compression basis^* t basis on the range spanned by the basis."""
    return CMatrix(basis.conj().T @ t.array @ basis)


@dataclass(frozen=True)
class MixtureCheck:
    ok: bool
    max_atom_gap: float


def brown_split(t: CMatrix, p: Projection, invariance_tol: float = 1e-8):
    """Spectral measures of the two diagonal compressions plus the mixture check.

    Requires ``t p = p t p`` (p leaves t block upper triangular) and a
    proper rank.  The mixture (rank/dim) * inside + (1 - rank/dim) * outside
    must reproduce the measure of t with exact weights.
    """
    tp = t.array @ p.matrix.array
    resid = float(np.linalg.norm(tp - p.matrix.array @ tp, 2))
    if resid > invariance_tol * max(1.0, t.norm()):
        raise NonInvariantProjectionError(
            f"||TP - PTP|| = {resid:.3e} exceeds {invariance_tol:.1e} * ||T||")
    if not 0 < p.rank < p.dim:
        raise ValueError("brown_split needs a proper projection (0 < rank < dim)")
    comp = p.complement()
    inside = brown(compress(t, p.basis))
    outside = brown(compress(t, comp.basis))
    mixed = BrownMeasure.mixture(
        [(p.trace_weight(), inside), (comp.trace_weight(), outside)])
    radius = cluster_radius(t)
    mixed = mixed.coarsened(radius)
    target = brown(t)
    ok = mixed.close_to(target, 10 * radius)
    gap = 0.0
    if len(mixed.atoms) == len(target.atoms):
        gap = max((abs(a[0] - b[0]) for a, b in zip(mixed.atoms, target.atoms)), default=0.0)
    else:
        gap = math.inf
    return inside, outside, MixtureCheck(ok=ok, max_atom_gap=gap)


def join(p1: Projection, p2: Projection) -> Projection:
    """Projection onto the span of the two ranges (lattice join)."""
    stacked = np.hstack([p1.basis.array, p2.basis.array])
    if stacked.shape[1] == 0:
        return Projection.from_basis(np.zeros((p1.dim, 0), dtype=complex))
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    rank = int((s > RANK_TOL).sum())
    return Projection.from_basis(u[:, :rank])


def meet(p1: Projection, p2: Projection) -> Projection:
    """Projection onto the intersection of the two ranges (lattice meet)."""
    n = p1.dim
    stacked = np.vstack([np.eye(n) - p1.matrix.array, np.eye(n) - p2.matrix.array])
    _, s, vh = np.linalg.svd(stacked)
    small = s <= RANK_TOL
    basis = vh.conj().T[:, small] if small.any() else np.zeros((n, 0), dtype=complex)
    return Projection.from_basis(basis)
