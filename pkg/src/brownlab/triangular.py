"""Spectral orderings and upper-triangular splittings T = N + Q.

An ordering arranges the eigenvalue clusters of a matrix in a total
order, either given explicitly or induced by a curve (polyline) through
first-hit parameters.  Reordering a Schur form along it yields
``T = N + Q`` with N normal, Q nilpotent, N carrying the same spectral
distribution as T, and every prefix of the ordering spanning the
corresponding splitting projection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .matrix import CMatrix
from .measures import BrownMeasure, Projection, brown, cluster_radius
from .numerics import PrecisionPolicy, STANDARD, schur, reorder_schur

__all__ = ["SpectralOrdering", "TriangularForm", "CurveCoverageError",
           "ordering_from_curve", "explicit_ordering", "modulus_ordering",
           "upper_triangular_form", "interval_projection",
           "save_triangular_form", "load_triangular_form"]

CURVE_TOL_FACTOR = 1e-6


class CurveCoverageError(ValueError):
    """Some eigenvalue cluster is farther than curve_tol from the polyline."""

    def __init__(self, eigenvalue):
        self.eigenvalue = eigenvalue
        super().__init__(f"eigenvalue cluster at {eigenvalue} is not covered by the curve")


@dataclass(frozen=True)
class SpectralOrdering:
    """Total order on the eigenvalue clusters of a target matrix.

    order lists each cluster center exactly once.  provenance records
    how the order arose; for curves, first_hits holds the per-cluster
    first-hit parameters in [0, 1].
    """

    order: tuple
    provenance: str = "explicit"
    polyline: tuple = ()
    first_hits: tuple = ()

    def __len__(self):
        return len(self.order)

    def validate_against(self, measure: BrownMeasure, radius: float) -> None:
        """Every atom covered exactly once."""
        if len(self.order) != len(measure.atoms):
            raise ValueError("ordering does not have one entry per eigenvalue cluster")
        used = [False] * len(measure.atoms)
        for z in self.order:
            hits = [j for j, (loc, _) in enumerate(measure.atoms)
                    if not used[j] and abs(loc - z) <= radius]
            if not hits:
                raise ValueError(f"ordering entry {z} matches no eigenvalue cluster")
            used[hits[0]] = True
        if not all(used):
            raise ValueError("ordering misses some eigenvalue cluster")


def explicit_ordering(values) -> SpectralOrdering:
    return SpectralOrdering(order=tuple(complex(z) for z in values))


def modulus_ordering(t: CMatrix) -> SpectralOrdering:
    """Clusters by ascending modulus; ties by argument in [0, 2pi)."""
    m = brown(t)
    order = sorted(m.locations, key=lambda z: (abs(z), np.angle(z) % (2 * np.pi)))
    return SpectralOrdering(order=tuple(order), provenance="modulus")


def _first_hit(polyline, z: complex, tol: float):
    """Smallest curve parameter whose point is within tol of z, else None.

    The polyline is parameterized uniformly per segment; within a
    segment the entry point of the tol-disk is found exactly from the
    quadratic, ties toward smaller parameter by construction.
    """
    nseg = len(polyline) - 1
    for i in range(nseg):
        p = polyline[i]
        d = polyline[i + 1] - p
        a = abs(d) ** 2
        rel = p - z
        b = 2 * (d.conjugate() * rel).real
        c = abs(rel) ** 2 - tol * tol
        if a == 0:
            if c <= 0:
                return i / nseg
            continue
        disc = b * b - 4 * a * c
        if disc < 0:
            continue
        root = np.sqrt(disc)
        s_lo = (-b - root) / (2 * a)
        s_hi = (-b + root) / (2 * a)
        if s_hi < 0 or s_lo > 1:
            continue
        s = min(max(s_lo, 0.0), 1.0)
        return (i + s) / nseg
    return None


def ordering_from_curve(polyline, t: CMatrix, curve_tol: float | None = None) -> SpectralOrdering:
    """First-hit ordering of the clusters of t along a polyline.

    Requires every cluster to lie within curve_tol of the curve, i.e.
    the curve's range covers the support of the spectral distribution.
    """
    poly = tuple(complex(z) for z in polyline)
    if len(poly) < 2:
        raise ValueError("polyline needs at least 2 vertices")
    if curve_tol is None:
        curve_tol = CURVE_TOL_FACTOR * max(1.0, t.norm())
    m = brown(t)
    hits = []
    for z in m.locations:
        h = _first_hit(poly, z, curve_tol)
        if h is None:
            raise CurveCoverageError(z)
        hits.append(h)
    idx = sorted(range(len(hits)), key=lambda j: (hits[j], m.locations[j].real, m.locations[j].imag))
    return SpectralOrdering(
        order=tuple(m.locations[j] for j in idx),
        provenance="curve",
        polyline=poly,
        first_hits=tuple(hits[j] for j in idx))


@dataclass(frozen=True)
class TriangularForm:
    """T = normal_part + nilpotent_part in the basis of ``u``.

    In the u basis the normal part is diagonal (the conditional
    expectation of T onto the diagonal algebra) and the nilpotent part
    is strictly upper triangular, so its dim-th power vanishes.
    cluster_sizes records the algebraic multiplicity per ordering entry.
    """

    u: CMatrix
    normal_part: CMatrix
    nilpotent_part: CMatrix
    ordering: SpectralOrdering
    cluster_sizes: tuple

    @property
    def dim(self) -> int:
        return self.u.dim

    def reconstruct(self) -> CMatrix:
        return self.normal_part + self.nilpotent_part

    def prefix_rank(self, nclusters: int) -> int:
        return int(sum(self.cluster_sizes[:nclusters]))


def upper_triangular_form(t: CMatrix, ordering: SpectralOrdering,
                          policy: PrecisionPolicy = STANDARD) -> TriangularForm:
    """Schur-type splitting of t along the given cluster ordering."""
    m = brown(t)
    radius = cluster_radius(t)
    ordering.validate_against(m, radius)

    def cluster_of(z: complex) -> int:
        best, bestpos = None, None
        for pos, center in enumerate(ordering.order):
            d = abs(z - center)
            if best is None or d < best:
                best, bestpos = d, pos
        return bestpos
    form = schur(t, policy)
    keys = {complex(z): cluster_of(complex(z)) for z in form.diag}
    ordered = reorder_schur(form, key=lambda z: keys[complex(z)])
    u = ordered.u.array
    diag = np.diag(ordered.r.array)
    normal = CMatrix((u * diag) @ u.conj().T)
    strict = ordered.r.array - np.diag(diag)
    nil = CMatrix(u @ strict @ u.conj().T)
    sizes = [0] * len(ordering.order)
    for z in form.diag:
        sizes[keys[complex(z)]] += 1
    return TriangularForm(u=ordered.u, normal_part=normal, nilpotent_part=nil,
                          ordering=ordering, cluster_sizes=tuple(sizes))


def interval_projection(form: TriangularForm, a: int, b: int) -> Projection:
    """Difference of prefix projections for cluster indices a <= b."""
    if not 0 <= a <= b <= len(form.cluster_sizes):
        raise ValueError(f"need 0 <= a <= b <= {len(form.cluster_sizes)}, got a={a}, b={b}")
    na, nb = form.prefix_rank(a), form.prefix_rank(b)
    basis = form.u.array[:, na:nb]
    return Projection.from_basis(basis)


def _ordering_to_obj(o: SpectralOrdering) -> dict:
    return {
        "order": [[z.real, z.imag] for z in o.order],
        "provenance": o.provenance,
        "polyline": [[z.real, z.imag] for z in o.polyline],
        "first_hits": list(o.first_hits),
    }


def _ordering_from_obj(obj: dict) -> SpectralOrdering:
    return SpectralOrdering(
        order=tuple(complex(*z) for z in obj["order"]),
        provenance=obj["provenance"],
        polyline=tuple(complex(*z) for z in obj["polyline"]),
        first_hits=tuple(obj["first_hits"]))


def save_triangular_form(form: TriangularForm, path) -> None:
    obj = {
        "u": form.u.to_json_obj(),
        "normal_part": form.normal_part.to_json_obj(),
        "nilpotent_part": form.nilpotent_part.to_json_obj(),
        "ordering": _ordering_to_obj(form.ordering),
        "cluster_sizes": list(form.cluster_sizes),
    }
    with open(path, "w") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_triangular_form(path) -> TriangularForm:
    with open(path) as fh:
        obj = json.load(fh)
    return TriangularForm(
        u=CMatrix.from_json_obj(obj["u"]),
        normal_part=CMatrix.from_json_obj(obj["normal_part"]),
        nilpotent_part=CMatrix.from_json_obj(obj["nilpotent_part"]),
        ordering=_ordering_from_obj(obj["ordering"]),
        cluster_sizes=tuple(obj["cluster_sizes"]))
