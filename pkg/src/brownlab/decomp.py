"""Decomposability diagnostics via spectra of projection compressions.

Each check compresses the matrix by (differences of) splitting
projections and measures how far the compression's eigenvalues stray
outside a target region: the violation is the largest distance to the
target's closure, zero when every eigenvalue lands inside.  Rank-zero
compressions have empty spectrum by convention and pass vacuously.

Finite matrices have totally disconnected spectra, so every check here
passes up to numerics; the diagnostics exist to make that quantitative
and to probe truncation families where the limit object genuinely
fails them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix import CMatrix
from .measures import (BoundaryAmbiguityError, boundary_tol, brown,
                       hs_projection, range_basis)
from .numerics import GridSpec, pseudospectrum_grid, schur
from .regions import Region, complement, disk, intersection

__all__ = [
    "CheckResult", "DiagnosticReport", "NoAdmissibleDiskError",
    "VIOLATION_TOL", "disk_conditions", "strong_borel_conditions",
    "sandwich_check", "lange_wang_check", "FSDReport",
    "full_spectral_distribution",
]

VIOLATION_TOL = 1e-8            # times ||T||
INTERMEDIATE_RADII = 17         # search grid for the separating disk


class NoAdmissibleDiskError(RuntimeError):
    """No intermediate disk with eigenvalue-free boundary was found."""


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    region: str
    violation: float
    passed: bool


@dataclass(frozen=True)
class DiagnosticReport:
    checks: tuple
    overall: bool

    @staticmethod
    def from_checks(checks) -> "DiagnosticReport":
        checks = tuple(checks)
        return DiagnosticReport(checks=checks, overall=all(c.passed for c in checks))

    def to_json_obj(self) -> dict:
        return {
            "overall": self.overall,
            "checks": [
                {"id": c.check_id, "region": c.region,
                 "violation": c.violation, "pass": c.passed}
                for c in self.checks
            ],
        }


def _compression_eigs(t: CMatrix, basis: np.ndarray) -> np.ndarray:
    if basis.shape[1] == 0:
        return np.array([], dtype=complex)
    return np.linalg.eigvals(basis.conj().T @ t.array @ basis)


def _violation(t: CMatrix, basis: np.ndarray, target: Region) -> float:
    eigs = _compression_eigs(t, basis)
    if eigs.size == 0:
        return 0.0  # empty spectrum by convention
    return max(target.distance(complex(z)) for z in eigs)


def _check(t: CMatrix, basis: np.ndarray, target: Region, check_id: str,
           tol_scale: float) -> CheckResult:
    v = _violation(t, basis, target)
    return CheckResult(check_id=check_id, region=target.to_json(),
                       violation=v, passed=v <= tol_scale)


def disk_conditions(t: CMatrix, disks, violation_tol: float = VIOLATION_TOL) -> DiagnosticReport:
    """Four compression-spectrum inclusions per disk.

    For each open disk D, the compressions by P(T, closure(D)),
    P(T, C minus D) and their complements must have spectra in
    closure(D), outside D, outside D, and closure(D) respectively.
    """
    scale = violation_tol * max(1.0, t.norm())
    checks = []
    for i, (center, radius) in enumerate(disks):
        closed = disk(center, radius, closed=True)
        exterior = complement(disk(center, radius, closed=False))
        p_in = hs_projection(t, closed)
        p_out = hs_projection(t, exterior)
        checks.append(_check(t, p_in.basis, closed, f"disk{i}.inside", scale))
        checks.append(_check(t, p_out.basis, exterior, f"disk{i}.outside", scale))
        checks.append(_check(t, p_in.complement().basis, exterior, f"disk{i}.co_inside", scale))
        checks.append(_check(t, p_out.complement().basis, closed, f"disk{i}.co_outside", scale))
    return DiagnosticReport.from_checks(checks)


def _difference_basis(t: CMatrix, small: Region, big: Region):
    """Range basis of P(T, big) - P(T, small); requires nesting on the spectrum."""
    p_big = hs_projection(t, big)
    p_small = hs_projection(t, small)
    if p_small.rank > p_big.rank:
        raise ValueError("inner region does not nest inside the outer region on the spectrum")
    m = brown(t)
    tol = boundary_tol(t)
    for z, _ in m.atoms:
        in_small, _ = small.classify(z, tol)
        in_big, _ = big.classify(z, tol)
        if in_small and not in_big:
            raise ValueError(f"eigenvalue {z} is in the inner region but not the outer one")
    diff = CMatrix(p_big.matrix.array - p_small.matrix.array)
    rank = p_big.rank - p_small.rank
    return range_basis(diff, rank), rank


def strong_borel_conditions(t: CMatrix, pairs,
                            violation_tol: float = VIOLATION_TOL) -> DiagnosticReport:
    """Middle-compression spectra against the closure of (outer minus inner).

    Each pair is (inner, outer) with inner contained in outer.  The
    closed-pair reading with outer = F and inner = F minus E makes the
    target F intersect E; with eigenvalues held clear of all boundaries
    the two targets coincide at matrix scale.
    """
    scale = violation_tol * max(1.0, t.norm())
    checks = []
    for i, (inner, outer) in enumerate(pairs):
        basis, rank = _difference_basis(t, inner, outer)
        target = intersection(outer, complement(inner))
        checks.append(_check(t, basis, target, f"pair{i}.difference", scale))
    return DiagnosticReport.from_checks(checks)


def sandwich_check(t: CMatrix, inner: Region, outer: Region,
                   violation_tol: float = VIOLATION_TOL) -> DiagnosticReport:
    """Weaker middle-compression target closure(outer) ^ closure(complement(inner))."""
    scale = violation_tol * max(1.0, t.norm())
    basis, rank = _difference_basis(t, inner, outer)
    target = intersection(outer, complement(inner))
    return DiagnosticReport.from_checks(
        [_check(t, basis, target, "sandwich.middle", scale)])


def lange_wang_check(t: CMatrix, g_disk, h_disk,
                     violation_tol: float = VIOLATION_TOL) -> DiagnosticReport:
    """Invariant-subspace spectra for a nested pair of open disks.

    Searches a fixed grid of radii for an intermediate disk D with
    closure(G) inside D, closure(D) inside H and eigenvalue-free
    boundary, then verifies the four inclusions for Y = range
    P(T, C minus D) and Z = range P(T, closure(D)).
    """
    (cg, rg), (ch, rh) = (complex(g_disk[0]), float(g_disk[1])), (complex(h_disk[0]), float(h_disk[1]))
    gap = rh - abs(cg - ch)
    if rg >= gap:
        raise ValueError("need closure(G) inside H")
    tol = boundary_tol(t)
    eigs = np.array(schur(t).diag)
    chosen = None
    for frac in np.linspace(0, 1, INTERMEDIATE_RADII + 2)[1:-1]:
        rd = rg + frac * (gap - rg)
        if np.abs(np.abs(eigs - cg) - rd).min() > tol:
            chosen = rd
            break
    if chosen is None:
        raise NoAdmissibleDiskError(
            "no intermediate radius with eigenvalue-free boundary in the search grid")
    scale = violation_tol * max(1.0, t.norm())
    d_closed = disk(cg, chosen, closed=True)
    d_exterior = complement(disk(cg, chosen, closed=False))
    p_y = hs_projection(t, d_exterior)
    p_z = hs_projection(t, d_closed)
    outside_g = complement(disk(cg, rg, closed=False))
    h_closure = disk(ch, rh, closed=True)
    checks = [
        _check(t, p_y.basis, outside_g, "Y.spectrum", scale),
        _check(t, p_y.complement().basis, h_closure, "coY.spectrum", scale),
        _check(t, p_z.basis, h_closure, "Z.spectrum", scale),
        _check(t, p_z.complement().basis, outside_g, "coZ.spectrum", scale),
    ]
    return DiagnosticReport.from_checks(checks)


@dataclass(frozen=True)
class FSDReport:
    """Support-versus-spectrum comparison.

    For a single matrix both sets are the eigenvalues, so the gap is 0.
    For a truncation family the footprint of the eps-pseudospectrum of
    the largest block stands in for the limit spectrum; the gap is the
    largest distance from a marked cell to the eigenvalue set, and the
    report is flagged when it exceeds 2 * eps (the limit object then
    fails full spectral distribution at this resolution).
    """

    kind: str
    eps: float
    gap: float
    flagged: bool
    note: str = ""


def full_spectral_distribution(subject, eps: float = 0.1,
                               grid: GridSpec | None = None) -> FSDReport:
    """Compare spectral-distribution support against (pseudo)spectrum."""
    if isinstance(subject, CMatrix):
        return FSDReport(kind="matrix", eps=eps, gap=0.0, flagged=False,
                         note="finite matrix: support equals spectrum exactly")
    family = subject
    block = family.blocks[-1]  # largest truncation window into the limit
    eig_pool = np.concatenate([np.array(schur(b).diag) for b in family.blocks])
    if grid is None:
        r = 1.2 * max(b.norm() for b in family.blocks) + eps
        grid = GridSpec(-r, r, -r, r, 41, 41)
    marks = pseudospectrum_grid(block, eps, grid)
    zs = grid.centers()
    gap = 0.0
    for z in zs[marks]:
        gap = max(gap, float(np.abs(eig_pool - z).min()))
    flagged = gap > 2 * eps
    note = "limit fails full spectral distribution" if flagged else ""
    return FSDReport(kind="family", eps=eps, gap=gap, flagged=flagged, note=note)
