"""Power-root sequences |T^n|^(1/n) and norm-convergence diagnostics.

For a matrix with eigenvalue moduli r_1 <= ... <= r_m the sequence
|T^n|^(1/n) converges in norm to the weighted sum of modulus-ordered
prefix projections, sum_i r_i P_i.  The diagnostics here build that
limit candidate, sample the sequence (through the factored powering
kernel), and classify the tail behaviour deterministically.  The
quasinilpotent calculus (finite Neumann series, power-norm series,
unit-circle growth reports) lives here too.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .matrix import CMatrix
from .measures import brown, cluster_radius
from .numerics import (EXTENDED, STANDARD, GridSpec, PrecisionPolicy,
                       power_root, pseudospectrum_grid, scaled_power)
from .triangular import modulus_ordering, upper_triangular_form

__all__ = [
    "PowerRootSample", "PowerRootTrace", "NCPReport", "NotNilpotentError",
    "CONV_TOL", "DIV_TOL", "TAIL_SLACK", "DEFAULT_NS",
    "default_policy_for", "ncp_limit_candidate", "power_root_sequence",
    "ncp_diagnostic", "shifted_ncp_scan", "neumann_inverse",
    "qn_series_norms", "circle_spectrum_check", "CircleSpectrumReport",
    "trace_to_csv",
]

CONV_TOL = 0.1
DIV_TOL = 0.5
TAIL_SLACK = 1e-9          # tolerance for "decreasing"/"increasing" tails
DEFAULT_NS = (8, 16, 32, 64, 128)
NILPOTENCY_TOL = 1e-8


class NotNilpotentError(ValueError):
    """Input fails the numerical nilpotency requirement."""


def default_policy_for(t: CMatrix, ns) -> PrecisionPolicy:
    """Extended precision for deep powers of matrices with spread moduli.

    The singular-value dynamic range of T^n grows like (modulus
    ratio)^n; beyond ratio 2 and n = 48 the standard condition cap is
    at risk, so extended mode is selected.
    """
    mods = [abs(z) for z in brown(t).locations]
    nonzero = [m for m in mods if m > cluster_radius(t)]
    ratio = (max(nonzero) / min(nonzero)) if len(nonzero) >= 2 else 1.0
    if max(ns) > 48 and ratio > 2.0:
        return EXTENDED
    return STANDARD


def ncp_limit_candidate(t: CMatrix, policy: PrecisionPolicy = STANDARD) -> CMatrix:
    """The norm limit of |T^n|^(1/n): modulus-weighted prefix projections.

    Computed from the modulus-ordered triangular form as U |D| U^*,
    which equals sum_i |a_i| P_i over the interval projections of the
    consecutive modulus clusters.
    """
    form = upper_triangular_form(t, modulus_ordering(t), policy)
    u = form.u.array
    diag = np.diag(u.conj().T @ form.normal_part.array @ u).copy()
    h = (u * np.abs(diag)) @ u.conj().T
    return CMatrix((h + h.conj().T) / 2)


@dataclass(frozen=True)
class PowerRootSample:
    n: int
    root: CMatrix
    deviation: float
    log_scale: float
    mode: str


@dataclass(frozen=True)
class PowerRootTrace:
    subject: CMatrix
    samples: tuple  # of PowerRootSample, ns strictly increasing
    candidate: CMatrix
    policy: PrecisionPolicy

    @property
    def deviations(self):
        return [s.deviation for s in self.samples]


def power_root_sequence(t: CMatrix, ns=DEFAULT_NS,
                        policy: PrecisionPolicy | None = None,
                        candidate: CMatrix | None = None) -> PowerRootTrace:
    """Sample |T^n|^(1/n) over ascending ns against the limit candidate."""
    ns = tuple(int(n) for n in ns)
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ns must be strictly ascending")
    if policy is None:
        policy = default_policy_for(t, ns)
    if candidate is None:
        candidate = ncp_limit_candidate(t, policy)
    samples = []
    for n in ns:
        sp = scaled_power(t, n, policy)
        logs = sp.log_singular_values()
        roots = np.where(np.isfinite(logs), np.exp(np.where(np.isfinite(logs), logs, 0.0) / n), 0.0)
        v = sp.right.array
        h = (v * roots) @ v.conj().T
        h = CMatrix((h + h.conj().T) / 2)
        d = float(np.linalg.norm(h.array - candidate.array, 2))
        samples.append(PowerRootSample(n=n, root=h, deviation=d,
                                       log_scale=sp.log_scale, mode=policy.mode))
    return PowerRootTrace(subject=t, samples=tuple(samples),
                          candidate=candidate, policy=policy)


@dataclass(frozen=True)
class NCPReport:
    """Deterministic verdict on a sampled power-root tail.

    converged: last three deviations nonincreasing (within TAIL_SLACK)
    and the final one below CONV_TOL.  diverging: last three increasing
    by more than TAIL_SLACK and the final one above DIV_TOL.  Anything
    else, or fewer than three samples without a small final deviation,
    is inconclusive.
    """

    verdict: str
    final_deviation: float
    monotone_tail: bool
    shift: complex = 0j


def _classify(deviations) -> tuple:
    final = deviations[-1]
    if len(deviations) >= 3:
        tail = deviations[-3:]
        decreasing = all(b <= a + TAIL_SLACK for a, b in zip(tail, tail[1:]))
        increasing = all(b > a + TAIL_SLACK for a, b in zip(tail, tail[1:]))
    else:
        decreasing = all(b <= a + TAIL_SLACK for a, b in zip(deviations, deviations[1:]))
        increasing = False
    if decreasing and final < CONV_TOL:
        return "converged", decreasing
    if increasing and final > DIV_TOL:
        return "diverging", decreasing
    return "inconclusive", decreasing


def ncp_diagnostic(t: CMatrix, shift: complex = 0j, ns=DEFAULT_NS,
                   policy: PrecisionPolicy | None = None) -> NCPReport:
    """Run the power-root tail on T - shift and classify it."""
    subject = t.shifted(shift) if shift != 0 else t
    trace = power_root_sequence(subject, ns, policy)
    verdict, monotone = _classify(trace.deviations)
    return NCPReport(verdict=verdict, final_deviation=trace.deviations[-1],
                     monotone_tail=monotone, shift=complex(shift))


def shifted_ncp_scan(t: CMatrix, shifts, ns=DEFAULT_NS,
                     policy: PrecisionPolicy | None = None):
    """ncp_diagnostic mapped over a list of shifts."""
    return [ncp_diagnostic(t, shift, ns, policy) for shift in shifts]


def _require_nilpotent(q: CMatrix) -> None:
    power = np.linalg.matrix_power(q.array, q.dim)
    bound = NILPOTENCY_TOL * max(1.0, q.norm()) ** q.dim
    resid = float(np.linalg.norm(power, 2))
    if resid > bound:
        raise NotNilpotentError(f"||Q^dim|| = {resid:.3e} exceeds nilpotency bound {bound:.3e}")


def neumann_inverse(q: CMatrix, check_tol: float = 1e-10) -> CMatrix:
    """(1 + Q)^{-1} = 1 + sum_{k>=1} (-Q)^k, an exact finite sum for nilpotent Q.

    Verifies the product residual ||(1+Q)(1+S) - 1|| against check_tol
    times the scale; the correction S is itself nilpotent.
    """
    _require_nilpotent(q)
    n = q.dim
    eye = np.eye(n, dtype=complex)
    term = eye.copy()
    s = np.zeros_like(q.array)
    for _ in range(1, n):
        term = term @ (-q.array)
        s = s + term
    inv = eye + s
    resid = float(np.linalg.norm((eye + q.array) @ inv - eye, 2))
    scale = max(1.0, q.norm()) ** max(1, n - 1)
    if resid > check_tol * scale:
        raise ArithmeticError(f"Neumann inverse residual {resid:.3e} too large")
    return CMatrix(inv)


def qn_series_norms(q: CMatrix):
    """Partial sums of sum_k ||Q^k||; stabilizes at the nilpotency index."""
    _require_nilpotent(q)
    sums = []
    total = 0.0
    power = np.eye(q.dim, dtype=complex)
    for _ in range(1, q.dim + 1):
        power = power @ q.array
        total += float(np.linalg.norm(power, 2))
        sums.append(total)
    return sums


@dataclass(frozen=True)
class CircleSpectrumReport:
    """How far 1 + Q strays from unimodular behaviour.

    eig_deviation is the max distance of computed eigenvalues of 1 + Q
    from the unit circle (exactly 0 for true nilpotents up to eigensolver
    noise).  forward_root and inverse_root are the n-th roots of the
    norms of (1+Q)^{+-n}, the finite-scale growth rates.  When a
    pseudospectrum window is requested, footprint_deviation is the max
    modulus deviation from 1 over the marked cells.
    """

    eig_deviation: float
    growth_n: int
    forward_root: float
    inverse_root: float
    footprint_deviation: float | None = None


def circle_spectrum_check(q: CMatrix, growth_n: int = 128,
                          policy: PrecisionPolicy = STANDARD,
                          footprint_eps: float | None = None,
                          footprint_grid: GridSpec | None = None) -> CircleSpectrumReport:
    """Unit-circle report for 1 + Q with spectrally trivial Q.

    Precondition: the spectral distribution of Q is concentrated at 0.
    """
    m = brown(q)
    if len(m.atoms) != 1 or abs(m.atoms[0][0]) > cluster_radius(q):
        raise NotNilpotentError("spectral distribution of Q is not concentrated at 0")
    one_plus = CMatrix(np.eye(q.dim) + q.array)
    eigs = np.linalg.eigvals(one_plus.array)
    eig_dev = float(np.abs(np.abs(eigs) - 1.0).max())
    sp_f = scaled_power(one_plus, growth_n, policy)
    inv = neumann_inverse(q)
    sp_b = scaled_power(inv, growth_n, policy)
    fw = math.exp(sp_f.log_singular_values()[0] / growth_n)
    bw = math.exp(sp_b.log_singular_values()[0] / growth_n)
    fp_dev = None
    if footprint_eps is not None and footprint_grid is not None:
        marks = pseudospectrum_grid(one_plus, footprint_eps, footprint_grid)
        zs = footprint_grid.centers()
        if marks.any():
            fp_dev = float(np.abs(np.abs(zs[marks]) - 1.0).max())
        else:
            fp_dev = 0.0
    return CircleSpectrumReport(eig_deviation=eig_dev, growth_n=growth_n,
                                forward_root=fw, inverse_root=bw,
                                footprint_deviation=fp_dev)


def trace_to_csv(trace: PowerRootTrace, path) -> None:
    """One row per sample: n, d_n, norm_Hn, log_scale, mode."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "d_n", "norm_Hn", "log_scale", "mode"])
        for s in trace.samples:
            w.writerow([s.n, repr(s.deviation), repr(s.root.norm()),
                        repr(s.log_scale), s.mode])
