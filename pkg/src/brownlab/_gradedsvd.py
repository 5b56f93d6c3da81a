"""SVD of graded matrices with high relative accuracy.

The matrix powering kernel keeps powers in factored form
``U diag(s) V^*`` and multiplies factored forms through middles
``M = diag(s1) W diag(s2)`` with ``W`` unitary.  The singular values of
``M`` span the product of the two grading ranges, far beyond what a
backward-stable SVD can resolve: a plain SVD only returns singular
values down to ``eps * sigma_max``.  For strongly graded middles we use
QR with column pivoting followed by one-sided Jacobi on the rows of
``R``, whose transformations are columnwise small and therefore keep
every singular value to high relative accuracy.  Mildly graded middles
take the plain LAPACK route, which is then provably accurate enough.

Both routes exist in double and in double-double arithmetic; the
extended route runs Householder QR and the Jacobi sweeps entirely in
pair arithmetic.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .dd import DD, DDArray

# plain-SVD route is safe while (range of s1) * (range of s2) stays below this
GRADED_CUTOFF = 1.0e7

_EPS = float(np.finfo(float).eps)

__all__ = ["SVDConvergenceError", "svd_factored_middle", "initial_factor", "GRADED_CUTOFF"]


class SVDConvergenceError(RuntimeError):
    """Jacobi sweeps exceeded the iteration cap."""


def _complete_basis(U: np.ndarray, cols) -> np.ndarray:
    """Fill the listed columns of U with an orthonormal completion."""
    n = U.shape[0]
    if not len(cols):
        return U
    have = [j for j in range(U.shape[1]) if j not in set(cols)]
    B = U[:, have]
    P = np.eye(n, dtype=complex) - B @ B.conj().T
    Q, R = np.linalg.qr(P)
    picked = np.argsort(-np.abs(np.diag(R)))[: len(cols)]
    for j, k in zip(cols, picked):
        U[:, j] = Q[:, k]
    return U


def _jacobi_numpy(X: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60):
    """One-sided Jacobi: returns (Ux, s, V) with X = Ux diag(s) V^*."""
    X = X.astype(complex).copy()
    n, m = X.shape
    V = np.eye(m, dtype=complex)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(m - 1):
            for q in range(p + 1, m):
                xp = X[:, p]
                xq = X[:, q]
                app = float(np.real(xp.conj() @ xp))
                aqq = float(np.real(xq.conj() @ xq))
                if app == 0.0 or aqq == 0.0:
                    continue
                apq = complex(xp.conj() @ xq)
                rel = abs(apq) / np.sqrt(app * aqq)
                off = max(off, rel)
                if rel <= tol:
                    continue
                om = apq / abs(apq)
                tau = (aqq - app) / (2.0 * abs(apq))
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_p = c * xp - s * np.conj(om) * xq
                new_q = s * om * xp + c * xq
                X[:, p] = new_p
                X[:, q] = new_q
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * np.conj(om) * vq
                V[:, q] = s * om * vp + c * vq
        if off <= tol:
            break
    else:
        raise SVDConvergenceError(
            f"one-sided Jacobi did not converge in {max_sweeps} sweeps (off={off:.2e})")
    sv = np.linalg.norm(X, axis=0)
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    X = X[:, order]
    V = V[:, order]
    U = np.zeros_like(X)
    nz = sv > 0
    U[:, nz] = X[:, nz] / sv[nz]
    U = _complete_basis(U, list(np.nonzero(~nz)[0]))
    return U, sv, V


def _dd_scalar(re: DD, im: DD) -> DDArray:
    return DDArray(re, im)


def _jacobi_dd(Xdd: DDArray, tol: float = 1e-30, max_sweeps: int = 80):
    """One-sided Jacobi in double-double arithmetic."""
    X = Xdd.copy()
    n, m = X.shape
    V = DDArray.eye(m)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(m - 1):
            for q in range(p + 1, m):
                app = X[:, p].abs2().sum()
                aqq = X[:, q].abs2().sum()
                if app.hi == 0.0 or aqq.hi == 0.0:
                    continue
                apq = X.dot_cols(p, q)
                a2 = apq.abs2()
                rel = float(np.sqrt(max(a2.to_float(), 0.0) / (app.to_float() * aqq.to_float())))
                off = max(off, rel)
                if rel <= tol:
                    continue
                absapq = a2.sqrt()
                om = _dd_scalar(apq.re / absapq, apq.im / absapq)
                tau = (aqq - app) / (DD(2.0) * absapq)
                tau_f = float(tau.to_float())
                if tau_f != 0.0:
                    abst = tau if tau_f > 0 else -tau
                    t = DD(np.sign(tau_f)) / (abst + (abst * abst + DD(1.0)).sqrt())
                else:
                    t = DD(1.0)
                c = DD(1.0) / (t * t + DD(1.0)).sqrt()
                s = c * t
                cs = _dd_scalar(c, DD(0.0))
                som = om * _dd_scalar(s, DD(0.0))
                som_c = om.conj() * _dd_scalar(s, DD(0.0))
                xp = X[:, p].copy()
                xq = X[:, q].copy()
                X[:, p] = xp * cs - xq * som_c
                X[:, q] = xp * som + xq * cs
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = vp * cs - vq * som_c
                V[:, q] = vp * som + vq * cs
        if off <= tol:
            break
    else:
        raise SVDConvergenceError(
            f"dd Jacobi did not converge in {max_sweeps} sweeps (off={off:.2e})")

    sv = np.zeros(m)
    Uc = np.zeros((n, m), dtype=complex)
    for j in range(m):
        sv[j] = float(X[:, j].abs2().sum().sqrt().to_float())
    Xc = X.to_complex()
    nz = sv > 0
    Uc[:, nz] = Xc[:, nz] / sv[nz]
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    Uc = Uc[:, order]
    Vc = V.to_complex()[:, order]
    Uc = _complete_basis(Uc, list(np.nonzero(sv == 0)[0]))
    return Uc, sv, Vc


def _col_broadcast(v: DDArray) -> DDArray:
    return DDArray(DD(v.re.hi[:, None], v.re.lo[:, None]), DD(v.im.hi[:, None], v.im.lo[:, None]))


def _row_broadcast(v: DDArray) -> DDArray:
    return DDArray(DD(v.re.hi[None, :], v.re.lo[None, :]), DD(v.im.hi[None, :], v.im.lo[None, :]))


def _qrp_dd(Mdd: DDArray):
    """Householder QR with column pivoting in double-double arithmetic.

    Pivot decisions are made at double precision; the transformations
    themselves are applied in pair arithmetic.
    """
    M = Mdd.copy()
    n, m = M.shape
    Q = DDArray.eye(n)
    piv = list(range(m))
    for k in range(min(n, m)):
        norms = [M[k:, j].abs2().sum().to_float() for j in range(k, m)]
        jmax = k + int(np.argmax(norms))
        if jmax != k:
            tmp = M[:, k].copy()
            M[:, k] = M[:, jmax]
            M[:, jmax] = tmp
            piv[k], piv[jmax] = piv[jmax], piv[k]
        x = M[k:, k].copy()
        nrm2 = x.abs2().sum()
        if nrm2.hi == 0.0:
            continue
        nrm = nrm2.sqrt()
        alpha = x[0]
        aabs2 = alpha.abs2()
        if aabs2.hi == 0.0:
            phase = _dd_scalar(DD(1.0), DD(0.0))
        else:
            aabs = aabs2.sqrt()
            phase = _dd_scalar(alpha.re / aabs, alpha.im / aabs)
        v = x
        v[0] = v[0] + phase * _dd_scalar(nrm, DD(0.0))
        v2 = v.abs2().sum()
        if v2.hi == 0.0:
            continue
        beta = _dd_scalar(DD(2.0) / v2, DD(0.0))
        vc = _col_broadcast(v)
        # M[k:, :] -= v * beta * (v^* M[k:, :])
        proj = (vc.conj() * M[k:, :]).sum_axis(0)
        M[k:, :] = M[k:, :] - vc * _row_broadcast(proj * beta)
        # Q[:, k:] -= (Q[:, k:] v) * beta * v^*
        qv = (Q[:, k:] * _row_broadcast(v)).sum_axis(1)
        Q[:, k:] = Q[:, k:] - _col_broadcast(qv * beta) * _row_broadcast(v.conj())
    return Q, M, np.array(piv)


def _snap_noise(s: np.ndarray, floor: float) -> np.ndarray:
    """Zero out singular values below the representation noise floor."""
    if s.size == 0 or s[0] == 0:
        return s
    out = s.copy()
    out[out <= floor * s[0]] = 0.0
    return out


def svd_factored_middle(s1: np.ndarray, W: np.ndarray, s2: np.ndarray, extended: bool):
    """SVD of ``diag(s1) @ W @ diag(s2)`` preserving relative accuracy.

    ``s1``/``s2`` are nonnegative and descending; zeros encode exact rank
    deficiency and propagate exactly.  Returns ``(U, s, V)`` with the
    product equal to ``U diag(s) V^*`` and ``s`` descending.
    """
    m = W.shape[0]
    if (s1 == 0).all() or (s2 == 0).all():
        return np.eye(m, dtype=complex), np.zeros(m), np.eye(m, dtype=complex)

    def _range(s):
        nz = s[s > 0]
        return nz[0] / nz[-1]

    graded = _range(s1) * _range(s2) > GRADED_CUTOFF

    if not graded and not extended:
        M = (s1[:, None] * W) * s2[None, :]
        U, sv, Vh = np.linalg.svd(M)
        # with this routing only structural zeros can live below the bound
        sv = _snap_noise(sv, 1e-9)
        return U, sv, Vh.conj().T

    if extended:
        s1d = DDArray(DD(s1[:, None]), DD(np.zeros((m, 1))))
        s2d = DDArray(DD(s2[None, :]), DD(np.zeros((1, m))))
        Mdd = DDArray.from_complex(W) * s1d * s2d
        Qdd, Rdd, piv = _qrp_dd(Mdd)
        Ux, sv, Vx = _jacobi_dd(Rdd.conj_T())
        Q = Qdd.to_complex()
    else:
        M = (s1[:, None] * W) * s2[None, :]
        Q, R, piv = scipy.linalg.qr(M, pivoting=True)
        Ux, sv, Vx = _jacobi_numpy(R.conj().T)
    # R = Vx diag(sv) Ux^* and M Pi = Q R, so M = (Q Vx) diag(sv) (Pi Ux)^*
    U = Q @ Vx
    P = np.eye(m)[:, piv]
    V = P @ Ux
    return U, sv, V


def initial_factor(A: np.ndarray, extended: bool):
    """Rank-revealing SVD of raw input data.

    Singular values below the noise floor of the float64 representation
    of ``A`` are snapped to exact zero, so structural nilpotency survives
    the factored powering chain.
    """
    n = A.shape[0]
    if extended:
        Qdd, Rdd, piv = _qrp_dd(DDArray.from_complex(A))
        Ux, sv, Vx = _jacobi_dd(Rdd.conj_T())
        U = Qdd.to_complex() @ Vx
        P = np.eye(n)[:, piv]
        V = P @ Ux
    else:
        U, sv, Vh = np.linalg.svd(A)
        V = Vh.conj().T
    sv = _snap_noise(sv, 4 * n * _EPS)
    return U, sv, V
