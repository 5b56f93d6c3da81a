"""Dense complex linear-algebra kernel.

Schur decomposition with eigenvalue reordering, SVD, scaled matrix
powers kept in factored SVD form, n-th roots of power moduli,
resolvent norms, pseudospectra on grids, and the matrix exponential.

Precision is governed by a :class:`PrecisionPolicy`.  In standard mode
everything runs in float64; extended mode routes the powering chain
through in-repo double-double arithmetic.  All operations are pure
functions of their inputs and deterministic for a fixed policy, so
results are safe to share across threads and grids may be evaluated in
any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._gradedsvd import initial_factor, svd_factored_middle
from .matrix import CMatrix

__all__ = [
    "PrecisionPolicy", "STANDARD", "EXTENDED",
    "SchurForm", "SchurConvergenceError", "PrecisionError",
    "schur", "reorder_schur", "svd", "SVDResult",
    "ScaledPower", "scaled_power", "power_root",
    "resolvent_norm", "GridSpec", "pseudospectrum_grid", "expm",
    "RESOLVENT_FLOOR",
]

# sigma_min below this multiple of ||A|| reports an infinite resolvent
RESOLVENT_FLOOR = 1e-14


class SchurConvergenceError(RuntimeError):
    """QR iteration failed; carries the reported residual context."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class PrecisionError(RuntimeError):
    """Standard-mode accuracy budget exceeded; rerun in extended mode."""


@dataclass(frozen=True)
class PrecisionPolicy:
    """Arithmetic mode plus the tolerances quoted by kernel contracts.

    condition_cap bounds the singular-value spread of accumulated
    products that standard mode will accept.  The default reflects the
    factored powering kernel's real envelope: middles with spread
    beyond ~1e150 underflow float64 when squared.  Exact rank
    deficiency is exempt from the cap.
    """

    mode: str = "standard"
    condition_cap: float = 1e150
    unitary_tol: float = 1e-12
    recon_tol: float = 1e-12

    def __post_init__(self):
        if self.mode not in ("standard", "extended"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.condition_cap < 1:
            raise ValueError("condition_cap must be >= 1")
        if self.unitary_tol <= 0 or self.recon_tol <= 0:
            raise ValueError("tolerances must be positive")

    @property
    def extended(self) -> bool:
        return self.mode == "extended"


STANDARD = PrecisionPolicy()
EXTENDED = PrecisionPolicy(mode="extended", condition_cap=1e300)


@dataclass(frozen=True)
class SchurForm:
    """Unitary U and upper-triangular R with source = U R U^*."""

    u: CMatrix
    r: CMatrix
    diag: tuple

    def reconstruct(self) -> CMatrix:
        return CMatrix(self.u.array @ self.r.array @ self.u.array.conj().T)


def _is_upper_triangular(a: np.ndarray) -> bool:
    return not np.tril(a, -1).any()


def schur(a: CMatrix, policy: PrecisionPolicy = STANDARD) -> SchurForm:
    """Complex Schur form of ``a``; diagonal carries the eigenvalues.

    Hessenberg reduction plus implicitly shifted QR (LAPACK zgees).
    Inputs that are already upper triangular pass through with U = I.
    """
    arr = a.array
    if _is_upper_triangular(arr):
        return SchurForm(CMatrix.identity(a.dim), a, tuple(np.diag(arr)))
    try:
        r, u = scipy.linalg.schur(arr, output="complex")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK cap
        raise SchurConvergenceError(f"QR iteration did not converge: {exc}") from exc
    r = np.triu(r)
    form = SchurForm(CMatrix(u), CMatrix(r), tuple(np.diag(r)))
    scale = max(1.0, a.norm())
    resid = float(np.linalg.norm(form.reconstruct().array - arr, 2))
    if resid > policy.recon_tol * scale * 100:
        raise SchurConvergenceError("Schur reconstruction residual too large", residual=resid)
    return form


def _swap_adjacent(u: np.ndarray, r: np.ndarray, i: int) -> None:
    """Exchange diagonal entries i, i+1 of the triangular r in place.

    Rotates into the eigenvector of the trailing eigenvalue of the 2x2
    block, which keeps triangularity; the swapped diagonal entries are
    written back exactly so the eigenvalue multiset never drifts.
    """
    a = r[i, i]
    b = r[i, i + 1]
    d = r[i + 1, i + 1]
    if b == 0 and a == d:
        return
    v = np.array([b, d - a], dtype=complex)
    nv = np.linalg.norm(v)
    if nv == 0:
        return
    v /= nv
    g = np.array([[v[0], -np.conj(v[1])], [v[1], np.conj(v[0])]], dtype=complex)
    r[i:i + 2, :] = g.conj().T @ r[i:i + 2, :]
    r[:, i:i + 2] = r[:, i:i + 2] @ g
    u[:, i:i + 2] = u[:, i:i + 2] @ g
    r[i, i] = d
    r[i + 1, i + 1] = a
    r[i + 1, i] = 0.0


def reorder_schur(form: SchurForm, key) -> SchurForm:
    """Stable-sort the Schur diagonal by ``key`` via adjacent swaps.

    ``key`` maps an eigenvalue to any orderable value.  Ties keep their
    input order, so reordering is deterministic and never splits groups
    that compare equal.
    """
    u = form.u.array.copy()
    r = form.r.array.copy()
    n = r.shape[0]
    keys = [key(z) for z in np.diag(r)]
    # bubble sort: only adjacent strict inversions are exchanged
    for _ in range(n):
        swapped = False
        for i in range(n - 1):
            if keys[i] > keys[i + 1]:
                _swap_adjacent(u, r, i)
                keys[i], keys[i + 1] = keys[i + 1], keys[i]
                swapped = True
        if not swapped:
            break
    return SchurForm(CMatrix(u), CMatrix(np.triu(r)), tuple(np.diag(r)))


@dataclass(frozen=True)
class SVDResult:
    u: CMatrix
    sigma: tuple
    v: CMatrix

    def reconstruct(self) -> CMatrix:
        return CMatrix((self.u.array * np.asarray(self.sigma)) @ self.v.array.conj().T)


def svd(a: CMatrix, policy: PrecisionPolicy = STANDARD) -> SVDResult:
    """Singular value decomposition ``a = u diag(sigma) v^*``, sigma descending."""
    try:
        u, s, vh = np.linalg.svd(a.array)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK cap
        raise SchurConvergenceError(f"SVD iteration did not converge: {exc}") from exc
    return SVDResult(CMatrix(u), tuple(float(x) for x in s), CMatrix(vh.conj().T))


@dataclass(frozen=True)
class ScaledPower:
    """``base**n`` represented as ``2**scale_pow2 * left diag(sigma) right^*``.

    ``normalized`` is the assembled unit-scale matrix and ``log_scale``
    equals ``scale_pow2 * ln 2``, so ``base**n = exp(log_scale) * normalized``
    with the rescaling itself exact (powers of two).  For nilpotent bases
    whose n-th power vanishes, ``normalized`` is the zero matrix and the
    ``nilpotent`` flag is set; ``log_scale`` is then conventional.
    """

    base: CMatrix
    n: int
    normalized: CMatrix
    log_scale: float
    left: CMatrix = field(repr=False)
    sigma: tuple = field(repr=False)
    right: CMatrix = field(repr=False)
    scale_pow2: int = 0
    nilpotent: bool = False
    mode: str = "standard"

    def singular_values(self) -> np.ndarray:
        """Singular values of base**n (may overflow to inf for huge powers)."""
        logs = self.log_singular_values()
        out = np.zeros(len(self.sigma))
        finite = np.isfinite(logs)
        with np.errstate(over="ignore"):
            out[finite] = np.exp(logs[finite])
        return out

    def log_singular_values(self) -> np.ndarray:
        """Natural logs of the singular values of base**n (-inf for zeros)."""
        s = np.asarray(self.sigma)
        out = np.full(s.shape, -np.inf)
        nz = s > 0
        out[nz] = np.log(s[nz]) + self.scale_pow2 * math.log(2.0)
        return out


def _rescale(s: np.ndarray):
    """Pull out an exact power of two so that max(s) lands in [1/2, 2]."""
    if s[0] == 0:
        return s, 0
    k = int(np.round(np.log2(s[0])))
    return s * math.pow(2.0, -k), k


def _check_condition(s: np.ndarray, policy: PrecisionPolicy):
    nz = s[s > 0]
    if nz.size >= 2 and not policy.extended:
        cond = nz[0] / nz[-1]
        if cond > policy.condition_cap:
            raise PrecisionError(
                f"accumulated product condition estimate {cond:.3e} exceeds "
                f"condition_cap {policy.condition_cap:.3e} in standard mode; "
                "rerun with an extended-precision policy")


def _multiply_factored(f1, f2, policy: PrecisionPolicy):
    """(U1 s1 V1^*, k1) @ (U2 s2 V2^*, k2) in factored form."""
    u1, s1, v1, k1 = f1
    u2, s2, v2, k2 = f2
    w = v1.conj().T @ u2
    u, s, v = svd_factored_middle(s1, w, s2, policy.extended)
    s, k = _rescale(s)
    _check_condition(s, policy)
    return u1 @ u, s, v2 @ v, k1 + k2 + k


def scaled_power(a: CMatrix, n: int, policy: PrecisionPolicy = STANDARD) -> ScaledPower:
    """``a**n`` by binary powering of factored SVD forms.

    The running factor norm is rescaled by exact powers of two whenever
    it leaves [1/2, 2].  Standard mode raises :class:`PrecisionError` when
    the spread of the accumulated singular values exceeds the policy's
    condition cap; exact rank deficiency (nilpotency) is exempt.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    u0, s0, v0 = initial_factor(a.array, policy.extended)
    s0, k0 = _rescale(s0)
    base = (u0, s0, v0, k0)
    result = None
    factor = base
    m = n
    while True:
        if m & 1:
            result = factor if result is None else _multiply_factored(result, factor, policy)
        m >>= 1
        if not m:
            break
        factor = _multiply_factored(factor, factor, policy)
    u, s, v, k = result
    nilpotent = bool((s == 0).all())
    normalized = CMatrix((u * s) @ v.conj().T)
    return ScaledPower(
        base=a, n=n, normalized=normalized,
        log_scale=k * math.log(2.0),
        left=CMatrix(u), sigma=tuple(float(x) for x in s), right=CMatrix(v),
        scale_pow2=k, nilpotent=nilpotent, mode=policy.mode)


def power_root(a: CMatrix, n: int, policy: PrecisionPolicy = STANDARD) -> CMatrix:
    """The Hermitian n-th root ``|a^n|^(1/n)``.

    Assembled as ``V diag(sigma_i^(1/n)) V^*`` from the factored power,
    with the overall power-of-two scale folded into the root exponent.
    """
    sp = scaled_power(a, n, policy)
    logs = sp.log_singular_values()
    t = np.where(np.isfinite(logs), np.exp(np.where(np.isfinite(logs), logs, 0.0) / n), 0.0)
    v = sp.right.array
    h = (v * t) @ v.conj().T
    return CMatrix((h + h.conj().T) / 2)


def resolvent_norm(a: CMatrix, lam: complex) -> float:
    """``||(lam - a)^{-1}||``; inf when sigma_min is below the noise floor."""
    m = lam * np.eye(a.dim) - a.array
    smin = float(np.linalg.svd(m, compute_uv=False)[-1])
    floor = RESOLVENT_FLOOR * a.norm()
    if smin <= floor:
        return math.inf
    return 1.0 / smin


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid of cell centers, re fastest, im ascending by row."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def centers(self) -> np.ndarray:
        xs = np.linspace(self.re_min, self.re_max, self.nx)
        ys = np.linspace(self.im_min, self.im_max, self.ny)
        return xs[None, :] + 1j * ys[:, None]


def _smin_triangular(r: np.ndarray, z: complex, tol: float = 1e-6, max_iter: int = 60) -> float:
    """sigma_min(z - r) for triangular r via inverse iteration."""
    n = r.shape[0]
    m = z * np.eye(n) - r
    diag = np.abs(np.diag(m))
    if diag.min() == 0.0:
        return 0.0
    idx = np.arange(n)
    v = np.sin(idx + 1.0) + 1j * np.cos(2.0 * idx + 1.0)
    v /= np.linalg.norm(v)
    est = None
    for _ in range(max_iter):
        try:
            with np.errstate(over="raise", invalid="raise"):
                w = scipy.linalg.solve_triangular(m, v, lower=False, trans="C")
                x = scipy.linalg.solve_triangular(m, w, lower=False)
        except (FloatingPointError, np.linalg.LinAlgError):
            return 0.0
        nx = np.linalg.norm(x)
        if not np.isfinite(nx) or nx == 0.0:
            return 0.0
        new_est = 1.0 / math.sqrt(nx)
        v = x / nx
        if est is not None and abs(new_est - est) <= tol * est:
            return new_est
        est = new_est
    return est


def pseudospectrum_grid(a: CMatrix, eps: float, grid: GridSpec) -> np.ndarray:
    """Boolean grid: cell true iff sigma_min(center - a) <= eps.

    One Schur reduction up front, then a triangular inverse iteration
    per cell; cells are independent and the scan is deterministic.
    Shrinks monotonically as eps decreases on a fixed grid.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    form = schur(a)
    r = form.r.array
    zs = grid.centers()
    out = np.zeros(zs.shape, dtype=bool)
    for iy in range(zs.shape[0]):
        for ix in range(zs.shape[1]):
            out[iy, ix] = _smin_triangular(r, complex(zs[iy, ix])) <= eps
    return out


def expm(a: CMatrix) -> CMatrix:
    """Matrix exponential.

    Nilpotent inputs (all eigenvalues at numerical zero) use the exact
    finite series of order dim-1; everything else uses scaling and
    squaring with a Taylor series of order 16.
    """
    arr = a.array
    n = a.dim
    eigs = np.diag(arr) if _is_upper_triangular(arr) else np.linalg.eigvals(arr)
    scale = max(1.0, a.norm())
    if np.abs(eigs).max(initial=0.0) <= 1e-8 * scale:
        out = np.eye(n, dtype=complex)
        term = np.eye(n, dtype=complex)
        for k in range(1, n):
            term = term @ arr / k
            out = out + term
        return CMatrix(out)
    s = max(0, int(np.ceil(np.log2(max(a.norm(), 1e-300) / 0.25))))
    b = arr / (2.0 ** s)
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 17):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return CMatrix(out)
