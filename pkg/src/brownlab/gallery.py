"""Constructions: Jordan sums, Toeplitz truncations of circle symbols,
the disk-to-thin-rectangle conformal map and its nilpotent Toeplitz
family, exp(iQ), and a random strictly-upper-triangular Gaussian model.

The conformal map sends the unit disk onto the rectangle with
half-width 1 and half-height 1/n, fixing 0.  Its derivative is
``C (1 - 2 cos(2 alpha) t^2 + t^4)^(-1/2)`` with prevertices at
``+-exp(+-i alpha)``; the prevertex angle solves the aspect-ratio
parameter problem.  Taylor coefficients come from the linear recurrence
the derivative satisfies, so arbitrary truncation orders cost O(order).

The Toeplitz truncation of a holomorphic symbol is strictly upper
triangular, hence nilpotent; block sizes are selected as the smallest
truncation whose norm and real-part norm reach a (1 - eta) fraction of
their limits.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.optimize
import scipy.sparse.linalg as spla

from .matrix import CMatrix, save_matrix, load_matrix
from .numerics import expm

__all__ = [
    "OperatorFamily", "SymbolCoefficients", "RectangleMapParams",
    "MapValidationError", "BlockSelectionError",
    "jordan_block", "jordan_sum", "toeplitz", "toeplitz_norm_profile",
    "rectangle_map", "thin_spectrum_block", "thin_spectrum_family",
    "exp_iq", "dt_model", "power_norm_lower_bound",
    "save_family", "load_family",
]

SUP_SAMPLES = 4096
BOUNDARY_SAMPLES = 256
DENSE_NORM_LIMIT = 700


class MapValidationError(RuntimeError):
    """Conformal-map validation exceeded the requested tolerance."""


class BlockSelectionError(RuntimeError):
    """No truncation size within the cap reaches the norm thresholds."""


@dataclass(frozen=True)
class SymbolCoefficients:
    """Fourier coefficients a_k on a finite support window.

    Holomorphic symbols have a_k = 0 for k <= 0.
    """

    coeffs: dict = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs",
                           {int(k): complex(v) for k, v in self.coeffs.items() if v != 0})

    @property
    def window(self):
        ks = self.coeffs.keys()
        return (min(ks), max(ks)) if ks else (0, 0)

    def __getitem__(self, k: int) -> complex:
        return self.coeffs.get(int(k), 0j)

    def is_holomorphic(self) -> bool:
        return all(k > 0 for k in self.coeffs)

    def sample(self, thetas: np.ndarray) -> np.ndarray:
        """Symbol values sum_k a_k e^{i k theta} at the given angles."""
        z = np.exp(1j * np.asarray(thetas, dtype=float))
        out = np.zeros_like(z)
        ks = np.array(sorted(self.coeffs))
        vals = np.array([self.coeffs[k] for k in ks])
        # Horner over the (possibly long) coefficient vector, chunked for memory
        chunk = 1 << 14
        for lo in range(0, len(ks), chunk):
            kk = ks[lo:lo + chunk]
            out += (vals[lo:lo + chunk][None, :] * z[:, None] ** kk[None, :]).sum(axis=1)
        return out

    def sup_norm(self, samples: int = SUP_SAMPLES, extra_angles=()) -> float:
        """Sampled sup of |f| over the circle (midpoint grid plus extras)."""
        th = (np.arange(samples) + 0.5) / samples * 2 * np.pi
        if len(extra_angles):
            th = np.concatenate([th, np.asarray(extra_angles, dtype=float)])
        return float(np.abs(self.sample(th)).max())

    def real_part(self) -> "SymbolCoefficients":
        out = {}
        ks = set(self.coeffs) | {-k for k in self.coeffs}
        for k in ks:
            out[k] = (self[k] + self[-k].conjugate()) / 2
        return SymbolCoefficients(out)

    def imag_part(self) -> "SymbolCoefficients":
        out = {}
        ks = set(self.coeffs) | {-k for k in self.coeffs}
        for k in ks:
            out[k] = (self[k] - self[-k].conjugate()) / (2j)
        return SymbolCoefficients(out)


@dataclass(frozen=True)
class OperatorFamily:
    """Indexed finite blocks modeling a direct sum; block n has size k(n)."""

    blocks: tuple
    description: str = ""
    records: tuple = ()

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("family needs at least one block")

    @property
    def total_dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    @property
    def weights(self):
        total = self.total_dim
        return tuple(Fraction(b.dim, total) for b in self.blocks)

    def assembled(self) -> CMatrix:
        return CMatrix(scipy.linalg.block_diag(*[b.array for b in self.blocks]))


def jordan_block(n: int) -> CMatrix:
    if n < 1:
        raise ValueError("n must be >= 1")
    return CMatrix(np.eye(n, k=1, dtype=complex))


def jordan_sum(count: int) -> OperatorFamily:
    """Blocks J_1, ..., J_count."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return OperatorFamily(blocks=tuple(jordan_block(n) for n in range(1, count + 1)),
                          description=f"direct sum of Jordan blocks 1..{count}")


def toeplitz(c: SymbolCoefficients, k: int) -> CMatrix:
    """(k+1) x (k+1) truncation with entry (r, col) = a_{col - r}."""
    if k < 0:
        raise ValueError("k must be >= 0")
    first_col = np.array([c[-j] for j in range(k + 1)])
    first_row = np.array([c[j] for j in range(k + 1)])
    return CMatrix(scipy.linalg.toeplitz(first_col, first_row))


def _opnorm(arr: np.ndarray) -> float:
    if arr.shape[0] <= DENSE_NORM_LIMIT:
        return float(np.linalg.norm(arr, 2))
    v0 = np.ones(arr.shape[0]) / math.sqrt(arr.shape[0])
    s = spla.svds(arr, k=1, return_singular_vectors=False, v0=v0, tol=1e-10, maxiter=5000)
    return float(s[0])


def _hermitian_norm(arr: np.ndarray) -> float:
    if arr.shape[0] <= DENSE_NORM_LIMIT:
        w = np.linalg.eigvalsh(arr)
        return float(max(abs(w[0]), abs(w[-1])))
    v0 = np.ones(arr.shape[0]) / math.sqrt(arr.shape[0])
    hi = spla.eigsh(arr, k=1, which="LA", return_eigenvectors=False, v0=v0, tol=1e-10)[0]
    lo = spla.eigsh(arr, k=1, which="SA", return_eigenvectors=False, v0=v0, tol=1e-10)[0]
    return float(max(abs(hi), abs(lo)))


def toeplitz_norm_profile(c: SymbolCoefficients, k_max: int):
    """Norms ||T_k|| for k = 0..k_max; nondecreasing, bounded by the symbol sup.

    Raises ArithmeticError if the computed profile violates monotonicity
    beyond 1e-12 or exceeds the sampled sup-norm by more than 1e-6.
    """
    sup = c.sup_norm()
    profile = []
    for k in range(k_max + 1):
        profile.append(_opnorm(toeplitz(c, k).array))
    for a, b in zip(profile, profile[1:]):
        if b < a - 1e-12:
            raise ArithmeticError(f"norm profile decreased: {a} -> {b}")
    for v in profile:
        if v > sup + 1e-6:
            raise ArithmeticError(f"norm {v} exceeds sampled symbol sup {sup}")
    return profile


# -- the disk -> rectangle map ---------------------------------------------


def _axis_integrals(alpha: float):
    """Half-width and half-height integrals of the unnormalized map."""
    c = math.cos(2 * alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
        w = scipy.integrate.quad(lambda t: (1 - 2 * c * t * t + t ** 4) ** -0.5,
                                 0, 1, limit=400)[0]
        h = scipy.integrate.quad(lambda s: (1 + 2 * c * s * s + s ** 4) ** -0.5,
                                 0, 1, limit=400)[0]
    return w, h


def _solve_prevertex_angle(aspect: float) -> float:
    def mismatch(a):
        w, h = _axis_integrals(a)
        return w / h - aspect
    return scipy.optimize.brentq(mismatch, 1e-10, math.pi / 2 - 1e-8, xtol=5e-16)


def _derivative_series(c: float, terms: int) -> np.ndarray:
    """gamma_j with (1 - 2c t^2 + t^4)^(-1/2) = sum_j gamma_j t^(2j).

    From 2 u g' = -u' g; the recurrence is neutrally stable (the
    characteristic roots are unimodular), so roundoff grows at most
    polynomially in the truncation order.
    """
    g = np.zeros(terms)
    g[0] = 1.0
    if terms > 1:
        g[1] = c
    for j in range(1, terms - 1):
        g[j + 1] = (c * (2 * j + 1) * g[j] - j * g[j - 1]) / (j + 1)
    return g


@dataclass(frozen=True)
class RectangleMapParams:
    """Solved parameters of the disk -> rectangle map.

    aspect n gives half-width 1 and half-height 1/n; scale is real and
    positive for this normalization.  boundary_error is the recorded
    one-sided Hausdorff distance of sampled boundary images to the
    target rectangle boundary; sup estimates are sampled sup-norms of
    the truncated series (corner arcs included in the sample set).
    """

    n: int
    prevertex_angle: float
    scale: float
    order: int
    boundary_error: float
    re_sup_estimate: float
    im_sup_estimate: float

    def __post_init__(self):
        if not 0 < self.prevertex_angle < math.pi / 2:
            raise ValueError("prevertex angle out of range")


def _rectangle_boundary_distance(pts: np.ndarray, half_height: float) -> np.ndarray:
    x = pts.real
    y = np.abs(pts.imag)
    ax = np.abs(x)
    inside = (ax <= 1.0) & (y <= half_height)
    d_in = np.minimum(1.0 - ax, half_height - y)
    d_out = np.hypot(np.maximum(ax - 1.0, 0.0), np.maximum(y - half_height, 0.0))
    return np.where(inside, d_in, d_out)


def rectangle_map(n: int, order: int, map_tol: float = 1e-3):
    """Conformal disk -> rectangle map as a truncated Taylor symbol.

    Returns (RectangleMapParams, SymbolCoefficients) with real
    coefficients a_k vanishing for k <= 0 and for even k.  Validation
    samples 256 boundary images of the truncated series against the
    rectangle boundary and raises MapValidationError beyond map_tol.
    For fidelity requests (map_tol <= 0.01) the sampled sup-norms of
    the real and imaginary parts must also match 1 and 1/n within 1%;
    construction-grade truncations (looser map_tol) only record them.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if order < 8:
        raise ValueError("order must be >= 8")
    alpha = _solve_prevertex_angle(float(n))
    w, h = _axis_integrals(alpha)
    scale = 1.0 / w
    terms = (order - 1) // 2 + 1
    gam = _derivative_series(math.cos(2 * alpha), terms)
    coeffs = {}
    for j in range(terms):
        k = 2 * j + 1
        if k <= order:
            coeffs[k] = scale * gam[j] / k
    sym = SymbolCoefficients(coeffs)

    th = (np.arange(BOUNDARY_SAMPLES) + 0.5) / BOUNDARY_SAMPLES * 2 * np.pi
    vals = sym.sample(th)
    berr = float(_rectangle_boundary_distance(vals, 1.0 / n).max())

    corner_arcs = np.concatenate([base + np.linspace(-alpha, alpha, 33)
                                  for base in (0.0, math.pi)])
    dense = sym.sample(np.concatenate([
        (np.arange(SUP_SAMPLES) + 0.5) / SUP_SAMPLES * 2 * np.pi, corner_arcs]))
    re_sup = float(np.abs(dense.real).max())
    im_sup = float(np.abs(dense.imag).max())

    params = RectangleMapParams(n=n, prevertex_angle=alpha, scale=scale, order=order,
                                boundary_error=berr, re_sup_estimate=re_sup,
                                im_sup_estimate=im_sup)
    if berr > map_tol:
        raise MapValidationError(
            f"boundary Hausdorff error {berr:.2e} exceeds map_tol {map_tol:.2e} "
            f"at order {order}")
    if map_tol <= 0.01:
        if abs(re_sup - 1.0) > 0.01:
            raise MapValidationError(
                f"real-part sup estimate {re_sup:.4f} not within 1% of 1")
        if abs(im_sup - 1.0 / n) > 0.01 / n:
            raise MapValidationError(
                f"imag-part sup estimate {im_sup:.4f} not within 1% of 1/{n}")
    return params, sym


def _meets_thresholds(sym: SymbolCoefficients, k: int, eta: float, sup: float) -> bool:
    t = toeplitz(sym, k).array
    if _opnorm(t) < (1 - eta) * sup:
        return False
    re_norm = _hermitian_norm((t + t.conj().T) / 2)
    return re_norm >= (1 - eta)


def _select_block_size(sym: SymbolCoefficients, eta: float, k_cap: int) -> int:
    """Smallest k with ||T_k|| >= (1-eta) sup|f| and ||Re T_k|| >= 1-eta.

    Both norm profiles are nondecreasing in k, so the minimum is found
    by bisection after an exponential probe.
    """
    sup = sym.sup_norm()
    hi = 1
    while hi <= k_cap and not _meets_thresholds(sym, hi, eta, sup):
        hi *= 2
    if hi > k_cap:
        if not _meets_thresholds(sym, k_cap, eta, sup):
            raise BlockSelectionError(
                f"k_cap={k_cap} insufficient for eta={eta}")
        hi = k_cap
    lo = hi // 2
    while lo < hi - 1:
        mid = (lo + hi) // 2
        if _meets_thresholds(sym, mid, eta, sup):
            hi = mid
        else:
            lo = mid
    if hi == 1 and _meets_thresholds(sym, 0, eta, sup):
        return 0
    return hi


def thin_spectrum_block(n: int, eta: float = 0.1, k_cap: int = 256) -> CMatrix:
    """Smallest admissible Toeplitz truncation of the aspect-n rectangle symbol.

    Strictly upper triangular (the symbol is holomorphic and vanishes
    at 0), hence nilpotent.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must be in (0, 1)")
    _, sym = rectangle_map(n, order=max(k_cap + 1, 9), map_tol=0.05)
    k = _select_block_size(sym, eta, k_cap)
    return toeplitz(sym, k)


def thin_spectrum_family(n_max: int, eta: float = 0.1, k_cap: int = 256) -> OperatorFamily:
    """Blocks for aspects 1..n_max with per-block norm records."""
    blocks = []
    records = []
    for n in range(1, n_max + 1):
        block = thin_spectrum_block(n, eta, k_cap)
        arr = block.array
        a_norm = _hermitian_norm((arr + arr.conj().T) / 2)
        b_norm = _hermitian_norm((arr - arr.conj().T) / 2j)
        blocks.append(block)
        records.append({"n": n, "k": block.dim - 1, "re_norm": a_norm,
                        "im_norm": b_norm, "eta": eta})
    return OperatorFamily(blocks=tuple(blocks),
                          description=f"thin-rectangle Toeplitz family to aspect {n_max}",
                          records=tuple(records))


def power_norm_lower_bound(family: OperatorFamily, m: int):
    """Per-block lower bounds ||A^m|| - sum_k C(m,k) ||A||^(m-k) ||B||^k.

    A and B are the Hermitian and skew parts of each block; the bound
    is positive once the block is thin enough relative to m.
    """
    out = []
    for rec in family.records:
        a, b = rec["re_norm"], rec["im_norm"]
        cross = sum(math.comb(m, k) * a ** (m - k) * b ** k for k in range(1, m + 1))
        out.append(a ** m - cross)
    return out


def exp_iq(q: CMatrix):
    """exp(iQ) for nilpotent Q, returned with its correction S = exp(iQ) - 1.

    The exponential series terminates exactly; the correction is
    checked to be nilpotent.
    """
    from .asymptotics import _require_nilpotent
    _require_nilpotent(q)
    e = expm(CMatrix(1j * q.array))
    s = CMatrix(e.array - np.eye(q.dim))
    _require_nilpotent(s)
    return e, s


def dt_model(n: int, seed: int) -> CMatrix:
    """Strictly upper triangular iid complex Gaussian model, variance 1/n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    real = rng.standard_normal((n, n))
    imag = rng.standard_normal((n, n))
    g = (real + 1j * imag) / math.sqrt(2 * n)
    return CMatrix(np.triu(g, 1))


def save_family(family: OperatorFamily, directory) -> None:
    """Block matrix files plus a JSON index with the norm metadata."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, block in enumerate(family.blocks):
        name = f"block_{i:03d}.json"
        save_matrix(block, directory / name)
        rec = dict(family.records[i]) if i < len(family.records) else {}
        rec["file"] = name
        rec["dim"] = block.dim
        entries.append(rec)
    index = {"description": family.description, "blocks": entries}
    with open(directory / "family.json", "w") as fh:
        json.dump(index, fh, indent=1)
        fh.write("\n")


def load_family(directory) -> OperatorFamily:
    directory = Path(directory)
    with open(directory / "family.json") as fh:
        index = json.load(fh)
    blocks = []
    records = []
    for rec in index["blocks"]:
        blocks.append(load_matrix(directory / rec["file"]))
        records.append({k: v for k, v in rec.items() if k not in ("file", "dim")})
    return OperatorFamily(blocks=tuple(blocks), description=index["description"],
                          records=tuple(records))
