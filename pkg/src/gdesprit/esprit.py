"""Subspace frequency estimation through shift invariance.

Three estimators share one idea: the column span of the top singular vectors
of a sum-indexed sample matrix is also spanned by the node-power columns, so
deleting rows on either end of every fiber and solving a least-squares
problem yields, per dimension p, a small matrix A_p whose eigenvalues are
the p-th node coordinates.

* :func:`esprit_1d` works on a plain sample vector.
* :func:`esprit_block` works on a d-dimensional sample tensor over a cube,
  using vectorized-index slab deletions, and diagonalizes A_1 directly.
* :func:`esprit_nd` works on arbitrary convex-fiber row grids.  All A_p are
  put into a single eigenbasis computed from a seeded random unit-modulus
  combination of them, which pairs the per-dimension coordinates row by row
  and survives repeated eigenvalues in any single A_p.

Frequencies are principal logarithms of the recovered nodes, so imaginary
parts lie in (-pi, pi]; integer sampling cannot tell frequencies apart that
differ by an integer multiple of 2*pi*i.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linalg_backend as lb
from .domains import IndexSet, DeletionMasks, deletion_masks
from .errors import (
    CapacityError,
    DomainError,
    ModelOrderError,
    NonFiniteError,
    PairingError,
)
from .hankel import DEFAULT_RANK_REL_TOL, build_hankel
from .signal import ExponentialModel, MdSequence, vandermonde

# Condition estimate of the coefficient system beyond which the recovered
# coefficients are flagged as unreliable.
COEFF_COND_LIMIT = 1e12

# Eigenvalues of the combined shift matrix closer than this fraction of the
# spectral radius trigger a redraw of the combination.
MULTIPLICITY_GAP_REL = 1e-8


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass
class EspritOptions:
    """Tuning knobs for the estimators.

    ``model_order`` fixes the number of recovered terms; ``None`` selects it
    from the singular value sequence with relative cutoff ``auto_rel_tol``.
    ``combo_seed`` seeds the random unit-modulus combination used to pair
    dimensions; up to ``combo_retries`` redraws are attempted when the
    combination has (numerically) repeated eigenvalues or the off-diagonal
    residual exceeds ``diag_residual_tol`` relative to the matrix norm.
    """

    model_order: int | None = None
    auto_rel_tol: float = DEFAULT_RANK_REL_TOL
    combo_seed: int = 0
    combo_retries: int = 8
    # Loose by design: noisy data legitimately produces large off-diagonal
    # mass, which is reported rather than treated as failure.
    diag_residual_tol: float = 0.9

    def __post_init__(self):
        if self.model_order is not None and self.model_order < 1:
            raise DomainError(f"model order must be at least 1, got {self.model_order}")
        if not 0 < self.auto_rel_tol < 1:
            raise DomainError(f"auto_rel_tol must lie in (0, 1), got {self.auto_rel_tol}")
        if not 0 < self.diag_residual_tol < 1:
            raise DomainError(
                f"diag_residual_tol must lie in (0, 1), got {self.diag_residual_tol}"
            )
        if self.combo_retries < 0:
            raise DomainError(f"combo_retries must be nonnegative, got {self.combo_retries}")


@dataclass(frozen=True)
class JointDiagonalization:
    """Result of pairing the shift matrices in one eigenbasis."""

    B: np.ndarray
    nodes: np.ndarray  # (K, d): row k holds the node coordinates of term k
    off_diag_norms: np.ndarray  # Frobenius norm of the off-diagonal part, per dimension
    alphas: np.ndarray  # unit-modulus combination weights that were accepted


@dataclass(frozen=True)
class EstimationReport:
    """Recovered model plus the diagnostics of the run."""

    model: ExponentialModel
    singular_values: np.ndarray
    pairing_residuals: np.ndarray
    combo_used: np.ndarray
    coeff_condition: float
    warnings: tuple[str, ...] = field(default=())


def auto_order(singular_values: np.ndarray, rel_tol: float) -> int:
    """Largest K with sigma_K >= rel_tol * sigma_1 (spectrum given descending)."""
    if not 0 < rel_tol < 1:
        raise DomainError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    s = np.asarray(singular_values, dtype=np.float64).ravel()
    if s.size == 0:
        raise DomainError("empty singular value sequence")
    if s[0] <= 0:
        return 0
    return int(np.count_nonzero(s >= rel_tol * s[0]))


def _principal_log(nodes: np.ndarray) -> np.ndarray:
    z = np.log(nodes)
    # keep the branch boundary on the +pi side
    return np.where(z.imag == -np.pi, z.conj(), z)


def _coefficients(f_values: np.ndarray, power_matrix: np.ndarray) -> tuple[np.ndarray, float]:
    coeffs, cond = lb.lstsq_minimum_norm(power_matrix, f_values)
    return coeffs, cond


def recover_coeffs(f: MdSequence, nodes: np.ndarray) -> np.ndarray:
    """Least-squares coefficients for known node vectors.

    Solves min over c of || V c - f || with V the node-power matrix on the
    sample domain.  A condition estimate above ``COEFF_COND_LIMIT`` raises a
    RuntimeWarning but still returns the minimum-norm solution.
    """
    lam = np.asarray(nodes, dtype=np.complex128)
    if lam.ndim == 1:
        lam = lam.reshape(-1, 1)
    if lam.shape[1] != f.domain.dim:
        raise DomainError(f"nodes have dimension {lam.shape[1]}, samples {f.domain.dim}")
    if lam.shape[0] > len(f.domain):
        raise DomainError(
            f"{lam.shape[0]} nodes but only {len(f.domain)} samples; system is underdetermined"
        )
    V = vandermonde(f.domain, np.log(lam))
    coeffs, cond = _coefficients(f.values, V)
    if cond > COEFF_COND_LIMIT:
        _warnings.warn(
            f"coefficient system condition {cond:.3e} exceeds {COEFF_COND_LIMIT:.0e}",
            RuntimeWarning,
            stacklevel=2,
        )
    return coeffs


def esprit_1d(samples: np.ndarray, model_order: int) -> np.ndarray:
    """Recover 1-d frequencies from consecutive samples.

    The samples are interpreted as f at 2N-1 (or 2N) consecutive integers;
    a near-square Hankel matrix with N = ceil((len+1)/2) rows is formed, the
    signal subspace is extracted, and the one-row shift is solved in the
    least-squares sense.  Returns ``model_order`` frequencies (complex,
    imaginary part in (-pi, pi]).
    """
    arr = np.asarray(samples, dtype=np.complex128).ravel()
    if arr.size < 3:
        raise DomainError(f"need at least 3 samples, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("samples must be finite")
    n_rows = (arr.size + 1) // 2
    if model_order < 1:
        raise DomainError(f"model order must be at least 1, got {model_order}")
    if model_order > n_rows - 1:
        raise CapacityError(
            f"model order {model_order} exceeds the shift capacity {n_rows - 1} "
            f"of a {n_rows}-row Hankel matrix",
            capacity=n_rows - 1,
            requested=model_order,
        )
    H = scipy.linalg.hankel(arr[:n_rows], arr[n_rows - 1 :])
    svd = lb.truncated_svd(H, model_order)
    s = svd.spectrum
    if s[model_order - 1] <= max(H.shape) * np.finfo(np.float64).eps * s[0]:
        raise ModelOrderError(
            f"sample matrix has numerical rank below {model_order}; "
            "fewer terms are present than requested"
        )
    U = svd.U
    A = lb.lstsq(U[:-1], U[1:])
    eigenvalues = lb.eig_full(A).eigenvalues
    return _readonly(_principal_log(eigenvalues))


def _shift_from_masks(U: np.ndarray, masks: DeletionMasks) -> np.ndarray:
    U = np.asarray(U, dtype=np.complex128)
    if len(masks.keep_minus) < U.shape[1]:
        raise CapacityError(
            f"subspace has {U.shape[1]} columns but only {len(masks.keep_minus)} rows "
            f"survive the deletion along dimension {masks.dimension_p}",
            capacity=len(masks.keep_minus),
            requested=U.shape[1],
        )
    rows_minus = U[np.asarray(masks.keep_minus)]
    rows_plus = U[np.asarray(masks.keep_plus)]
    return lb.lstsq(rows_minus, rows_plus)


def shift_matrix(U: np.ndarray, xi: IndexSet, p: int) -> np.ndarray:
    """Shift matrix A_p of the subspace U along dimension p (1-based).

    U must have one row per point of ``xi`` in canonical order.  The result
    satisfies U_minus @ A_p = U_plus in the least-squares sense, where the
    two row selections drop the last (respectively first) member of every
    fiber along dimension p.
    """
    U = np.asarray(U, dtype=np.complex128)
    if U.shape[0] != len(xi):
        raise DomainError(f"U has {U.shape[0]} rows, expected {len(xi)}")
    return _readonly(_shift_from_masks(U, deletion_masks(xi, p)))


def _similar_diagonal(B: np.ndarray, A: np.ndarray) -> np.ndarray:
    # B A B^{-1} without forming the inverse
    return np.linalg.solve(B.T, (B @ A).T).T


def _off_diag_norm(D: np.ndarray) -> float:
    off = D - np.diag(np.diag(D))
    return float(np.linalg.norm(off))


def joint_eig(shift_matrices: list[np.ndarray], options: EspritOptions | None = None) -> JointDiagonalization:
    """Pair the per-dimension shift matrices through one eigenbasis.

    A seeded random unit-modulus combination M = sum_p alpha_p A_p is
    diagonalized; its eigenbasis is applied to every A_p and the diagonals
    are read off, so row k collects the coordinates of one term across all
    dimensions.  The combination is redrawn when M has numerically repeated
    eigenvalues or when some off-diagonal residual exceeds the tolerance;
    persistent failure raises :class:`PairingError` with the residuals.
    """
    opts = options or EspritOptions()
    mats = [np.asarray(A, dtype=np.complex128) for A in shift_matrices]
    if not mats:
        raise DomainError("need at least one shift matrix")
    K = mats[0].shape[0]
    for A in mats:
        if A.ndim != 2 or A.shape != (K, K):
            raise DomainError(f"shift matrices must all be {K}x{K}, got {A.shape}")
    d = len(mats)
    norms = [np.linalg.norm(A) for A in mats]
    rng = np.random.default_rng(opts.combo_seed)
    attempts = opts.combo_retries + 1
    last_residuals = None
    multiplicity_only = True
    for _ in range(attempts):
        alphas = np.exp(2j * np.pi * rng.random(d))
        M = sum(a * A for a, A in zip(alphas, mats))
        eig = lb.eig_full(M)
        mu = eig.eigenvalues
        if K > 1:
            gaps = np.abs(mu[:, None] - mu[None, :])
            np.fill_diagonal(gaps, np.inf)
            if gaps.min() < MULTIPLICITY_GAP_REL * np.abs(mu).max():
                continue
        B = eig.eigvecs_inv
        diagonals = []
        residuals = np.empty(d)
        for p, A in enumerate(mats):
            D = _similar_diagonal(B, A)
            residuals[p] = _off_diag_norm(D)
            diagonals.append(np.diag(D))
        multiplicity_only = False
        last_residuals = residuals
        if all(residuals[p] <= opts.diag_residual_tol * norms[p] for p in range(d)):
            nodes = np.stack(diagonals, axis=1)
            return JointDiagonalization(
                B=_readonly(B),
                nodes=_readonly(nodes),
                off_diag_norms=_readonly(residuals),
                alphas=_readonly(alphas),
            )
    if multiplicity_only:
        raise PairingError(
            f"every combination drawn in {attempts} attempts had numerically repeated "
            "eigenvalues; the terms cannot be separated",
            attempts=attempts,
        )
    raise PairingError(
        "off-diagonal residuals "
        + np.array2string(last_residuals, precision=3)
        + f" still exceed the tolerance after {attempts} attempts; "
        "the shift matrices do not share an eigenbasis",
        residuals=last_residuals,
        attempts=attempts,
    )


def esprit_nd(
    f: MdSequence,
    xi: IndexSet,
    upsilon: IndexSet,
    options: EspritOptions | None = None,
) -> EstimationReport:
    """General-domain frequency estimation.

    ``xi`` (row grid) must have convex fibers; ``f`` must cover every sum
    x + y of a row point and a column point.  The model order comes from
    ``options`` (fixed, or selected from the singular value sequence) and is
    checked against the grid capacity before any subspace work.
    """
    opts = options or EspritOptions()
    d = f.domain.dim
    if xi.dim != d or upsilon.dim != d:
        raise DomainError(
            f"dimension mismatch: samples {d}, rows {xi.dim}, columns {upsilon.dim}"
        )
    if not np.all(np.isfinite(f.values)):
        raise NonFiniteError("samples must be finite")
    masks = [deletion_masks(xi, p) for p in range(1, d + 1)]
    cap = min(len(m.keep_minus) for m in masks)
    if opts.model_order is not None and opts.model_order > cap:
        raise CapacityError(
            f"model order {opts.model_order} exceeds the capacity {cap} of the row grid "
            "(minimum over dimensions of point count minus fiber count; "
            "N^(d-1)*(N-1) for an N-cube)",
            capacity=cap,
            requested=opts.model_order,
        )
    H = build_hankel(f, xi, upsilon)
    svd = lb.truncated_svd(H.matrix, min(H.shape))
    K = opts.model_order if opts.model_order is not None else auto_order(svd.spectrum, opts.auto_rel_tol)
    if K < 1:
        raise ModelOrderError("selected model order is zero; nothing to recover")
    if K > cap:
        raise CapacityError(
            f"model order {K} exceeds the capacity {cap} of the row grid "
            "(minimum over dimensions of point count minus fiber count; "
            "N^(d-1)*(N-1) for an N-cube)",
            capacity=cap,
            requested=K,
        )
    if K > len(upsilon):
        raise CapacityError(
            f"model order {K} exceeds the {len(upsilon)} points of the column grid",
            capacity=len(upsilon),
            requested=K,
        )
    U = svd.U[:, :K]
    shifts = [_shift_from_masks(U, m) for m in masks]
    jd = joint_eig(shifts, opts)
    zetas = _principal_log(jd.nodes)
    V = vandermonde(f.domain, zetas)
    coeffs, cond = _coefficients(f.values, V)
    if np.any(coeffs == 0):
        raise ModelOrderError(
            f"least squares dropped a term entirely (model order {K} exceeds the "
            "numerical rank of the data); lower the order or use automatic selection"
        )
    warn: tuple[str, ...] = ()
    if cond > COEFF_COND_LIMIT:
        warn = (
            f"coefficient system condition {cond:.3e} exceeds {COEFF_COND_LIMIT:.0e}; "
            "coefficients may be unreliable",
        )
    model = ExponentialModel(dim=d, zetas=zetas, coeffs=coeffs)
    return EstimationReport(
        model=model,
        singular_values=svd.spectrum,
        pairing_residuals=jd.off_diag_norms,
        combo_used=jd.alphas,
        coeff_condition=cond,
        warnings=warn,
    )


def esprit_block(samples: np.ndarray, options: EspritOptions | None = None) -> EstimationReport:
    """Cube-grid frequency estimation on a d-dimensional sample tensor.

    ``samples`` must be a tensor of odd side 2N-1 in every dimension, holding
    f on consecutive integers (axis p is coordinate p).  The block matrix is
    indexed by the vectorization m1 + m2*N + ... of the N-cube; subspace rows
    are deleted as whole slabs.  Kept close to the classical cube form: the
    eigenbasis comes from diagonalizing A_1 directly, so this path assumes the
    first-coordinate node values are pairwise distinct.
    """
    opts = options or EspritOptions()
    arr = np.asarray(samples, dtype=np.complex128)
    d = arr.ndim
    if d < 1 or arr.size == 0:
        raise DomainError("samples must be a nonempty tensor")
    side = arr.shape[0]
    if any(s != side for s in arr.shape):
        raise DomainError(f"sample tensor must be a cube, got shape {arr.shape}")
    if side < 3 or side % 2 == 0:
        raise DomainError(f"cube side must be odd and at least 3, got {side}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("samples must be finite")
    N = (side + 1) // 2
    cap = (N - 1) * N ** (d - 1)

    coords = np.indices((N,) * d).reshape(d, -1, order="F").T
    row_sums = tuple(coords[:, None, p] + coords[None, :, p] for p in range(d))
    H = arr[row_sums]
    svd = lb.truncated_svd(H, min(H.shape))
    K = opts.model_order if opts.model_order is not None else auto_order(svd.spectrum, opts.auto_rel_tol)
    if K < 1:
        raise ModelOrderError("selected model order is zero; nothing to recover")
    if K > cap:
        raise CapacityError(
            f"model order {K} exceeds the cube capacity {cap} = (N-1)*N^(d-1) with N={N}",
            capacity=cap,
            requested=K,
        )
    U = svd.U[:, :K]
    U_tensor = U.reshape((N,) * d + (K,), order="F")
    shifts = []
    for p in range(d):
        minus = np.take(U_tensor, np.arange(N - 1), axis=p).reshape(-1, K, order="F")
        plus = np.take(U_tensor, np.arange(1, N), axis=p).reshape(-1, K, order="F")
        shifts.append(lb.lstsq(minus, plus))

    eig = lb.eig_full(shifts[0])
    B = eig.eigvecs_inv
    diagonals = []
    residuals = np.empty(d)
    for p, A in enumerate(shifts):
        D = _similar_diagonal(B, A)
        residuals[p] = _off_diag_norm(D)
        diagonals.append(np.diag(D))
    nodes = np.stack(diagonals, axis=1)
    zetas = _principal_log(nodes)

    omega_coords = np.indices((side,) * d).reshape(d, -1, order="F").T
    V = np.exp(omega_coords @ zetas.T)
    coeffs, cond = _coefficients(arr.ravel(order="F"), V)
    warn: tuple[str, ...] = ()
    if cond > COEFF_COND_LIMIT:
        warn = (
            f"coefficient system condition {cond:.3e} exceeds {COEFF_COND_LIMIT:.0e}; "
            "coefficients may be unreliable",
        )
    combo = np.zeros(d, dtype=np.complex128)
    combo[0] = 1.0
    model = ExponentialModel(dim=d, zetas=zetas, coeffs=coeffs)
    return EstimationReport(
        model=model,
        singular_values=svd.spectrum,
        pairing_residuals=_readonly(residuals),
        combo_used=_readonly(combo),
        coeff_condition=cond,
        warnings=warn,
    )
