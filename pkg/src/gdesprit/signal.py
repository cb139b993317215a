"""Exponential-sum models and sampled sequences on lattice domains."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .domains import IndexSet
from .errors import DomainError, GenerationError, NonFiniteError

# Node vectors closer than this (max over dimensions, in node space) count as
# colliding during random generation.
NODE_COLLISION_TOL = 1e-6

_LAYOUTS = ("uniform_imag", "spiral", "random_complex")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ExponentialModel:
    """Finite sum of d-variate exponentials.

    Parameters
    ----------
    dim:
        Number of lattice dimensions d.
    zetas:
        Complex array of shape (K, d); row k holds the frequency vector of
        term k.  The node vector of term k is exp(zetas[k]) elementwise.
    coeffs:
        Complex array of shape (K,) with nonzero entries.
    """

    dim: int
    zetas: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dimension must be at least 1, got {self.dim}")
        z = np.asarray(self.zetas, dtype=np.complex128)
        if z.ndim == 1:
            z = z.reshape(-1, 1)
        if z.ndim != 2 or z.shape[1] != self.dim or z.shape[0] < 1:
            raise DomainError(f"zetas must have shape (K, {self.dim}), got {z.shape}")
        c = np.asarray(self.coeffs, dtype=np.complex128).ravel()
        if c.shape[0] != z.shape[0]:
            raise DomainError(f"{z.shape[0]} frequency rows but {c.shape[0]} coefficients")
        if np.any(c == 0):
            raise DomainError("coefficients must be nonzero")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(c))):
            raise NonFiniteError("model parameters must be finite")
        lam = np.exp(z)
        same = np.all(lam[:, None, :] == lam[None, :, :], axis=2)
        same &= ~np.eye(z.shape[0], dtype=bool)
        if same.any():
            i, j = np.argwhere(same)[0]
            raise DomainError(f"terms {i} and {j} share the same node vector")
        object.__setattr__(self, "zetas", _readonly(z))
        object.__setattr__(self, "coeffs", _readonly(c))

    @property
    def order(self) -> int:
        return self.zetas.shape[0]

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node vectors exp(zeta), shape (K, d)."""
        return _readonly(np.exp(self.zetas))


@dataclass(frozen=True)
class MdSequence:
    """Complex samples aligned with the canonical order of a domain."""

    domain: IndexSet
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128).ravel()
        if v.shape[0] != len(self.domain):
            raise DomainError(
                f"{v.shape[0]} values for a domain of {len(self.domain)} points"
            )
        object.__setattr__(self, "values", _readonly(v))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def restrict(self, sub: IndexSet) -> "MdSequence":
        """Samples restricted to ``sub``, which must lie inside the domain."""
        if sub.dim != self.domain.dim:
            raise DomainError(f"dimension mismatch: {sub.dim} vs {self.domain.dim}")
        pos = self.domain.position
        try:
            idx = [pos[p] for p in sub.points]
        except KeyError as exc:
            raise DomainError(f"point {exc.args[0]} is not in the sampled domain") from exc
        return MdSequence(sub, self.values[idx])


def vandermonde(domain: IndexSet, zetas: np.ndarray) -> np.ndarray:
    """Matrix of node powers exp(<j, zeta_k>) over the domain's canonical order.

    Shape (len(domain), K).  Column k evaluates term k at every lattice point,
    which for integer points equals the multi-index power of the node vector.
    """
    z = np.asarray(zetas, dtype=np.complex128)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    return np.exp(domain.as_array @ z.T)


def eval_model(model: ExponentialModel, omega: IndexSet) -> MdSequence:
    """Evaluate the model on every point of ``omega``."""
    if omega.dim != model.dim:
        raise DomainError(f"dimension mismatch: domain {omega.dim}, model {model.dim}")
    with np.errstate(over="ignore", invalid="ignore"):
        values = vandermonde(omega, model.zetas) @ model.coeffs
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(
            "model evaluation overflowed; damping is too strong for this domain"
        )
    return MdSequence(omega, values)


def add_noise(f: MdSequence, ratio: float, rng: np.random.Generator) -> MdSequence:
    """Additive complex Gaussian noise scaled to an exact energy ratio.

    The returned sequence is f + e with ||e||_2 / ||f||_2 equal to ``ratio``
    up to a few ulp.  ``ratio=0`` returns an identical copy.
    """
    if ratio < 0:
        raise DomainError(f"noise ratio must be nonnegative, got {ratio}")
    if ratio == 0:
        return MdSequence(f.domain, f.values)
    signal_norm = np.linalg.norm(f.values)
    if signal_norm == 0:
        raise DomainError("cannot scale noise relative to an all-zero signal")
    n = len(f.domain)
    e = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    e *= ratio * signal_norm / np.linalg.norm(e)
    return MdSequence(f.domain, f.values + e)


def _min_node_gap(nodes: np.ndarray) -> float:
    # max-over-dimensions distance, minimized over pairs
    diff = np.abs(nodes[:, None, :] - nodes[None, :, :]).max(axis=2)
    np.fill_diagonal(diff, np.inf)
    return float(diff.min()) if nodes.shape[0] > 1 else np.inf


def _colliding(nodes: np.ndarray) -> np.ndarray:
    diff = np.abs(nodes[:, None, :] - nodes[None, :, :]).max(axis=2)
    np.fill_diagonal(diff, np.inf)
    return np.unique(np.argwhere(diff < NODE_COLLISION_TOL)[:, 0])


def random_model(
    K: int,
    d: int,
    rng: np.random.Generator,
    layout: str = "uniform_imag",
    damping_bound: float = 0.0,
    max_retries: int = 100,
) -> ExponentialModel:
    """Draw a random model with pairwise well-separated node vectors.

    Layouts:

    * ``uniform_imag``: purely oscillatory, each frequency coordinate i*theta
      with theta uniform on (-pi, pi).
    * ``spiral`` (d=2 only): deterministic frequencies i*(r_k cos(phi_k),
      r_k sin(phi_k)) with phi_k = 4*pi*k/K and r_k = pi*k/K, k = 1..K.
    * ``random_complex``: real part uniform in [-damping_bound, damping_bound],
      imaginary part uniform on (-pi, pi).

    Coefficients have modulus uniform in [0.5, 1.5] and uniform phase.
    Colliding node vectors (closer than ``NODE_COLLISION_TOL``) are redrawn;
    bounded retries, then :class:`GenerationError`.
    """
    if K < 1:
        raise DomainError(f"model order must be at least 1, got {K}")
    if d < 1:
        raise DomainError(f"dimension must be at least 1, got {d}")
    if layout not in _LAYOUTS:
        raise DomainError(f"unknown layout {layout!r}; expected one of {_LAYOUTS}")
    if layout == "spiral":
        if d != 2:
            raise DomainError("the spiral layout is only defined for d=2")
        k = np.arange(1, K + 1)
        r = np.pi * k / K
        phi = 4 * np.pi * k / K
        zetas = 1j * np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
        if _min_node_gap(np.exp(zetas)) < NODE_COLLISION_TOL:
            raise GenerationError(f"spiral layout with K={K} produces colliding nodes")
    else:
        def draw(count: int) -> np.ndarray:
            imag = 1j * rng.uniform(-np.pi, np.pi, size=(count, d))
            if layout == "uniform_imag":
                return imag
            return rng.uniform(-damping_bound, damping_bound, size=(count, d)) + imag

        zetas = draw(K)
        for _ in range(max_retries):
            bad = _colliding(np.exp(zetas))
            if bad.size == 0:
                break
            zetas[bad] = draw(bad.size)
        else:
            raise GenerationError(
                f"could not draw {K} separated node vectors in {max_retries} retries"
            )
    coeffs = rng.uniform(0.5, 1.5, size=K) * np.exp(2j * np.pi * rng.uniform(size=K))
    return ExponentialModel(dim=d, zetas=zetas, coeffs=coeffs)
