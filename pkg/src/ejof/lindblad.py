"""Lindbladian assembly, spectral tools, and the DFS block structure.

The generator of a Markovian master equation is

    L(rho) = -i [H, rho] + sum_l ( F_l rho F_l† - (1/2){F_l† F_l, rho} ).

A decoherence-free subspace (DFS) with projector P is supported here through a
structural normal form: H = Q H Q lives on the decaying block and every jump
maps the decaying block into the DFS, F_l = P F_l Q. Under that form the DFS is
exactly steady and, when the decaying dynamics is relaxing, the zero eigenvalue
of L has multiplicity exactly d^2 (the DFS block of density matrices).

Two objects drive all perturbative computations downstream:

* the non-Hermitian Hamiltonian K = H - (i/2) sum_l F_l† F_l, which is
  supported on the decaying block for structured generators, and
* the Drazin pseudoinverse of L, an inverse on the complement of the steady
  subspace, built here from an ordered complex Schur decomposition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import expm, schur, solve_triangular

from .operators import (
    DEFAULT_TOL,
    Corners,
    DfsProjector,
    as_operator,
    commutator_superop,
    corner_superops,
    dagger,
    devectorize,
    dissipator,
    four_corners,
    frob,
    require_hermitian,
    sandwich_superop,
    vectorize,
)

# Relative threshold separating the zero cluster of a superoperator spectrum.
ZERO_CLUSTER_FACTOR = 1e-8
# Warn when the smallest retained eigenvalue is within this factor of the cut.
GAP_WARNING_FACTOR = 100.0


class SpectralGapWarning(UserWarning):
    """Separation between zero and nonzero spectrum is close to the threshold."""


class NonSemisimpleZeroError(np.linalg.LinAlgError):
    """The zero eigenvalue carries a nilpotent (Jordan) block."""


class SingularBlockError(np.linalg.LinAlgError):
    """A block linear system required by the computation is singular."""


class StructureError(ValueError):
    """Input violates the structural normal form for a DFS Lindbladian."""


def assemble_lindbladian(h: np.ndarray, jumps) -> np.ndarray:
    """Full (D^2, D^2) matrix of the Lindblad generator."""
    h = require_hermitian(h, "hamiltonian")
    s = -1j * commutator_superop(h)
    for f in jumps:
        f = as_operator(f)
        if f.shape != h.shape:
            raise ValueError(f"jump shape {f.shape} != hamiltonian shape {h.shape}")
        s = s + dissipator(f)
    return s


def nh_hamiltonian(h: np.ndarray, jumps) -> np.ndarray:
    """Non-Hermitian Hamiltonian K = H - (i/2) sum_l F_l† F_l."""
    k = as_operator(h).astype(complex)
    for f in jumps:
        f = as_operator(f)
        k = k - 0.5j * (dagger(f) @ f)
    return k


@dataclass(frozen=True)
class StructureReport:
    """Residuals of the structural checks for a DFS Lindbladian."""

    h_hermitian: float
    h_on_decaying_block: float
    jumps_into_dfs: tuple[float, ...]
    dfs_steady: float
    zero_multiplicity: int
    expected_multiplicity: int
    spectral_gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return not self.failures()

    def failures(self) -> list[str]:
        out = []
        if self.h_hermitian > self.tol:
            out.append(f"hamiltonian not Hermitian (residual {self.h_hermitian:.3e})")
        if self.h_on_decaying_block > self.tol:
            out.append(f"hamiltonian leaks off the decaying block (residual {self.h_on_decaying_block:.3e})")
        for i, r in enumerate(self.jumps_into_dfs):
            if r > self.tol:
                out.append(f"jump {i} is not a decaying-to-DFS map (residual {r:.3e})")
        if self.dfs_steady > self.tol:
            out.append(f"DFS is not steady (residual {self.dfs_steady:.3e})")
        if self.zero_multiplicity != self.expected_multiplicity:
            out.append(
                f"zero eigenvalue multiplicity {self.zero_multiplicity}"
                f" != DFS block dimension {self.expected_multiplicity}"
            )
        return out


@dataclass(eq=False)
class StructuredLindbladian:
    """A Lindbladian in the DFS structural normal form.

    Use :func:`structured_lindbladian` to construct one with validation.
    """

    h: np.ndarray
    jumps: tuple[np.ndarray, ...]
    dfs: DfsProjector
    superop: np.ndarray
    report: StructureReport | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    @cached_property
    def k(self) -> np.ndarray:
        """Non-Hermitian Hamiltonian on the decaying block."""
        return nh_hamiltonian(self.h, self.jumps)

    @cached_property
    def drazin(self) -> np.ndarray:
        return drazin_inverse(self.superop)

    @cached_property
    def asymptotic_projection(self) -> np.ndarray:
        """Projection onto the steady subspace along the decaying directions."""
        return np.eye(self.superop.shape[0], dtype=complex) - self.superop @ self.drazin

    @cached_property
    def corners(self) -> Corners:
        return corner_superops(self.dfs)


def structure_report(h, jumps, dfs: DfsProjector, superop=None, tol: float = DEFAULT_TOL) -> StructureReport:
    """Evaluate the structural checks without raising."""
    h = as_operator(h)
    jumps = [as_operator(f) for f in jumps]
    if superop is None:
        superop = assemble_lindbladian(h, jumps)
    scale_h = max(1.0, frob(h))
    h_herm = frob(h - dagger(h)) / scale_h
    h_block = frob(h - dfs.q @ h @ dfs.q) / scale_h
    jump_res = tuple(
        frob(f - dfs.p @ f @ dfs.q) / max(1.0, frob(f)) for f in jumps
    )
    # Steadiness: L applied to a basis of the DFS block.
    d = dfs.d
    steady = 0.0
    scale_s = max(1.0, float(np.linalg.norm(superop, 2)))
    for i in range(d):
        for j in range(d):
            unit = np.outer(dfs.basis[:, i], dfs.basis[:, j].conj())
            steady = max(steady, frob(devectorize(superop @ vectorize(unit))) / scale_s)
    evals = np.linalg.eigvals(superop)
    thresh = ZERO_CLUSTER_FACTOR * scale_s
    zero_count = int(np.sum(np.abs(evals) <= thresh))
    nonzero = np.abs(evals)[np.abs(evals) > thresh]
    gap = float(np.min(nonzero)) if nonzero.size else np.inf
    return StructureReport(
        h_hermitian=h_herm,
        h_on_decaying_block=h_block,
        jumps_into_dfs=jump_res,
        dfs_steady=steady,
        zero_multiplicity=zero_count,
        expected_multiplicity=d * d,
        spectral_gap=gap,
        tol=tol,
    )


def structured_lindbladian(h, jumps, dfs: DfsProjector, *, validate: bool = True,
                           tol: float = DEFAULT_TOL) -> StructuredLindbladian:
    """Build a :class:`StructuredLindbladian`, validating the normal form.

    With validate=True (default) a violated structural assumption raises
    :class:`StructureError`. With validate=False the report is still attached
    so callers can inspect what failed.
    """
    h = as_operator(h)
    jumps = tuple(as_operator(f) for f in jumps)
    if h.shape[0] != dfs.dim:
        raise ValueError(f"hamiltonian dimension {h.shape[0]} != projector dimension {dfs.dim}")
    if dfs.d >= dfs.dim:
        raise ValueError("DFS must be a proper subspace (nonempty decaying block)")
    # Assemble without the Hermiticity hard-check; the report records it, and
    # validate=True raises below on any failure.
    superop = -1j * commutator_superop(h)
    for f in jumps:
        superop = superop + dissipator(f)
    rep = structure_report(h, jumps, dfs, superop, tol)
    if validate and not rep.passed:
        raise StructureError("; ".join(rep.failures()))
    return StructuredLindbladian(h=h, jumps=jumps, dfs=dfs, superop=superop, report=rep)


def drazin_inverse(s: np.ndarray, *, zero_tol: float | None = None) -> np.ndarray:
    """Drazin pseudoinverse of a matrix with (at most) a semisimple zero eigenvalue.

    An ordered complex Schur decomposition S = Z T Z† sorts the eigenvalues
    with |lambda| above the zero threshold into the leading block T11::

        T = [[T11, T12],   S^D = Z [[inv(T11), inv(T11)^2 T12],  Z†
             [0,   T22]],            [0,        0            ]]

    For a semisimple zero cluster T22 vanishes up to round-off; a nilpotent
    residual above tolerance raises :class:`NonSemisimpleZeroError`. The
    default threshold is 1e-8 * ||S||_2; a nonzero eigenvalue within 100x of
    the threshold emits :class:`SpectralGapWarning`.
    """
    s = as_operator(s)
    n = s.shape[0]
    norm2 = float(np.linalg.norm(s, 2))
    if norm2 == 0.0:
        return np.zeros_like(s)
    thresh = ZERO_CLUSTER_FACTOR * norm2 if zero_tol is None else float(zero_tol)
    t, z, sdim = schur(s, output="complex", sort=lambda lam: abs(lam) > thresh)
    m = n - sdim
    if m == 0:
        inv = solve_triangular(t, np.eye(n, dtype=complex))
        return z @ inv @ dagger(z)
    t11 = t[:sdim, :sdim]
    t12 = t[:sdim, sdim:]
    t22 = t[sdim:, sdim:]
    nil = frob(t22)
    nil_tol = 10.0 * thresh * max(1.0, np.sqrt(m))
    if nil > nil_tol:
        raise NonSemisimpleZeroError(
            f"zero eigenvalue is not semisimple (nilpotent residual {nil:.3e} > {nil_tol:.3e})"
        )
    if sdim > 0:
        gap = float(np.min(np.abs(np.diag(t11))))
        if gap < GAP_WARNING_FACTOR * thresh:
            warnings.warn(
                f"smallest retained eigenvalue {gap:.3e} is within "
                f"{GAP_WARNING_FACTOR:g}x of the zero threshold {thresh:.3e}",
                SpectralGapWarning,
                stacklevel=2,
            )
    out = np.zeros((n, n), dtype=complex)
    if sdim > 0:
        inv11 = solve_triangular(t11, np.eye(sdim, dtype=complex))
        out[:sdim, :sdim] = inv11
        out[:sdim, sdim:] = inv11 @ (inv11 @ t12)
    return z @ out @ dagger(z)


def asymptotic_projection(s: np.ndarray) -> np.ndarray:
    """P_inf = I - S S^D, the spectral projection onto the kernel of S."""
    s = as_operator(s)
    return np.eye(s.shape[0], dtype=complex) - s @ drazin_inverse(s)


def decay_rates(s: np.ndarray) -> np.ndarray:
    """Sorted decay rates -Re(lambda) over the nonzero spectrum of a generator."""
    s = as_operator(s)
    evals = np.linalg.eigvals(s)
    thresh = ZERO_CLUSTER_FACTOR * max(np.abs(evals).max(), np.finfo(float).tiny)
    rates = -evals.real[np.abs(evals) > thresh]
    return np.sort(rates)


def min_decay_rate(s: np.ndarray) -> float:
    """Smallest decay rate; raises if the nonzero spectrum is not relaxing."""
    rates = decay_rates(s)
    if rates.size == 0:
        raise ValueError("generator has no nonzero spectrum")
    if rates[0] <= 0:
        raise ValueError(f"generator is not relaxing (slowest rate {rates[0]:.3e})")
    return float(rates[0])


def asymptotic_projection_limit(s: np.ndarray, *, t: float | None = None,
                                factor: float = 40.0) -> np.ndarray:
    """Large-time oracle for the asymptotic projection: exp(t S).

    By default t = factor / (smallest decay rate), long enough that every
    decaying direction is suppressed below round-off relative to the result.
    """
    s = as_operator(s)
    if t is None:
        t = factor / min_decay_rate(s)
    if t < 0:
        raise ValueError("time must be nonnegative")
    return expm(t * s)


def matrix_exp_apply(s: np.ndarray, t: float, rho: np.ndarray) -> np.ndarray:
    """Propagate rho by exp(t S)."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    s = as_operator(s)
    return devectorize(expm(t * s) @ vectorize(rho))


# ---------------------------------------------------------------------------
# Non-Hermitian sector solves
# ---------------------------------------------------------------------------

def nh_hamiltonian_inverse(k: np.ndarray, dfs: DfsProjector) -> np.ndarray:
    """Inverse of K on the decaying block, embedded in the full space.

    The result X satisfies X K = K X = Q (the decaying-block projector) and
    vanishes on the other corners.
    """
    k = as_operator(k)
    bq = dfs.basis_c
    kk = dagger(bq) @ k @ bq
    try:
        inv = np.linalg.solve(kk, np.eye(kk.shape[0], dtype=complex))
    except np.linalg.LinAlgError as err:
        raise SingularBlockError(f"non-Hermitian Hamiltonian is singular on the decaying block: {err}") from err
    return bq @ inv @ dagger(bq)


def _nh_block_matrix(kk: np.ndarray) -> np.ndarray:
    """Matrix of sigma -> -i(K sigma - sigma K†) on the decaying block."""
    n = kk.shape[0]
    eye = np.eye(n, dtype=complex)
    return -1j * (np.kron(eye, kk) - np.kron(kk.conj(), eye))


def nh_superop_inverse_lr(k: np.ndarray, dfs: DfsProjector) -> np.ndarray:
    """Embedded inverse of sigma -> -i(K sigma - sigma K†) on the lr corner.

    Returns a full (D^2, D^2) matrix that inverts the map on lr-supported
    operators and annihilates the other corners. Implemented as a dense linear
    solve on the (D-d)^2 block, so a non-diagonalizable K is handled exactly.
    """
    k = as_operator(k)
    bq = dfs.basis_c
    kk = dagger(bq) @ k @ bq
    m = _nh_block_matrix(kk)
    try:
        minv = np.linalg.solve(m, np.eye(m.shape[0], dtype=complex))
    except np.linalg.LinAlgError as err:
        raise SingularBlockError(f"decaying-block evolution superoperator is singular: {err}") from err
    comp = np.kron(bq.T, dagger(bq))
    emb = np.kron(bq.conj(), bq)
    return emb @ minv @ comp


def nh_superop_solve(k: np.ndarray, sigma: np.ndarray, dfs: DfsProjector,
                     tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solve -i(K rho - rho K†) = sigma on the ll, ur, and lr corners.

    The map is block diagonal over corners and vanishes identically on the
    DFS corner, so sigma must have no ul component. Each corner is solved as
    a dense linear system in the compressed basis; no diagonalization of K is
    involved, so defective K are fine.
    """
    k = as_operator(k)
    sigma = as_operator(sigma)
    c = four_corners(sigma, dfs)
    if frob(c.ul) > tol * max(1.0, frob(sigma)):
        raise ValueError(
            f"right-hand side has weight {frob(c.ul):.3e} on the DFS corner, "
            "where the map is not invertible"
        )
    bp, bq = dfs.basis, dfs.basis_c
    kk = dagger(bq) @ k @ bq
    d, n = dfs.d, dfs.n_decay
    try:
        # ll corner: -i K rho = sigma_ll.
        rho_ll = np.linalg.solve(-1j * kk, dagger(bq) @ c.ll @ bp)
        # ur corner: i rho K† = sigma_ur, solved from the right.
        rho_ur = np.linalg.solve((1j * dagger(kk)).T, (dagger(bp) @ c.ur @ bq).T).T
        # lr corner: full sector map as a dense system.
        m = _nh_block_matrix(kk)
        rho_lr = np.linalg.solve(m, (dagger(bq) @ c.lr @ bq).reshape(-1, order="F"))
        rho_lr = rho_lr.reshape((n, n), order="F")
    except np.linalg.LinAlgError as err:
        raise SingularBlockError(f"non-Hermitian sector solve failed: {err}") from err
    return bq @ rho_ll @ dagger(bp) + bp @ rho_ur @ dagger(bq) + bq @ rho_lr @ dagger(bq)


def asymptotic_projection_analytic(lind: StructuredLindbladian) -> np.ndarray:
    """Closed-form asymptotic projection for a structured Lindbladian.

    P_inf(rho) = P rho P - sum_l F_l Kinv_lr(rho) F_l†, where Kinv_lr inverts
    the decaying-block evolution sigma -> -i(K sigma - sigma K†). The map
    annihilates the block-off-diagonal corners.
    """
    dfs = lind.dfs
    s = sandwich_superop(dfs.p, dfs.p).astype(complex)
    inv_lr = nh_superop_inverse_lr(lind.k, dfs)
    feed = np.zeros_like(s)
    for f in lind.jumps:
        feed = feed + sandwich_superop(f, dagger(f))
    return s - feed @ inv_lr
