"""Constructive scenario families: cancellation, coherent drives, targeting.

Model systems built here:

* The three-level system. Basis (|0>, |1>, |e>), DFS {|0>, |1>}, detuning
  delta on |e>, decay F = sqrt(Gamma)|0><e|, and a weak drive-type jump
  deformation f = sqrt(gamma)|0><1|. Its effective jump has the closed form
  F_eff = sqrt(gamma) * delta / (delta - i Gamma/2) |0><1|: the direct decay
  from |1> interferes with the virtual path through |e>, cancelling exactly
  on resonance (delta = 0).

* Jump families satisfying the interference-cancellation conditions:
  surjectivity F (F†F)^-1 F† = P on the DFS, and pairwise orthogonality
  F_l F_l'† = 0 for l != l' (disjoint decaying blocks). Under both
  conditions, perturbations with no f_ll corner induce no dissipation in the
  DFS at second order.

* Drive constructions: a Hermitian V cancelling the effective jumps of a
  given deformation family (coherent cancellation), and a V turning given
  DFS-supported targets {V_target, f_ul_l} into the exact effective generator
  (universal dissipation engineering).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .effective import (
    Perturbation,
    effective_coupling,
    effective_lindbladian_closed,
    effective_lindbladian_general,
)
from .lindblad import StructuredLindbladian, nh_hamiltonian_inverse, structured_lindbladian
from .operators import (
    DEFAULT_TOL,
    DfsProjector,
    as_operator,
    dagger,
    four_corners,
    frob,
    require_hermitian,
)


@dataclass(frozen=True)
class ThreeLevelParams:
    """Parameters of the three-level system (all rates nonnegative)."""

    delta: float
    Gamma: float
    gamma: float

    def __post_init__(self):
        if self.Gamma <= 0:
            raise ValueError("Gamma must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


def three_level_system(params: ThreeLevelParams):
    """Three-level system and its drive-type perturbation.

    Returns (StructuredLindbladian, Perturbation) on the basis (|0>, |1>, |e>)
    with DFS {|0>, |1>}.
    """
    dfs = DfsProjector.from_indices(3, (0, 1))
    h = np.zeros((3, 3), dtype=complex)
    h[2, 2] = params.delta
    big_f = np.zeros((3, 3), dtype=complex)
    big_f[0, 2] = np.sqrt(params.Gamma)
    lind = structured_lindbladian(h, [big_f], dfs)
    f = np.zeros((3, 3), dtype=complex)
    f[0, 1] = np.sqrt(params.gamma)
    pert = Perturbation(v=np.zeros((3, 3), dtype=complex), fs=(f,))
    return lind, pert


def generalized_three_level_perturbation(psi, gamma: float) -> Perturbation:
    """Drive-type deformation f = sqrt(gamma) |0><psi| for a DFS state psi.

    psi is a length-2 amplitude vector on (|0>, |1>); it is normalized here.
    On resonance the effective jump vanishes for every psi: the decaying state
    sqrt(Gamma)|1'> - sqrt(gamma)|e>-type superposition is dark.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (2,):
        raise ValueError("psi must be a length-2 amplitude vector on the DFS")
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError("psi must be nonzero")
    psi = psi / nrm
    f = np.zeros((3, 3), dtype=complex)
    f[0, :2] = np.sqrt(gamma) * psi.conj()
    return Perturbation(v=np.zeros((3, 3), dtype=complex), fs=(f,))


def surjectivity_residual(f: np.ndarray, dfs: DfsProjector) -> float:
    """Residual of the condition F (F†F)^-1 F† = P (inverse on the support)."""
    f = as_operator(f)
    w_pinv = np.linalg.pinv(dagger(f) @ f, rcond=1e-12)
    return frob(f @ w_pinv @ dagger(f) - dfs.p)


def orthogonality_residual(jumps) -> float:
    """Largest pairwise residual ||F_l F_l'†|| over distinct jumps."""
    jumps = [as_operator(f) for f in jumps]
    worst = 0.0
    for i, a in enumerate(jumps):
        for b in jumps[i + 1:]:
            worst = max(worst, frob(a @ dagger(b)), frob(b @ dagger(a)))
    return worst


def random_surjective_jump(d: int, n: int, seed: int, *, max_attempts: int = 8) -> np.ndarray:
    """Random decaying-to-DFS jump satisfying the surjectivity condition.

    Returns a (d+n, d+n) matrix with a standard complex normal block mapping
    the last n basis states onto the first d; redraws until the condition
    residual is at most 1e-10, erroring after max_attempts draws.
    """
    if n < d:
        raise ValueError(f"surjectivity needs a decaying block at least as large as the DFS (n={n} < d={d})")
    rng = np.random.default_rng(seed)
    dim = d + n
    dfs = DfsProjector.from_indices(dim, range(d))
    for _ in range(max_attempts):
        f = np.zeros((dim, dim), dtype=complex)
        f[:d, d:] = rng.standard_normal((d, n)) + 1j * rng.standard_normal((d, n))
        if surjectivity_residual(f, dfs) <= 1e-10:
            return f
    raise RuntimeError(f"no surjective draw in {max_attempts} attempts (d={d}, n={n})")


def random_orthogonal_family(d: int, blocks, seed: int, *, total_decaying: int | None = None):
    """Random jump family on disjoint decaying blocks.

    blocks lists the decaying dimension N_l addressed by each jump; the full
    space has dimension d + total_decaying (default: d + sum(blocks)). Each
    jump is a random surjective map from its block onto the DFS, so the
    orthogonality condition F_l F_l'† = 0 holds exactly by construction.

    Returns (jumps, DfsProjector). Note a zero-Hamiltonian generator built on
    the family relaxes onto a unique DFS only when the blocks cover the
    decaying space exactly AND each block has size d: a jump has rank at most
    d, so a wider block leaves dark directions that never decay. Wider blocks
    are still valid for condition checks or with a mixing Hamiltonian.
    """
    blocks = list(blocks)
    if any(b < d for b in blocks):
        raise ValueError(f"every block must be at least the DFS dimension d={d}, got {blocks}")
    n_total = sum(blocks) if total_decaying is None else int(total_decaying)
    if sum(blocks) > n_total:
        raise ValueError(f"blocks {blocks} exceed the decaying dimension {n_total}")
    rng = np.random.default_rng(seed)
    dim = d + n_total
    dfs = DfsProjector.from_indices(dim, range(d))
    jumps = []
    offset = d
    for b in blocks:
        for attempt in range(8):
            block = rng.standard_normal((d, b)) + 1j * rng.standard_normal((d, b))
            f = np.zeros((dim, dim), dtype=complex)
            f[:d, offset:offset + b] = block
            if surjectivity_residual(f, dfs) <= 1e-10:
                jumps.append(f)
                break
        else:
            raise RuntimeError(f"no surjective draw for block of size {b}")
        offset += b
    return jumps, dfs


@dataclass(frozen=True)
class CancellationReport:
    """Interference-cancellation outcome for a jump family and deformations."""

    surjectivity: tuple[float, ...]
    orthogonality: float
    f_ll_norms: tuple[float, ...]
    conditions_met: bool
    f_eff_norms: tuple[float, ...]
    l_eff_norm: float
    pert_norm: float
    tol: float

    @property
    def cancelled(self) -> bool:
        return self.l_eff_norm <= self.tol * max(self.pert_norm ** 2, 1e-300)


def cancellation_check(jumps, fs, dfs: DfsProjector, *, tol: float = 1e-10,
                       condition_tol: float = 1e-9) -> CancellationReport:
    """Evaluate generic cancellation: H = 0, conditions met, f_ll = 0.

    Builds the zero-Hamiltonian generator for the family, computes the
    effective generator by both routes, and reports whether the second-order
    DFS dissipation vanishes at the expected tolerance. Violated conditions
    are reported, not raised, so near-misses can be quantified.
    """
    jumps = [as_operator(f) for f in jumps]
    fs = [as_operator(f) for f in fs]
    surj = tuple(surjectivity_residual(f, dfs) for f in jumps)
    orth = orthogonality_residual(jumps)
    f_ll = tuple(frob(four_corners(f, dfs).ll) for f in fs)
    conditions = (
        all(r <= condition_tol for r in surj)
        and orth <= condition_tol
        and all(r <= condition_tol * max(1.0, frob(f)) for r, f in zip(f_ll, fs))
    )
    h = np.zeros((dfs.dim, dfs.dim), dtype=complex)
    lind = structured_lindbladian(h, jumps, dfs)
    pert = Perturbation(v=h.copy(), fs=tuple(fs))
    eff = effective_lindbladian_closed(lind, pert)
    l_eff = effective_lindbladian_general(lind, pert)
    return CancellationReport(
        surjectivity=surj,
        orthogonality=orth,
        f_ll_norms=f_ll,
        conditions_met=conditions,
        f_eff_norms=tuple(frob(f) for f in eff.jumps_eff),
        l_eff_norm=frob(l_eff),
        pert_norm=pert.norm(),
        tol=tol,
    )


def coherent_cancellation_drive(lind: StructuredLindbladian, fs, *,
                                cancel_induced_hamiltonian: bool = False,
                                condition_tol: float = 1e-9) -> Perturbation:
    """Hermitian drive V cancelling the effective jumps of a deformation family.

    V = (i/2) sum_l (F_l† f_l - f_l† F_l) + Vtilde + Vtilde†, with
    Vtilde = K sum_l (F_l† F_l)^-1 F_l† f_l (inverses on the block supports).
    Requires the surjectivity and orthogonality conditions and f_ll = 0; with
    this V in the perturbation the closed-form effective jumps vanish for any
    decaying-block Hamiltonian.

    The drive still leaves a second-order DFS Hamiltonian (a Stark-type shift
    from the virtual coupling). cancel_induced_hamiltonian=True adds the
    Hermitian counter-term V_ul = Herm(C Kinv C) that removes it, which is
    free since the DFS corner of V never feeds back into the coupling C.
    """
    fs = [as_operator(f) for f in fs]
    if len(fs) != len(lind.jumps):
        raise ValueError(f"{len(fs)} deformations for {len(lind.jumps)} jumps")
    dfs = lind.dfs
    surj = [surjectivity_residual(f, dfs) for f in lind.jumps]
    if max(surj) > condition_tol:
        raise ValueError(f"surjectivity condition violated (worst residual {max(surj):.3e})")
    orth = orthogonality_residual(lind.jumps)
    if orth > condition_tol:
        raise ValueError(f"orthogonality condition violated (residual {orth:.3e})")
    for i, f in enumerate(fs):
        r = frob(four_corners(f, dfs).ll)
        if r > condition_tol * max(1.0, frob(f)):
            raise ValueError(f"deformation {i} has a detectable (ll) corner (norm {r:.3e})")
    v = np.zeros((dfs.dim, dfs.dim), dtype=complex)
    x = np.zeros_like(v)
    for big_f, f in zip(lind.jumps, fs):
        v = v + 0.5j * (dagger(big_f) @ f - dagger(f) @ big_f)
        w_pinv = np.linalg.pinv(dagger(big_f) @ big_f, rcond=1e-12)
        x = x + w_pinv @ dagger(big_f) @ f
    x = lind.k @ x
    v = v + x + dagger(x)
    pert = Perturbation(v=v, fs=tuple(fs))
    if cancel_induced_hamiltonian:
        coupling = effective_coupling(lind, pert)
        kinv = nh_hamiltonian_inverse(lind.k, dfs)
        t = coupling @ kinv @ coupling
        pert = Perturbation(v=v + 0.5 * (t + dagger(t)), fs=tuple(fs))
    return pert


def universal_dissipation(lind: StructuredLindbladian, target_h, target_jumps, *,
                          tol: float = DEFAULT_TOL) -> Perturbation:
    """Perturbation realizing a target DFS generator exactly at second order.

    Given DFS-supported targets (V_target Hermitian, jumps t_l), the
    deformations are f_l = t_l and the drive is
    V = V_target + (i/2) sum_l (F_l† f_l - f_l† F_l). The resulting effective
    generator is -i[V_target, .] + sum_l D[t_l] for any decaying-block
    Hamiltonian: the compensation term empties the decaying-side corner of
    the induced coupling, so no interference correction survives.
    """
    target_h = require_hermitian(target_h, "target Hamiltonian")
    target_jumps = [as_operator(t) for t in target_jumps]
    if len(target_jumps) > len(lind.jumps):
        raise ValueError(
            f"{len(target_jumps)} target jumps but only {len(lind.jumps)} unperturbed jumps"
        )
    dfs = lind.dfs
    if frob(target_h - dfs.p @ target_h @ dfs.p) > tol * max(1.0, frob(target_h)):
        raise ValueError("target Hamiltonian must be supported on the DFS corner")
    for i, t in enumerate(target_jumps):
        if frob(t - dfs.p @ t @ dfs.p) > tol * max(1.0, frob(t)):
            raise ValueError(f"target jump {i} must be supported on the DFS corner")
    fs = list(target_jumps) + [
        np.zeros((dfs.dim, dfs.dim), dtype=complex)
        for _ in range(len(lind.jumps) - len(target_jumps))
    ]
    v = target_h.astype(complex).copy()
    for big_f, f in zip(lind.jumps, fs):
        v = v + 0.5j * (dagger(big_f) @ f - dagger(f) @ big_f)
    return Perturbation(v=v, fs=tuple(fs))


def pauli_lowering_targets(scale: float, dim: int):
    """Scaled target jumps {sigma_minus, sigma_z/2, sigma_plus} on a qubit DFS.

    The qubit lives on the first two basis states of a dim-dimensional space;
    the returned matrices are full-dimension and DFS-corner supported.
    """
    if dim < 2:
        raise ValueError("need at least a 2-dimensional space for a qubit DFS")
    sm = np.array([[0, 1], [0, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    out = []
    for block in (scale * sm, scale * sz / 2, scale * dagger(sm)):
        t = np.zeros((dim, dim), dtype=complex)
        t[:2, :2] = block
        out.append(t)
    return out
