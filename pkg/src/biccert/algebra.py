"""Operator-algebra machinery behind the certification argument.

A tuple X_1..X_{d^2} of projections with sum d*I and X_j X_k X_j = s_jk X_j
generates a finite-dimensional *-algebra whose irreducible blocks all have
dimension divisible by d.  This module checks those relations (in three
equivalent presentations), decomposes finite representations into
irreducible blocks, certifies the block-maximally-entangled structure of
synchronized bipartite states, and runs the full optimality-relation audit
for strategies attaining the quantum value.

The irreducible decomposition is computed numerically: the commutant of the
generated algebra is solved as a linear system, a random hermitian commutant
element splits the space into irreducible copies (its eigenspaces), and a
second random commutant element links equivalent copies and aligns their
bases through its Schur intertwiners.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bell import Strategy, bell_value
from .bic import GramMatrix
from .linalg import (
    BipartiteDims,
    dagger,
    eigh,
    frobenius,
    is_state,
    kron,
    matricize,
    partial_trace,
)

RANK_CUTOFF = 1e-12


# ---------------------------------------------------------------------------
# Relation checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelationReport:
    """Frobenius residuals of the defining relations of a projection family.

    ``gram[j, k]`` holds ||X_j X_k X_j - s_jk X_j|| (standard variant),
    ``cube[j, k]`` holds ||(1-s_jk)(X_j - X_k) - (X_j - X_k)^3||, and
    ``bs_commutators`` maps index 4-tuples to commutator residuals.
    """

    variant: str
    tol: float
    scale: float
    projectivity: np.ndarray
    completeness: float
    gram: np.ndarray | None = None
    cube: np.ndarray | None = None
    bs_commutators: dict[tuple[int, int, int, int], float] | None = None

    @property
    def max_residual(self) -> float:
        worst = float(self.projectivity.max(initial=0.0))
        worst = max(worst, self.completeness)
        for block in (self.gram, self.cube):
            if block is not None:
                worst = max(worst, float(block.max(initial=0.0)))
        if self.bs_commutators:
            worst = max(worst, max(self.bs_commutators.values()))
        return worst

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol * self.scale

    def to_json(self) -> dict:
        out = {
            "variant": self.variant,
            "passed": self.passed,
            "maxResidual": self.max_residual,
            "projectivity": [float(x) for x in self.projectivity],
            "completeness": self.completeness,
        }
        if self.gram is not None:
            out["gramRelation"] = [[float(x) for x in row] for row in self.gram]
        if self.cube is not None:
            out["cubeRelation"] = [[float(x) for x in row] for row in self.cube]
        if self.bs_commutators is not None:
            out["bsCommutators"] = {
                ",".join(map(str, key)): float(v)
                for key, v in self.bs_commutators.items()
            }
        return out


def check_as_relations(
    X,
    S: GramMatrix,
    tol: float = 1e-9,
    variant: str = "standard",
    seed: int = 0,
) -> RelationReport:
    """Residuals of the projection-family relations against the matrix S.

    variant "standard" checks X_j X_k X_j = s_jk X_j, "cube" the equivalent
    (1-s_jk)(X_j - X_k) = (X_j - X_k)^3, and "bs" additionally the
    commutators [X_1 X_a X_b X_1, X_1 X_c X_d X_1] = 0 (all 4-tuples when
    d^2 <= 9, otherwise 512 seeded samples).
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise ValueError("expected a stack of square matrices")
    n = X.shape[0]
    if n != S.n:
        raise ValueError(f"expected {S.n} generators for S, got {n}")
    d = S.d
    dim = X.shape[1]
    scale = max(1.0, max(frobenius(Xj) for Xj in X))

    projectivity = np.array([frobenius(Xj @ Xj - Xj) for Xj in X])
    completeness = frobenius(X.sum(axis=0) - d * np.eye(dim))

    gram_res = cube_res = None
    bs = None
    if variant == "standard":
        gram_res = np.zeros((n, n))
        for j in range(n):
            for k in range(n):
                if j != k:
                    gram_res[j, k] = frobenius(X[j] @ X[k] @ X[j] - S.s[j, k] * X[j])
    elif variant == "cube":
        cube_res = np.zeros((n, n))
        for j in range(n):
            for k in range(n):
                if j != k:
                    D = X[j] - X[k]
                    cube_res[j, k] = frobenius(
                        (1.0 - S.s[j, k]) * D - D @ D @ D
                    )
    elif variant == "bs":
        words = np.einsum("ab,jbc,kcd,de->jkae", X[0], X, X, X[0], optimize=True)
        if n <= 9:
            tuples = [
                (a, b, c, e)
                for a in range(n)
                for b in range(n)
                for c in range(n)
                for e in range(n)
            ]
        else:
            rng = np.random.default_rng(seed)
            tuples = [tuple(rng.integers(0, n, size=4)) for _ in range(512)]
        bs = {}
        for a, b, c, e in tuples:
            M, N = words[a, b], words[c, e]
            bs[(a, b, c, e)] = frobenius(M @ N - N @ M)
    else:
        raise ValueError(f"unknown variant {variant!r}")

    return RelationReport(
        variant=variant,
        tol=tol,
        scale=scale,
        projectivity=projectivity,
        completeness=float(completeness),
        gram=gram_res,
        cube=cube_res,
        bs_commutators=bs,
    )


# ---------------------------------------------------------------------------
# The 6-dimensional exceptional representation (d = 3, s_jk = 1/4 off-diagonal)
# ---------------------------------------------------------------------------

def counterexample_rep() -> np.ndarray:
    """Nine 6x6 projections summing to 3I with X_j X_k X_j = (1/4) X_j.

    This family realizes the d=3 uniform-overlap relations in dimension six,
    so the relation algebra admits irreducible blocks beyond the minimal
    3-dimensional ones.  Entries are exact expressions in xi = e^{i pi/12}
    and sqrt(3), evaluated to double precision.
    """
    xi = np.exp(1j * np.pi / 12)
    s3 = np.sqrt(3.0)
    r8 = np.sqrt(8.0)

    X1 = np.diag([1, 1, 0, 0, 0, 0]).astype(complex)
    X2 = np.array(
        [
            [1 / 4, 0, -s3 / 4, 0, 0, 0],
            [0, 1 / 4, 0, -s3 / 4, 0, 0],
            [-s3 / 4, 0, 3 / 4, 0, 0, 0],
            [0, -s3 / 4, 0, 3 / 4, 0, 0],
            [0, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0],
        ],
        dtype=complex,
    )
    X3 = np.array(
        [
            [1 / 4, 0, s3 / 4, 0, 0, 0],
            [0, 1 / 4, 0, s3 / 4, 0, 0],
            [s3 / 4, 0, 3 / 4, 0, 0, 0],
            [0, s3 / 4, 0, 3 / 4, 0, 0],
            [0, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0],
        ],
        dtype=complex,
    )
    X4 = np.array(
        [
            [1 / 4, 0, xi**6 / 4, 0, 1 / (r8 * xi**5), 0],
            [0, 1 / 4, 0, xi**6 / 4, 0, -1 / (r8 * xi**5)],
            [1 / (4 * xi**6), 0, 1 / 4, 0, -xi / r8, 0],
            [0, 1 / (4 * xi**6), 0, 1 / 4, 0, xi / r8],
            [xi**5 / r8, 0, -1 / (r8 * xi), 0, 1 / 2, 0],
            [0, -(xi**5) / r8, 0, 1 / (r8 * xi), 0, 1 / 2],
        ],
        dtype=complex,
    )
    X5 = np.array(
        [
            [1 / 4, 0, 1 / (4 * xi**6), 0, xi**5 / r8, 0],
            [0, 1 / 4, 0, 1 / (4 * xi**6), 0, -(xi**5) / r8],
            [xi**6 / 4, 0, 1 / 4, 0, -1 / (r8 * xi), 0],
            [0, xi**6 / 4, 0, 1 / 4, 0, 1 / (r8 * xi)],
            [1 / (r8 * xi**5), 0, -xi / r8, 0, 1 / 2, 0],
            [0, -1 / (r8 * xi**5), 0, xi / r8, 0, 1 / 2],
        ],
        dtype=complex,
    )
    X6 = np.array(
        [
            [1 / 4, 0, 0, xi**6 / 4, 1 / 4, 1 / (4 * xi**6)],
            [0, 1 / 4, xi**6 / 4, 0, xi**6 / 4, -1 / 4],
            [0, 1 / (4 * xi**6), 1 / 4, 0, 1 / 4, xi**6 / 4],
            [1 / (4 * xi**6), 0, 0, 1 / 4, 1 / (4 * xi**6), -1 / 4],
            [1 / 4, 1 / (4 * xi**6), 1 / 4, xi**6 / 4, 1 / 2, 0],
            [xi**6 / 4, -1 / 4, 1 / (4 * xi**6), -1 / 4, 0, 1 / 2],
        ],
        dtype=complex,
    )
    X7 = np.array(
        [
            [1 / 4, 0, 0, 1 / 4, (-1 - s3) / 8, (1 - s3) / 8],
            [0, 1 / 4, -1 / 4, 0, (1 - s3) / 8, (1 + s3) / 8],
            [0, -1 / 4, 1 / 4, 0, (s3 - 1) / 8, (-1 - s3) / 8],
            [1 / 4, 0, 0, 1 / 4, (-1 - s3) / 8, (1 - s3) / 8],
            [(-1 - s3) / 8, (1 - s3) / 8, (s3 - 1) / 8, (-1 - s3) / 8, 1 / 2, 0],
            [(1 - s3) / 8, (1 + s3) / 8, (-1 - s3) / 8, (1 - s3) / 8, 0, 1 / 2],
        ],
        dtype=complex,
    )
    X8 = np.array(
        [
            [1 / 4, 0, 0, 1 / (4 * xi**6), 1 / 4, xi**6 / 4],
            [0, 1 / 4, 1 / (4 * xi**6), 0, 1 / (4 * xi**6), -1 / 4],
            [0, xi**6 / 4, 1 / 4, 0, 1 / 4, 1 / (4 * xi**6)],
            [xi**6 / 4, 0, 0, 1 / 4, xi**6 / 4, -1 / 4],
            [1 / 4, xi**6 / 4, 1 / 4, 1 / (4 * xi**6), 1 / 2, 0],
            [1 / (4 * xi**6), -1 / 4, xi**6 / 4, -1 / 4, 0, 1 / 2],
        ],
        dtype=complex,
    )
    X9 = np.array(
        [
            [1 / 4, 0, 0, -1 / 4, (-1 - s3) / 8, (s3 - 1) / 8],
            [0, 1 / 4, 1 / 4, 0, (s3 - 1) / 8, (1 + s3) / 8],
            [0, 1 / 4, 1 / 4, 0, (s3 - 1) / 8, (1 + s3) / 8],
            [-1 / 4, 0, 0, 1 / 4, (1 + s3) / 8, (1 - s3) / 8],
            [(-1 - s3) / 8, (s3 - 1) / 8, (s3 - 1) / 8, (1 + s3) / 8, 1 / 2, 0],
            [(s3 - 1) / 8, (1 + s3) / 8, (1 + s3) / 8, (1 - s3) / 8, 0, 1 / 2],
        ],
        dtype=complex,
    )
    return np.stack([X1, X2, X3, X4, X5, X6, X7, X8, X9])


def counterexample_gram() -> GramMatrix:
    """The 9x9 matrix with unit diagonal and 1/4 elsewhere (d = 3)."""
    S = np.full((9, 9), 0.25)
    np.fill_diagonal(S, 1.0)
    return GramMatrix(d=3, s=S)


def span_dimension(matrices, cutoff: float = 1e-8) -> int:
    """Numerical dimension of the linear span of a family of matrices."""
    stack = np.stack([np.asarray(M, dtype=complex).reshape(-1) for M in matrices])
    sv = np.linalg.svd(stack, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int((sv > cutoff * sv[0]).sum())


# ---------------------------------------------------------------------------
# Local supports and compressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportIsometry:
    """Inclusion of the local support of a state into the ambient space."""

    isometry: np.ndarray  # (ambient, support_dim), orthonormal columns
    support_dim: int
    side: str

    def projector(self) -> np.ndarray:
        return self.isometry @ dagger(self.isometry)


def local_support(rho: np.ndarray, dims: BipartiteDims, side: str) -> SupportIsometry:
    """Isometry onto the range of the reduced state on the given side."""
    rho = np.asarray(rho, dtype=complex)
    if not is_state(rho, 1e-8):
        raise ValueError("local_support expects a quantum state")
    reduced = partial_trace(rho, dims, "B" if side == "A" else "A")
    w, U = eigh(reduced, tol=1e-8)
    keep = w > RANK_CUTOFF
    return SupportIsometry(
        isometry=U[:, keep], support_dim=int(keep.sum()), side=side
    )


def compress(X: np.ndarray, U: SupportIsometry) -> np.ndarray:
    """X_hat = U* X U, the operator restricted to the support space."""
    X = np.asarray(X, dtype=complex)
    V = U.isometry
    if X.shape != (V.shape[0], V.shape[0]):
        raise ValueError("operator size does not match the isometry")
    return dagger(V) @ X @ V


# ---------------------------------------------------------------------------
# Irreducible decomposition of a finite *-closed operator family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IrrepBlock:
    multiplicity: int
    dimension: int
    generators: np.ndarray  # (n_generators, dimension, dimension)


@dataclass(frozen=True)
class IrrepDecomposition:
    """Unitary basis change exhibiting generators as  sum_a I_{e_a} (x) X_a."""

    basis_change: np.ndarray
    blocks: tuple[IrrepBlock, ...]
    off_block_residual: float

    @property
    def shape_multiset(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((b.multiplicity, b.dimension) for b in self.blocks))

    def block_matrix(self, block_gens) -> np.ndarray:
        """Assemble sum_a I_{e_a} (x) G_a from per-block matrices."""
        parts = [
            kron(np.eye(blk.multiplicity), G)
            for blk, G in zip(self.blocks, block_gens)
        ]
        total = sum(p.shape[0] for p in parts)
        out = np.zeros((total, total), dtype=complex)
        pos = 0
        for p in parts:
            out[pos : pos + p.shape[0], pos : pos + p.shape[0]] = p
            pos += p.shape[0]
        return out


def _commutant_basis(X: np.ndarray, rel_cutoff: float = 1e-10) -> list[np.ndarray]:
    """Basis of {Y : [Y, X_j] = 0 for all j} via the nullspace of the
    stacked row-major superoperators kron(X_j, I) - kron(I, X_j^T)."""
    m, n, _ = X.shape
    eye = np.eye(n)
    rows = np.concatenate([np.kron(Xj, eye) - np.kron(eye, Xj.T) for Xj in X])
    _, sv, Vh = np.linalg.svd(rows)
    cut = rel_cutoff * max(1.0, sv[0] if sv.size else 1.0)
    rank = int((sv > cut).sum())
    return [Vh[i].conj().reshape(n, n) for i in range(rank, n * n)]


def _random_commutant_element(
    basis, rng: np.random.Generator, hermitian: bool
) -> np.ndarray:
    n = basis[0].shape[0]
    Y = np.zeros((n, n), dtype=complex)
    for K in basis:
        Y += (rng.standard_normal() + 1j * rng.standard_normal()) * K
    return (Y + dagger(Y)) / 2 if hermitian else Y


def _cluster(values: np.ndarray, gap: float) -> list[np.ndarray]:
    """Indices of consecutive eigenvalues separated by gaps below ``gap``."""
    groups = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or values[i] - values[i - 1] > gap:
            groups.append(np.arange(start, i))
            start = i
    return groups


def irrep_decompose(
    X,
    tol: float = 1e-8,
    seed: int = 0,
    max_attempts: int = 8,
) -> IrrepDecomposition:
    """Decompose a hermitian operator family into irreducible blocks.

    Returns a unitary Q and blocks (e_a, d_a, X_a) such that Q* X_j Q equals
    the direct sum over a of I_{e_a} (x) X_{j,a} within ``tol``; retries with
    fresh randomness when eigenvalue collisions spoil the splitting.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise ValueError("expected a stack of square matrices")
    for Xj in X:
        if frobenius(Xj - dagger(Xj)) > 1e-8 * max(1.0, frobenius(Xj)):
            raise ValueError("irrep_decompose expects hermitian generators")
    n = X.shape[1]
    scale = max(1.0, max(frobenius(Xj) for Xj in X))
    basis = _commutant_basis(X)
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(max_attempts):
        result = _attempt_decomposition(X, basis, rng, n, tol, scale)
        if isinstance(result, IrrepDecomposition):
            return result
        worst = min(worst, result)
    raise ValueError(
        f"irreducible decomposition unverified after {max_attempts} attempts; "
        f"worst off-block mass {worst:.3e}"
    )


def _attempt_decomposition(X, basis, rng, n, tol, scale):
    Y = _random_commutant_element(basis, rng, hermitian=True)
    w, V = np.linalg.eigh(Y)
    clusters = _cluster(w, gap=1e-8 * max(1.0, float(np.abs(w).max())))
    copies = [V[:, idx] for idx in clusters]

    link = _random_commutant_element(basis, rng, hermitian=False)
    r = len(copies)
    # group copies carrying equivalent irreducibles via the linking element
    adjacency = np.zeros((r, r), dtype=bool)
    for i in range(r):
        for j in range(r):
            if i != j:
                adjacency[i, j] = (
                    frobenius(dagger(copies[i]) @ link @ copies[j]) > 1e-6 * scale
                )
    groups = _components(adjacency)

    blocks = []
    columns = []
    for group in groups:
        dims = {copies[i].shape[1] for i in group}
        if len(dims) != 1:
            return 0.0  # collision merged inequivalent copies; retry
        ref = group[0]
        W_ref = copies[ref]
        aligned = [W_ref]
        for t in group[1:]:
            M = dagger(copies[t]) @ link @ W_ref
            overlap = dagger(M) @ M
            c2 = np.trace(overlap).real / M.shape[1]
            if c2 <= 0 or frobenius(overlap - c2 * np.eye(M.shape[1])) > 1e-6 * max(
                1.0, c2
            ) * M.shape[1]:
                return 0.0  # not a scalar multiple of a unitary; retry
            aligned.append(copies[t] @ (M / np.sqrt(c2)))
        gens = np.stack([dagger(W_ref) @ Xj @ W_ref for Xj in X])
        blocks.append(
            IrrepBlock(
                multiplicity=len(group),
                dimension=W_ref.shape[1],
                generators=gens,
            )
        )
        columns.extend(aligned)

    order = sorted(
        range(len(blocks)), key=lambda b: (blocks[b].dimension, blocks[b].multiplicity)
    )
    ordered_blocks = [blocks[b] for b in order]
    col_index = {}
    offset = 0
    for b_idx, blk in enumerate(blocks):
        col_index[b_idx] = offset
        offset += blk.multiplicity
    flat_columns = []
    for b in order:
        base = col_index[b]
        for t in range(blocks[b].multiplicity):
            flat_columns.append(columns[base + t])
    Q = np.hstack(flat_columns)

    # verify the block structure
    residual = 0.0
    for Xj_idx, Xj in enumerate(X):
        T = dagger(Q) @ Xj @ Q
        model = np.zeros_like(T)
        pos = 0
        for blk in ordered_blocks:
            size = blk.multiplicity * blk.dimension
            model[pos : pos + size, pos : pos + size] = kron(
                np.eye(blk.multiplicity), blk.generators[Xj_idx]
            )
            pos += size
        residual = max(residual, frobenius(T - model))
    if residual > tol * scale:
        return residual
    unitarity = frobenius(dagger(Q) @ Q - np.eye(n))
    if unitarity > 1e-8:
        return residual
    return IrrepDecomposition(
        basis_change=Q,
        blocks=tuple(ordered_blocks),
        off_block_residual=float(residual),
    )


def _components(adjacency: np.ndarray) -> list[list[int]]:
    r = adjacency.shape[0]
    seen = [False] * r
    comps = []
    for start in range(r):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in range(r):
                if (adjacency[v, u] or adjacency[u, v]) and not seen[u]:
                    seen[u] = True
                    stack.append(u)
        comps.append(sorted(comp))
    return comps


# ---------------------------------------------------------------------------
# Block-maximally-entangled decomposition of synchronized states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaxEntBlock:
    alice_multiplicity: int
    bob_multiplicity: int
    dimension: int


@dataclass(frozen=True)
class MaxEntReport:
    """Result of matching the two local block structures through the state.

    ``state_residuals[k]`` measures how far the k-th spectral eigenvector of
    the compressed state is from the predicted form  sum_a R_{k,a} (x) I_{d_a};
    ``ef_transpose_residual`` compares compressed E_j with compressed F_j
    transposed in the matched bases (zero for pure states, possibly large for
    mixed ones).
    """

    blocks: tuple[MaxEntBlock, ...]
    state_residuals: np.ndarray
    ef_transpose_residual: float
    sync_residual: float
    alice_isometry: np.ndarray
    bob_isometry: np.ndarray

    @property
    def max_state_residual(self) -> float:
        return float(self.state_residuals.max(initial=0.0))

    def to_json(self) -> dict:
        return {
            "blocks": [
                {"e": b.alice_multiplicity, "f": b.bob_multiplicity, "d": b.dimension}
                for b in self.blocks
            ],
            "stateResiduals": [float(x) for x in self.state_residuals],
            "maxStateResidual": self.max_state_residual,
            "efTransposeResidual": float(self.ef_transpose_residual),
            "syncResidual": float(self.sync_residual),
        }


def maxent_decompose(
    rho: np.ndarray,
    E,
    F,
    dims: BipartiteDims,
    tol: float = 1e-8,
    seed: int = 0,
) -> MaxEntReport:
    """Decompose a state satisfying (E_j (x) I) rho = (I (x) F_j) rho.

    Compresses both sides to the local supports, decomposes the generated
    algebras into irreducible blocks, matches Alice blocks to Bob blocks via
    the matricized eigenvectors of rho (whose blocks are Schur intertwiners),
    and reports the residual of each eigenvector against the block
    maximally-entangled form.
    """
    rho = np.asarray(rho, dtype=complex)
    E = np.asarray(E, dtype=complex)
    F = np.asarray(F, dtype=complex)
    IA, IB = np.eye(dims.dA), np.eye(dims.dB)

    sync = max(
        frobenius(kron(Ej, IB) @ rho - kron(IA, Fj) @ rho) for Ej, Fj in zip(E, F)
    )
    if sync > tol * max(1.0, frobenius(rho)):
        raise ValueError(
            f"sync precondition violated: max ||(E_j x I)rho - (I x F_j)rho|| = {sync:.3e}"
        )

    UA = local_support(rho, dims, "A")
    VB = local_support(rho, dims, "B")
    E_hat = np.stack([compress(Ej, UA) for Ej in E])
    F_hat_t = np.stack([compress(Fj, VB).T for Fj in F])
    dec_A = irrep_decompose(E_hat, tol=tol, seed=seed)
    dec_B = irrep_decompose(F_hat_t, tol=tol, seed=seed + 1)

    U_full = UA.isometry @ dec_A.basis_change
    V_full = VB.isometry @ dec_B.basis_change.conj()
    NA, NB = U_full.shape[1], V_full.shape[1]

    w, vecs = eigh(rho, tol=1e-8)
    keep = w > RANK_CUTOFF
    probs = w[keep]
    psis = vecs[:, keep]

    rng = np.random.default_rng(seed + 2)
    combo = np.zeros((dims.dA, dims.dB), dtype=complex)
    for k in range(probs.size):
        g = rng.standard_normal() + 1j * rng.standard_normal()
        combo += g * matricize(psis[:, k], dims)
    T = dagger(U_full) @ combo @ V_full.conj()

    a_offsets = _block_offsets(dec_A.blocks)
    b_offsets = _block_offsets(dec_B.blocks)

    match: dict[int, int] = {}
    intertwiners: dict[int, np.ndarray] = {}
    for ai, ablk in enumerate(dec_A.blocks):
        found = None
        for bi, bblk in enumerate(dec_B.blocks):
            if bblk.dimension != ablk.dimension:
                continue
            Z = _best_intertwiner(T, ablk, bblk, a_offsets[ai], b_offsets[bi])
            if Z is None:
                continue
            if found is not None:
                raise ValueError("block matching failure: ambiguous match")
            found = bi
            intertwiners[ai] = Z
        if found is None:
            raise ValueError(
                f"block matching failure: Alice block {ai} has no Bob partner"
            )
        if found in match.values():
            raise ValueError("block matching failure: Bob block matched twice")
        match[ai] = found
    if len(match) != len(dec_B.blocks):
        raise ValueError("block matching failure: unmatched Bob blocks remain")

    # realign and reorder Bob's basis columns to Alice's block order
    new_cols = []
    for ai, ablk in enumerate(dec_A.blocks):
        bi = match[ai]
        bblk = dec_B.blocks[bi]
        Z = intertwiners[ai]
        cols = V_full[:, b_offsets[bi] : b_offsets[bi] + bblk.multiplicity * bblk.dimension]
        new_cols.append(cols @ kron(np.eye(bblk.multiplicity), Z.T))
    V_matched = np.hstack(new_cols)

    blocks = tuple(
        MaxEntBlock(
            alice_multiplicity=dec_A.blocks[ai].multiplicity,
            bob_multiplicity=dec_B.blocks[match[ai]].multiplicity,
            dimension=dec_A.blocks[ai].dimension,
        )
        for ai in range(len(dec_A.blocks))
    )

    # per-eigenvector residual against the predicted block structure
    residuals = np.zeros(probs.size)
    for k in range(probs.size):
        M = dagger(U_full) @ matricize(psis[:, k], dims) @ V_matched.conj()
        model = np.zeros_like(M)
        a_pos = 0
        b_pos = 0
        for blk in blocks:
            da = blk.dimension
            for p in range(blk.alice_multiplicity):
                for q in range(blk.bob_multiplicity):
                    sub = M[
                        a_pos + p * da : a_pos + (p + 1) * da,
                        b_pos + q * da : b_pos + (q + 1) * da,
                    ]
                    model[
                        a_pos + p * da : a_pos + (p + 1) * da,
                        b_pos + q * da : b_pos + (q + 1) * da,
                    ] = (np.trace(sub) / da) * np.eye(da)
            a_pos += blk.alice_multiplicity * da
            b_pos += blk.bob_multiplicity * da
        residuals[k] = frobenius(M - model)

    # compressed-E versus transposed compressed-F comparison in matched bases
    if NA == NB:
        ef = max(
            frobenius(
                dagger(U_full) @ Ej @ U_full
                - (dagger(V_matched) @ Fj @ V_matched).T
            )
            for Ej, Fj in zip(E, F)
        )
    else:
        ef = np.inf

    return MaxEntReport(
        blocks=blocks,
        state_residuals=residuals,
        ef_transpose_residual=float(ef),
        sync_residual=float(sync),
        alice_isometry=U_full,
        bob_isometry=V_matched,
    )


def _block_offsets(blocks) -> list[int]:
    offsets = []
    pos = 0
    for blk in blocks:
        offsets.append(pos)
        pos += blk.multiplicity * blk.dimension
    return offsets


def _best_intertwiner(T, ablk, bblk, a_off, b_off):
    """Largest copy-to-copy block of T between two irrep blocks, unitarized.

    Returns None when all blocks are negligible (inequivalent irreps)."""
    da = ablk.dimension
    best, best_norm = None, 0.0
    for p in range(ablk.multiplicity):
        for q in range(bblk.multiplicity):
            sub = T[
                a_off + p * da : a_off + (p + 1) * da,
                b_off + q * da : b_off + (q + 1) * da,
            ]
            norm = frobenius(sub)
            if norm > best_norm:
                best, best_norm = sub, norm
    if best is None or best_norm <= 1e-8:
        return None
    overlap = dagger(best) @ best
    c2 = np.trace(overlap).real / da
    if c2 <= 0 or frobenius(overlap - c2 * np.eye(da)) > 1e-6 * max(1.0, c2) * da:
        return None
    return best / np.sqrt(c2)


# ---------------------------------------------------------------------------
# Full optimality-relation audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertificationReport:
    """Residuals of every relation implied by reaching the quantum value.

    When ``optimal`` is False the relations are not implied and the report is
    advisory only.
    """

    d: int
    bell_value: float
    optimal: bool
    advisory: bool
    tol: float
    sync_pair_residual: float
    sync_povm_residual: float
    b_relations: RelationReport
    a_projectivity_residual: float
    a_orthogonality_residual: float
    c_sync_residual: float
    c_relations: RelationReport
    povm_c_residual: float

    @property
    def max_residual(self) -> float:
        return max(
            self.sync_pair_residual,
            self.sync_povm_residual,
            self.b_relations.max_residual,
            self.a_projectivity_residual,
            self.a_orthogonality_residual,
            self.c_sync_residual,
            self.c_relations.max_residual,
            self.povm_c_residual,
        )

    @property
    def passed(self) -> bool:
        return self.optimal and self.max_residual <= self.tol * max(1.0, self.d**2)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "bellValue": self.bell_value,
            "optimal": self.optimal,
            "advisory": self.advisory,
            "passed": self.passed,
            "maxResidual": self.max_residual,
            "syncPairResidual": self.sync_pair_residual,
            "syncPovmResidual": self.sync_povm_residual,
            "bRelations": self.b_relations.to_json(),
            "aProjectivityResidual": self.a_projectivity_residual,
            "aOrthogonalityResidual": self.a_orthogonality_residual,
            "cSyncResidual": self.c_sync_residual,
            "cRelations": self.c_relations.to_json(),
            "povmCResidual": self.povm_c_residual,
        }


def dual_alice_operators(strategy: Strategy, S: GramMatrix) -> np.ndarray:
    """Operators C_j = (1/d^2)(d I + sum_{k != j} +-sqrt(1-s_jk)(A1 - A2)).

    The pair difference enters antisymmetrically: for k < j the (k, j)
    setting contributes with outcomes swapped, so that at the quantum value
    (C_j (x) I) rho = (I (x) B_j) rho holds for every j.
    """
    d = S.d
    n = strategy.n_outcomes
    dA = strategy.dims.dA
    diff = {}
    for p, (j, k) in enumerate(strategy.pairs):
        A1, A2 = strategy.alice_pair_effects[p]
        diff[(j, k)] = A1 - A2
    C = np.zeros((n, dA, dA), dtype=complex)
    for j in range(n):
        total = d * np.eye(dA, dtype=complex)
        for k in range(n):
            if k == j:
                continue
            c = np.sqrt(max(0.0, 1.0 - S.s[j, k]))
            if j < k:
                total += c * diff[(j, k)]
            else:
                total -= c * diff[(k, j)]
        C[j] = total / (d * d)
    return C


def verify_certification(
    strategy: Strategy, S: GramMatrix, tol: float = 1e-9
) -> CertificationReport:
    """Audit every optimality relation of a strategy against S.

    Checks the two state relations, the compressed-measurement algebra
    relations on both sides, the dual operators C_j (state relation plus
    algebra relations), and the povm-block identity A^povm_j = (1/d) C_j on
    the compressed space.  For strategies below the quantum value the report
    is advisory.
    """
    d = S.d
    n = strategy.n_outcomes
    rho = strategy.rho
    IA, IB = np.eye(strategy.dims.dA), np.eye(strategy.dims.dB)
    value = bell_value(strategy, S).value
    optimal = abs(value - d * d) <= tol * max(1.0, d * d)

    sync_pair = 0.0
    for p, (j, k) in enumerate(strategy.pairs):
        A1, A2 = strategy.alice_pair_effects[p]
        c = np.sqrt(max(0.0, 1.0 - S.s[j, k]))
        lhs = c * kron(A1 - A2, IB) @ rho
        rhs = kron(IA, strategy.bob[j] - strategy.bob[k]) @ rho
        sync_pair = max(sync_pair, frobenius(lhs - rhs))
    sync_povm = max(
        frobenius(kron(strategy.alice_povm[j], IB - strategy.bob[j]) @ rho)
        for j in range(n)
    )

    UA = local_support(rho, strategy.dims, "A")
    VB = local_support(rho, strategy.dims, "B")

    B_hat = np.stack([compress(Bj, VB) for Bj in strategy.bob])
    b_relations = check_as_relations(B_hat, S, tol=tol, variant="standard")

    a_proj = 0.0
    a_ortho = 0.0
    for p in range(len(strategy.pairs)):
        A1h = compress(strategy.alice_pair_effects[p, 0], UA)
        A2h = compress(strategy.alice_pair_effects[p, 1], UA)
        a_proj = max(
            a_proj, frobenius(A1h @ A1h - A1h), frobenius(A2h @ A2h - A2h)
        )
        a_ortho = max(a_ortho, frobenius(A1h @ A2h))

    C = dual_alice_operators(strategy, S)
    c_sync = max(
        frobenius(kron(C[j], IB) @ rho - kron(IA, strategy.bob[j]) @ rho)
        for j in range(n)
    )
    C_hat = np.stack([compress(Cj, UA) for Cj in C])
    c_relations = check_as_relations(C_hat, S, tol=tol, variant="standard")

    povm_c = max(
        frobenius(compress(strategy.alice_povm[j], UA) - C_hat[j] / d)
        for j in range(n)
    )

    return CertificationReport(
        d=d,
        bell_value=value,
        optimal=optimal,
        advisory=not optimal,
        tol=tol,
        sync_pair_residual=float(sync_pair),
        sync_povm_residual=float(sync_povm),
        b_relations=b_relations,
        a_projectivity_residual=float(a_proj),
        a_orthogonality_residual=float(a_ortho),
        c_sync_residual=float(c_sync),
        c_relations=c_relations,
        povm_c_residual=float(povm_c),
    )
