"""Balanced informationally complete POVMs.

A BIC-POVM on C^d is a d^2-outcome POVM (1/d) P_j whose rank-one projections
P_j = |e_j><e_j| form a basis of the d x d matrices and sum to d*I.  Two
constructions are provided: the shift-and-phase covariant orbit of a fiducial
vector, and a generic seeded construction that works in every dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, dagger, eigh, frobenius


@dataclass(frozen=True)
class BicPovm:
    """Dimension d plus the d^2 unit vectors whose projections define the POVM."""

    d: int
    vectors: np.ndarray  # shape (d^2, d), row j is e_j

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.shape != (self.d * self.d, self.d):
            raise ValueError(f"expected {self.d * self.d} vectors in C^{self.d}")
        object.__setattr__(self, "vectors", v)

    def projections(self) -> np.ndarray:
        """Stack of the rank-one projections P_j, shape (d^2, d, d)."""
        return np.einsum("ja,jb->jab", self.vectors, self.vectors.conj())

    def effects(self) -> np.ndarray:
        """POVM effects (1/d) P_j."""
        return self.projections() / self.d


@dataclass(frozen=True)
class GramMatrix:
    """The d^2 x d^2 real matrix with entries s_jk = tr(P_j P_k)."""

    d: int
    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        n = self.d * self.d
        if s.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix")
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.d * self.d


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    residual: float
    worst: object = None


@dataclass(frozen=True)
class ValidationReport:
    """Pass/fail per axiom with the worst offender and its residual."""

    checks: dict[str, CheckResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": {
                name: {
                    "passed": c.passed,
                    "residual": float(c.residual),
                    "worst": _jsonable(c.worst),
                }
                for name, c in self.checks.items()
            },
        }


def _jsonable(x):
    if x is None or isinstance(x, (int, float, str, bool)):
        return x
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return str(x)


def weyl_operator(d: int, p: int, q: int) -> np.ndarray:
    """Shift-and-phase unitary U_{p,q} = sum_j w^{jq} |j+p><j| with w = e^{2 pi i/d}."""
    if d < 1:
        raise ValueError("d must be >= 1")
    p, q = p % d, q % d
    U = np.zeros((d, d), dtype=complex)
    omega = np.exp(2j * np.pi / d)
    for j in range(d):
        U[(j + p) % d, j] = omega ** (j * q)
    return U


def weyl_overlaps(d: int, psi: np.ndarray) -> np.ndarray:
    """All inner products <psi|U_{p,q}|psi>, indexed [p, q]."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != d:
        raise ValueError("fiducial length does not match d")
    out = np.empty((d, d), dtype=complex)
    j = np.arange(d)
    omega = np.exp(2j * np.pi / d)
    for p in range(d):
        shifted = psi[(j + p) % d].conj() * psi
        for q in range(d):
            out[p, q] = np.sum(omega ** (j * q) * shifted)
    return out


def geometric_fiducial(d: int, r: float, t: float) -> np.ndarray:
    """Normalized sum_k alpha^k |k> with alpha = r e^{2 pi i t}.

    Requires r in (0, 1/2); for even d, t must stay off the lattice
    (1/(2d)) Z, where the orbit fails to be informationally complete.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not (0.0 < r < 0.5):
        raise ValueError(f"r must lie in (0, 1/2), got {r}")
    if d % 2 == 0:
        lattice = round(2 * d * t) / (2 * d)
        if abs(t - lattice) <= 1e-12:
            raise ValueError(
                f"t={t} lies on the lattice (1/(2d))Z for even d={d}; "
                "the covariant orbit of this fiducial is not informationally complete"
            )
    alpha = r * np.exp(2j * np.pi * t)
    psi = alpha ** np.arange(d)
    return psi / np.linalg.norm(psi)


def construct_weyl_bic(d: int, psi: np.ndarray) -> BicPovm:
    """Covariant BIC-POVM with vectors U_{p,q}|psi>, ordered by (p,q) lexicographic.

    Raises if any orbit overlap <psi|U_{p,q}|psi> vanishes (informational
    completeness failure), naming the offending (p, q) pairs.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != d:
        raise ValueError("fiducial length does not match d")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("fiducial vector must be normalized")
    overlaps = weyl_overlaps(d, psi)
    bad = [(p, q) for p in range(d) for q in range(d) if abs(overlaps[p, q]) < 1e-10]
    if bad:
        raise ValueError(
            "fiducial fails informational completeness: vanishing overlap at "
            + ", ".join(str(pq) for pq in bad)
        )
    vectors = np.stack(
        [weyl_operator(d, p, q) @ psi for p in range(d) for q in range(d)]
    )
    return BicPovm(d=d, vectors=vectors)


def equalize_diagonal(P: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unitary U such that diag(U P U*) is constant, equal to tr(P)/n.

    Uses at most n-1 exact two-index rotations; each rotation picks an index
    below the mean and one above and sets the first exactly to the mean.
    """
    P = np.asarray(P, dtype=complex)
    n = P.shape[0]
    if not np.allclose(P, dagger(P), atol=1e-10 * max(1.0, frobenius(P))):
        raise ValueError("equalize_diagonal expects a hermitian matrix")
    mu = np.trace(P).real / n
    M = P.copy()
    U = np.eye(n, dtype=complex)
    active = list(range(n))
    scale = max(1.0, abs(mu))
    for _ in range(n - 1):
        diag = M.diagonal().real
        low = [i for i in active if diag[i] < mu - tol * scale]
        high = [i for i in active if diag[i] > mu + tol * scale]
        if not low or not high:
            break
        i, j = low[0], high[0]
        R = _fixing_rotation(diag[i], diag[j], M[i, j], mu)
        G = np.eye(n, dtype=complex)
        G[np.ix_([i, j], [i, j])] = R
        M = G @ M @ dagger(G)
        U = G @ U
        active.remove(i)
    return U


def _fixing_rotation(a: float, c: float, b: complex, mu: float) -> np.ndarray:
    """2x2 unitary R with (R m R*)_{00} = mu for m = [[a, b], [conj(b), c]]."""
    phi = 0.0 if b == 0 else -np.angle(b)
    amp = np.hypot((a - c) / 2, abs(b))
    kappa = mu - (a + c) / 2
    gamma = np.arctan2((a - c) / 2, abs(b))
    base = np.arcsin(np.clip(kappa / amp, -1.0, 1.0))
    for s in (base, np.pi - base):
        theta = (s - gamma) / 2
        ct, st = np.cos(theta), np.sin(theta)
        value = a * ct**2 + c * st**2 + 2 * ct * st * (np.exp(1j * phi) * b).real
        if abs(value - mu) <= 1e-9 * max(1.0, abs(mu)):
            return np.array(
                [[ct, st * np.exp(-1j * phi)], [-st * np.exp(1j * phi), ct]],
                dtype=complex,
            )
    raise ValueError("no rotation angle found; mean outside [min, max] bracket")


def construct_generic_bic(d: int, seed: int, max_attempts: int = 32) -> BicPovm:
    """Seeded generic BIC-POVM in any dimension d >= 2.

    Pipeline: random full-rank d^2 x d matrix -> column orthonormalization ->
    rank-d projection -> unitary equalizing the diagonal to 1/d -> G = d * K3
    -> factor G = V* V and read the vectors off the columns of V.  Retries
    with fresh randomness until the Schur product G o conj(G) is invertible.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = np.random.default_rng(seed)
    n = d * d
    worst_cond = 0.0
    for _ in range(max_attempts):
        K0 = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        K1, _ = np.linalg.qr(K0)
        K2 = K1 @ dagger(K1)
        U = equalize_diagonal(K2)
        K3 = U @ K2 @ dagger(U)
        G = d * K3
        S = (G * G.conj()).real
        w = np.linalg.eigvalsh((S + S.T) / 2)
        if w[0] > 1e-10 * max(1.0, w[-1]):
            vectors = _factor_gram(G, d)
            return BicPovm(d=d, vectors=vectors)
        worst_cond = max(worst_cond, w[-1] / max(w[0], np.finfo(float).tiny))
    raise ValueError(
        f"generic construction failed after {max_attempts} attempts; "
        f"Schur-product condition number reached {worst_cond:.3e}"
    )


def _factor_gram(G: np.ndarray, d: int) -> np.ndarray:
    """Vectors (rows) whose Gram matrix is G, via the top-d eigenpairs."""
    w, W = eigh(G, tol=1e-8)
    lam = w[-d:]
    V = (W[:, -d:] * np.sqrt(lam)).conj()  # row j = e_j with <e_j|e_k> = G_jk
    residual = frobenius(V.conj() @ V.T - G)
    if residual > 1e-9 * max(1.0, frobenius(G)):
        raise ValueError(f"gram factorization residual {residual:.3e} too large")
    return V


def gram(povm: BicPovm) -> GramMatrix:
    """The induced matrix S with s_jk = |<e_j|e_k>|^2."""
    overlaps = povm.vectors.conj() @ povm.vectors.T
    return GramMatrix(d=povm.d, s=np.abs(overlaps) ** 2)


def validate_bic(povm: BicPovm, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check the BIC axioms: unit norms, sum_j P_j = d*I, invertible Gram."""
    d = povm.d
    norms = np.linalg.norm(povm.vectors, axis=1)
    norm_res = np.abs(norms - 1.0)
    worst_norm = int(np.argmax(norm_res))

    P = povm.projections()
    total = P.sum(axis=0)
    sum_res = frobenius(total - d * np.eye(d))

    S = gram(povm).s
    w = np.linalg.eigvalsh((S + S.T) / 2)
    min_eig = float(w[0])

    checks = {
        "unit_norms": CheckResult(
            bool(norm_res[worst_norm] <= 1e-10), float(norm_res[worst_norm]), worst_norm
        ),
        "sum_to_d_identity": CheckResult(bool(sum_res <= tol * d), float(sum_res)),
        "gram_invertible": CheckResult(
            bool(min_eig > tol * max(1.0, w[-1])), min_eig
        ),
    }
    return ValidationReport(checks=checks)


def validate_gram(gm: GramMatrix, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check the induced-matrix laws: unit diagonal, off-diagonal in [0,1),
    positive definiteness, column sums d, and connectivity of the
    nonzero-overlap graph."""
    S, d, n = gm.s, gm.d, gm.n
    diag_res = float(np.max(np.abs(np.diagonal(S) - 1.0)))
    off = S.copy()
    np.fill_diagonal(off, 0.5)  # midpoint, never the offender
    lo = float(off.min())
    hi = float(off.max())
    off_ok = lo >= -tol and hi < 1.0 - tol
    off_violation = max(0.0, -lo, hi - (1.0 - tol))
    worst_off = tuple(int(x) for x in np.unravel_index(np.argmax(off), off.shape))

    w = np.linalg.eigvalsh((S + S.T) / 2)
    min_eig = float(w[0])

    col_res = np.abs(S.sum(axis=0) - d)
    worst_col = int(np.argmax(col_res))

    adjacency = S > tol
    np.fill_diagonal(adjacency, False)
    connected = _connected(adjacency)

    checks = {
        "unit_diagonal": CheckResult(bool(diag_res <= tol), diag_res),
        "offdiagonal_range": CheckResult(bool(off_ok), off_violation, worst_off),
        "positive_definite": CheckResult(bool(min_eig > tol * max(1.0, w[-1])), min_eig),
        "column_sums": CheckResult(
            bool(col_res[worst_col] <= tol * d), float(col_res[worst_col]), worst_col
        ),
        "connected": CheckResult(bool(connected), 0.0 if connected else 1.0),
    }
    return ValidationReport(checks=checks)


def _connected(adjacency: np.ndarray) -> bool:
    n = adjacency.shape[0]
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for u in np.flatnonzero(adjacency[v]):
            if not seen[u]:
                seen[u] = True
                stack.append(int(u))
    return bool(seen.all())


# ---------------------------------------------------------------------------
# JSON formats
# ---------------------------------------------------------------------------

def povm_to_json(povm: BicPovm) -> dict:
    return {
        "d": povm.d,
        "vectors": [
            [[float(z.real), float(z.imag)] for z in row] for row in povm.vectors
        ],
    }


def povm_from_json(obj: dict) -> BicPovm:
    d = int(obj["d"])
    vectors = np.array(
        [[complex(re, im) for re, im in row] for row in obj["vectors"]]
    )
    return BicPovm(d=d, vectors=vectors)


def gram_to_json(gm: GramMatrix) -> dict:
    return {"d": gm.d, "s": [[float(x) for x in row] for row in gm.s]}


def gram_from_json(obj: dict) -> GramMatrix:
    return GramMatrix(d=int(obj["d"]), s=np.array(obj["s"], dtype=float))
