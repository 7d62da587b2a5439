"""The Bell scenario built on a BIC-POVM.

Alice has one three-outcome setting per pair (j,k) of outcome labels plus a
single d^2-outcome setting ("povm"); Bob has d^2 binary settings.  The Bell
operator W_d attains the quantum value d^2, certified by the exact operator
identity W_d + Theta_d = d^2 * I with Theta_d a sum of manifestly positive
terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bic import BicPovm, CheckResult, GramMatrix, ValidationReport
from .linalg import (
    DEFAULT_TOL,
    BipartiteDims,
    dagger,
    eigh,
    frobenius,
    kron,
    matrix_from_json,
    matrix_to_json,
    maximally_entangled,
)

PERP = "perp"


def pair_list(n: int) -> tuple[tuple[int, int], ...]:
    """All (j, k) with 0 <= j < k < n, lexicographic."""
    return tuple((j, k) for j in range(n) for k in range(j + 1, n))


@dataclass(frozen=True)
class ScenarioShape:
    """Setting and outcome labels of the scenario for a given d (1-based)."""

    d: int
    pair_settings: tuple[tuple[int, int], ...]
    bob_settings: tuple[int, ...]
    pair_outcomes: tuple[str, ...] = ("1", "2", PERP)
    bob_outcomes: tuple[str, ...] = ("1", PERP)

    @property
    def alice_settings(self) -> tuple:
        return self.pair_settings + ("povm",)

    @property
    def povm_outcomes(self) -> tuple[int, ...]:
        return tuple(range(1, self.d * self.d + 1))


def scenario_shape(d: int) -> ScenarioShape:
    """Measurement settings of the scenario: d^2(d^2-1)/2 pair settings plus
    the povm setting for Alice, and d^2 binary settings for Bob."""
    if d < 2:
        raise ValueError("d must be >= 2")
    n = d * d
    pairs = tuple((j + 1, k + 1) for j, k in pair_list(n))
    return ScenarioShape(d=d, pair_settings=pairs, bob_settings=tuple(range(1, n + 1)))


@dataclass(frozen=True)
class Strategy:
    """A quantum strategy: state, Alice's pair-setting and povm effects, Bob's effects.

    ``alice_pair_effects[p]`` holds (A1, A2) for the p-th pair in ``pairs``;
    the third outcome is I - A1 - A2.  ``bob[j]`` is the first effect of
    Bob's binary setting j; the second is I - bob[j].
    """

    dims: BipartiteDims
    rho: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    alice_pair_effects: np.ndarray  # (n_pairs, 2, dA, dA)
    alice_povm: np.ndarray          # (n_outcomes, dA, dA)
    bob: np.ndarray                 # (n_outcomes, dB, dB)

    def __post_init__(self):
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=complex))
        object.__setattr__(
            self, "alice_pair_effects", np.asarray(self.alice_pair_effects, dtype=complex)
        )
        object.__setattr__(self, "alice_povm", np.asarray(self.alice_povm, dtype=complex))
        object.__setattr__(self, "bob", np.asarray(self.bob, dtype=complex))

    @property
    def n_outcomes(self) -> int:
        return self.bob.shape[0]

    @property
    def d(self) -> int:
        return math.isqrt(self.n_outcomes)

    def pair_effects(self, j: int, k: int) -> tuple[np.ndarray, np.ndarray]:
        p = self.pairs.index((j, k))
        return self.alice_pair_effects[p, 0], self.alice_pair_effects[p, 1]


@dataclass(frozen=True)
class Correlation:
    """Full outcome probability table of a strategy.

    ``pair_probs[p, y, a, b]`` is p(a,b | pair p, y) with a in (1, 2, perp)
    and b in (1, perp); ``povm_probs[a, y, b]`` covers the povm setting.
    """

    n_outcomes: int
    pairs: tuple[tuple[int, int], ...]
    pair_probs: np.ndarray
    povm_probs: np.ndarray

    def alice_pair_marginal(self, p: int, a: int) -> float:
        return float(self.pair_probs[p, 0, a, :].sum())

    def alice_povm_marginal(self, a: int) -> float:
        return float(self.povm_probs[a, 0, :].sum())

    def bob_marginal(self, y: int) -> float:
        return float(self.povm_probs[:, y, 0].sum())


@dataclass(frozen=True)
class BellReport:
    """Bell value with the four summand groups of the Bell function."""

    value: float
    quantum_bound: float
    gap: float
    term_breakdown: dict[str, float]

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "quantumBound": self.quantum_bound,
            "gap": self.gap,
            "termBreakdown": dict(self.term_breakdown),
        }


@dataclass(frozen=True)
class SosReport:
    """Residuals of the sum-of-squares certificate at a strategy."""

    identity_residual: float
    theta_min_eigenvalue: float
    theta_rho_residual: float

    def to_json(self) -> dict:
        return {
            "identityResidual": self.identity_residual,
            "thetaMinEigenvalue": self.theta_min_eigenvalue,
            "thetaRhoResidual": self.theta_rho_residual,
        }


def reference_strategy(povm: BicPovm) -> Strategy:
    """The d-dimensional optimal strategy for the scenario induced by ``povm``.

    Shares the maximally entangled state; Bob measures the rank-one
    projections B_j = |e_j><e_j|; Alice's pair effects are the transposed
    eigenprojections of B_j - B_k (eigenvalues +-sqrt(1-s_jk)), and her povm
    effects are (1/d) B_j^t.  All transposes are in the computational basis.
    """
    d = povm.d
    n = d * d
    B = povm.projections()
    pairs = pair_list(n)
    pair_effects = np.zeros((len(pairs), 2, d, d), dtype=complex)
    for p, (j, k) in enumerate(pairs):
        s_jk = float(np.abs(np.vdot(povm.vectors[j], povm.vectors[k])) ** 2)
        if s_jk >= 1.0 - 1e-12:
            raise ValueError(
                f"degenerate pair ({j}, {k}): overlap s_jk={s_jk} is too close to 1"
            )
        w, V = eigh(B[j] - B[k])
        top, bottom = w[-1], w[0]
        if top < 1e-12 or bottom > -1e-12:
            raise ValueError(f"pair ({j}, {k}) difference lacks a +/- eigenvalue pair")
        a1 = V[:, -1]
        a2 = V[:, 0]
        pair_effects[p, 0] = np.outer(a1, a1.conj()).T
        pair_effects[p, 1] = np.outer(a2, a2.conj()).T
    phi = maximally_entangled(d)
    return Strategy(
        dims=BipartiteDims(d, d),
        rho=np.outer(phi, phi.conj()),
        pairs=pairs,
        alice_pair_effects=pair_effects,
        alice_povm=B.transpose(0, 2, 1) / d,
        bob=B,
    )


def _check_dims(strategy: Strategy, S: GramMatrix) -> None:
    if strategy.n_outcomes != S.n:
        raise ValueError(
            f"strategy has {strategy.n_outcomes} outcomes, S expects {S.n}"
        )


def _bell_terms(strategy: Strategy, S: GramMatrix) -> dict[str, np.ndarray]:
    """The four summand groups of W_d as operators on H_A (x) H_B."""
    _check_dims(strategy, S)
    d = S.d
    dA, dB = strategy.dims.dA, strategy.dims.dB
    IA, IB = np.eye(dA), np.eye(dB)
    n = strategy.n_outcomes
    s = S.s

    pair_corr = np.zeros((dA * dB, dA * dB), dtype=complex)
    pair_marginal = np.zeros_like(pair_corr)
    for p, (j, k) in enumerate(strategy.pairs):
        A1, A2 = strategy.alice_pair_effects[p]
        c = np.sqrt(1.0 - s[j, k])
        pair_corr += 2.0 * c * kron(A1 - A2, strategy.bob[j] - strategy.bob[k])
        pair_marginal -= (1.0 - s[j, k]) * kron(A1 + A2, IB)
    bob_marginal = -d * (d - 2) * kron(IA, strategy.bob.sum(axis=0))
    povm_mismatch = np.zeros_like(pair_corr)
    for j in range(n):
        povm_mismatch -= kron(strategy.alice_povm[j], IB - strategy.bob[j])
    return {
        "pair_correlation": pair_corr,
        "pair_marginal_penalty": pair_marginal,
        "bob_marginal_penalty": bob_marginal,
        "povm_mismatch_penalty": povm_mismatch,
    }


def bell_operator(strategy: Strategy, S: GramMatrix) -> np.ndarray:
    """Assemble the Bell operator W_d of the strategy's effects."""
    terms = _bell_terms(strategy, S)
    return sum(terms.values())


def bell_value(strategy: Strategy, S: GramMatrix) -> BellReport:
    """tr(W_d rho), with the per-term breakdown."""
    terms = _bell_terms(strategy, S)
    breakdown = {
        name: float(np.trace(term @ strategy.rho).real) for name, term in terms.items()
    }
    value = sum(breakdown.values())
    d2 = float(S.d * S.d)
    return BellReport(
        value=value, quantum_bound=d2, gap=d2 - value, term_breakdown=breakdown
    )


def sos_theta(strategy: Strategy, S: GramMatrix) -> np.ndarray:
    """The five-term positive certificate Theta_d with W_d + Theta_d = d^2 I.

    The identity is purely algebraic: it holds for arbitrary hermitian
    operator tuples, POVM-valid or not.
    """
    _check_dims(strategy, S)
    d = S.d
    dA, dB = strategy.dims.dA, strategy.dims.dB
    IA, IB = np.eye(dA), np.eye(dB)
    s = S.s
    n = strategy.n_outcomes

    theta = np.zeros((dA * dB, dA * dB), dtype=complex)
    for p, (j, k) in enumerate(strategy.pairs):
        A1, A2 = strategy.alice_pair_effects[p]
        c = np.sqrt(1.0 - s[j, k])
        hybrid = c * kron(A1 - A2, IB) - kron(IA, strategy.bob[j] - strategy.bob[k])
        theta += hybrid @ hybrid
        diff = A1 - A2
        theta += (1.0 - s[j, k]) * kron(A1 + A2 - diff @ diff, IB)
    completeness = d * kron(IA, IB) - kron(IA, strategy.bob.sum(axis=0))
    theta += completeness @ completeness
    for j in range(n):
        Bj = strategy.bob[j]
        theta += kron(strategy.alice_povm[j], IB - Bj)
        theta += d * d * kron(IA, Bj - Bj @ Bj)
    return theta


def sos_certificate(strategy: Strategy, S: GramMatrix) -> SosReport:
    """Residuals of W_d + Theta_d = d^2 I, positivity of Theta_d, and Theta_d rho = 0."""
    W = bell_operator(strategy, S)
    theta = sos_theta(strategy, S)
    d2 = S.d * S.d
    identity_residual = frobenius(W + theta - d2 * np.eye(W.shape[0]))
    w = np.linalg.eigvalsh((theta + dagger(theta)) / 2)
    return SosReport(
        identity_residual=float(identity_residual),
        theta_min_eigenvalue=float(w[0]),
        theta_rho_residual=float(frobenius(theta @ strategy.rho)),
    )


def correlation(strategy: Strategy) -> Correlation:
    """The full probability table p(a,b|x,y) = tr[rho (A^x_a (x) B^y_b)]."""
    dA, dB = strategy.dims.dA, strategy.dims.dB
    rho4 = strategy.rho.reshape(dA, dB, dA, dB)
    n = strategy.n_outcomes
    IA, IB = np.eye(dA), np.eye(dB)

    bob_effects = np.stack([strategy.bob, IB - strategy.bob], axis=1)  # (n, 2, dB, dB)

    n_pairs = len(strategy.pairs)
    alice_pair = np.zeros((n_pairs, 3, dA, dA), dtype=complex)
    alice_pair[:, :2] = strategy.alice_pair_effects
    alice_pair[:, 2] = IA - strategy.alice_pair_effects.sum(axis=1)

    # tr[rho (X (x) Y)] = sum rho[a,b,a',b'] X[a',a] Y[b',b]
    pair_probs = np.einsum(
        "abcd,xuca,yvdb->xyuv", rho4, alice_pair, bob_effects, optimize=True
    ).real
    povm_probs = np.einsum(
        "abcd,uca,yvdb->uyv", rho4, strategy.alice_povm, bob_effects, optimize=True
    ).real
    return Correlation(
        n_outcomes=n,
        pairs=strategy.pairs,
        pair_probs=pair_probs,
        povm_probs=povm_probs,
    )


def validate_correlation(corr: Correlation, tol: float = 1e-10) -> ValidationReport:
    """Nonnegativity, normalization per setting pair, and no-signaling."""
    lo = min(float(corr.pair_probs.min()), float(corr.povm_probs.min()))
    norm_pair = np.abs(corr.pair_probs.sum(axis=(2, 3)) - 1.0)
    norm_povm = np.abs(corr.povm_probs.sum(axis=(0, 2)) - 1.0)
    norm_res = max(float(norm_pair.max()), float(norm_povm.max()))

    # Alice marginals must not depend on y; Bob marginals must not depend on x.
    a_pair = corr.pair_probs.sum(axis=3)  # (n_pairs, y, a)
    a_res = float(np.abs(a_pair - a_pair[:, :1, :]).max())
    a_povm = corr.povm_probs.sum(axis=2)  # (a, y)
    a_res = max(a_res, float(np.abs(a_povm - a_povm[:, :1]).max()))
    b_pair = corr.pair_probs.sum(axis=2)  # (x, y, b)
    b_povm = corr.povm_probs.sum(axis=0)  # (y, b)
    b_ref = b_povm[None, :, :]
    b_res = float(np.abs(b_pair - b_ref).max())

    checks = {
        "nonnegative": CheckResult(bool(lo >= -tol), max(0.0, -lo)),
        "normalized": CheckResult(bool(norm_res <= tol), norm_res),
        "no_signaling_alice": CheckResult(bool(a_res <= tol), a_res),
        "no_signaling_bob": CheckResult(bool(b_res <= tol), b_res),
    }
    return ValidationReport(checks=checks)


def bell_value_from_correlation(corr: Correlation, S: GramMatrix, d: int) -> float:
    """Evaluate the Bell function directly on a probability table.

    Alice's marginals are read against Bob's first setting and Bob's against
    Alice's povm setting; no-signaling makes both choices immaterial for
    valid tables.
    """
    n = d * d
    if corr.n_outcomes != n:
        raise ValueError("correlation table does not match d")
    s = S.s
    value = 0.0
    for p, (j, k) in enumerate(corr.pairs):
        c = math.sqrt(1.0 - s[j, k])
        value += 2.0 * c * (
            corr.pair_probs[p, j, 0, 0]
            + corr.pair_probs[p, k, 1, 0]
            - corr.pair_probs[p, k, 0, 0]
            - corr.pair_probs[p, j, 1, 0]
        )
        value -= (1.0 - s[j, k]) * (
            corr.alice_pair_marginal(p, 0) + corr.alice_pair_marginal(p, 1)
        )
    value -= d * (d - 2) * sum(corr.bob_marginal(y) for y in range(n))
    value -= sum(corr.povm_probs[j, j, 1] for j in range(n))
    return float(value)


def random_strategy(dims: BipartiteDims, d: int, seed: int) -> Strategy:
    """Seeded random strategy with full-support POVMs.

    Effects are Ginibre squares normalized by the inverse square root of
    their sum; the state is a normalized Ginibre square.
    """
    rng = np.random.default_rng(seed)
    n = d * d
    G = rng.standard_normal((dims.total, dims.total)) + 1j * rng.standard_normal(
        (dims.total, dims.total)
    )
    rho = G @ dagger(G)
    rho /= np.trace(rho).real

    pairs = pair_list(n)
    pair_effects = np.stack(
        [_random_povm(dims.dA, 3, rng)[:2] for _ in pairs], axis=0
    )
    alice_povm = _random_povm(dims.dA, n, rng)
    bob = np.stack([_random_povm(dims.dB, 2, rng)[0] for _ in range(n)], axis=0)
    return Strategy(
        dims=dims,
        rho=rho,
        pairs=pairs,
        alice_pair_effects=pair_effects,
        alice_povm=alice_povm,
        bob=bob,
    )


def _random_povm(dim: int, outcomes: int, rng: np.random.Generator) -> np.ndarray:
    raw = np.empty((outcomes, dim, dim), dtype=complex)
    for a in range(outcomes):
        G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        raw[a] = G @ dagger(G)
    total = raw.sum(axis=0)
    w, U = np.linalg.eigh(total)
    inv_sqrt = (U / np.sqrt(w)) @ dagger(U)
    return np.einsum("ab,xbc,cd->xad", inv_sqrt, raw, inv_sqrt)


def depolarize(strategy: Strategy, v: float) -> Strategy:
    """Mix the state with white noise: rho <- v rho + (1-v) I / (dA dB)."""
    if not (0.0 <= v <= 1.0):
        raise ValueError("visibility must lie in [0, 1]")
    n = strategy.dims.total
    rho = v * strategy.rho + (1.0 - v) * np.eye(n) / n
    return Strategy(
        dims=strategy.dims,
        rho=rho,
        pairs=strategy.pairs,
        alice_pair_effects=strategy.alice_pair_effects,
        alice_povm=strategy.alice_povm,
        bob=strategy.bob,
    )


def validate_strategy(strategy: Strategy, tol: float = DEFAULT_TOL) -> ValidationReport:
    """POVM and state invariants of a strategy."""
    rho = strategy.rho
    w = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    herm_res = frobenius(rho - dagger(rho))
    trace_res = abs(np.trace(rho).real - 1.0)
    scale = max(1.0, frobenius(rho))

    def min_eig(M):
        return float(np.linalg.eigvalsh((M + dagger(M)) / 2)[0])

    pair_floor, pair_cap = 0.0, 0.0
    for p in range(len(strategy.pairs)):
        A1, A2 = strategy.alice_pair_effects[p]
        pair_floor = min(pair_floor, min_eig(A1), min_eig(A2))
        dA = strategy.dims.dA
        pair_cap = min(pair_cap, min_eig(np.eye(dA) - A1 - A2))
    povm_sum_res = frobenius(strategy.alice_povm.sum(axis=0) - np.eye(strategy.dims.dA))
    povm_floor = min((min_eig(E) for E in strategy.alice_povm), default=0.0)
    bob_floor = min((min_eig(B) for B in strategy.bob), default=0.0)
    bob_cap = min(
        (min_eig(np.eye(strategy.dims.dB) - B) for B in strategy.bob), default=0.0
    )

    checks = {
        "state_hermitian": CheckResult(bool(herm_res <= tol * scale), float(herm_res)),
        "state_psd": CheckResult(bool(w[0] >= -tol * scale), float(w[0])),
        "state_trace": CheckResult(bool(trace_res <= tol * scale), float(trace_res)),
        "pair_effects_psd": CheckResult(bool(pair_floor >= -tol), float(pair_floor)),
        "pair_effects_capped": CheckResult(bool(pair_cap >= -tol), float(pair_cap)),
        "povm_psd": CheckResult(bool(povm_floor >= -tol), float(povm_floor)),
        "povm_sums_to_identity": CheckResult(
            bool(povm_sum_res <= tol * strategy.dims.dA), float(povm_sum_res)
        ),
        "bob_psd": CheckResult(bool(bob_floor >= -tol), float(bob_floor)),
        "bob_capped": CheckResult(bool(bob_cap >= -tol), float(bob_cap)),
    }
    return ValidationReport(checks=checks)


# ---------------------------------------------------------------------------
# JSON formats
# ---------------------------------------------------------------------------

def strategy_to_json(strategy: Strategy) -> dict:
    return {
        "dims": {"dA": strategy.dims.dA, "dB": strategy.dims.dB},
        "rho": matrix_to_json(strategy.rho),
        "alicePairs": [
            {
                "j": j + 1,
                "k": k + 1,
                "A1": matrix_to_json(strategy.alice_pair_effects[p, 0]),
                "A2": matrix_to_json(strategy.alice_pair_effects[p, 1]),
            }
            for p, (j, k) in enumerate(strategy.pairs)
        ],
        "alicePovm": [matrix_to_json(E) for E in strategy.alice_povm],
        "bob": [matrix_to_json(B) for B in strategy.bob],
    }


def strategy_from_json(obj: dict) -> Strategy:
    dims = BipartiteDims(int(obj["dims"]["dA"]), int(obj["dims"]["dB"]))
    entries = sorted(obj["alicePairs"], key=lambda e: (e["j"], e["k"]))
    pairs = tuple((e["j"] - 1, e["k"] - 1) for e in entries)
    pair_effects = np.stack(
        [
            np.stack([matrix_from_json(e["A1"]), matrix_from_json(e["A2"])])
            for e in entries
        ]
    )
    return Strategy(
        dims=dims,
        rho=matrix_from_json(obj["rho"]),
        pairs=pairs,
        alice_pair_effects=pair_effects,
        alice_povm=np.stack([matrix_from_json(E) for E in obj["alicePovm"]]),
        bob=np.stack([matrix_from_json(B) for B in obj["bob"]]),
    )


def correlation_to_json(corr: Correlation) -> dict:
    """Nested maps keyed by setting labels; the perp outcome is "perp"."""
    alice: dict[str, dict] = {}
    for p, (j, k) in enumerate(corr.pairs):
        label = f"{j + 1},{k + 1}"
        alice[label] = {
            str(y + 1): {
                a_label: {
                    "1": float(corr.pair_probs[p, y, a, 0]),
                    PERP: float(corr.pair_probs[p, y, a, 1]),
                }
                for a, a_label in enumerate(("1", "2", PERP))
            }
            for y in range(corr.n_outcomes)
        }
    alice["povm"] = {
        str(y + 1): {
            str(a + 1): {
                "1": float(corr.povm_probs[a, y, 0]),
                PERP: float(corr.povm_probs[a, y, 1]),
            }
            for a in range(corr.n_outcomes)
        }
        for y in range(corr.n_outcomes)
    }
    return {"nOutcomes": corr.n_outcomes, "table": alice}


def correlation_from_json(obj: dict) -> Correlation:
    n = int(obj["nOutcomes"])
    pairs = pair_list(n)
    pair_probs = np.zeros((len(pairs), n, 3, 2))
    povm_probs = np.zeros((n, n, 2))
    table = obj["table"]
    for p, (j, k) in enumerate(pairs):
        block = table[f"{j + 1},{k + 1}"]
        for y in range(n):
            cell = block[str(y + 1)]
            for a, a_label in enumerate(("1", "2", PERP)):
                pair_probs[p, y, a, 0] = cell[a_label]["1"]
                pair_probs[p, y, a, 1] = cell[a_label][PERP]
    for y in range(n):
        cell = table["povm"][str(y + 1)]
        for a in range(n):
            povm_probs[a, y, 0] = cell[str(a + 1)]["1"]
            povm_probs[a, y, 1] = cell[str(a + 1)][PERP]
    return Correlation(
        n_outcomes=n, pairs=pairs, pair_probs=pair_probs, povm_probs=povm_probs
    )
