"""Randomness of the povm-setting outcome against a purifying eavesdropper.

The classical-quantum state pairs Alice's outcome register with the
conditional states an eavesdropper holding the purification would see; its
conditional von Neumann entropy H(A|E) = H(AE) - H(E) lower-bounds the
asymptotic extractable private randomness.  For strategies attaining the
quantum value the state factorizes and the entropy is exactly 2 log2(d).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bell import Strategy, bell_value
from .bic import GramMatrix
from .linalg import dagger, frobenius, is_state, purify

EIGENVALUE_FLOOR = 1e-14


@dataclass(frozen=True)
class CqState:
    """Blocks sigma_j of the classical-quantum state sum_j |j><j| (x) sigma_j."""

    num_outcomes: int
    eve_dim: int
    blocks: np.ndarray  # (num_outcomes, eve_dim, eve_dim), subnormalized

    def outcome_distribution(self) -> np.ndarray:
        return np.einsum("jaa->j", self.blocks).real

    def eve_state(self) -> np.ndarray:
        return self.blocks.sum(axis=0)


@dataclass(frozen=True)
class RandomnessReport:
    bell_value: float
    gap_to_quantum_max: float
    conditional_entropy_bits: float
    conditional_entropy_nats: float
    outcome_distribution: np.ndarray
    uniformity_deviation: float
    certified: bool

    def to_json(self) -> dict:
        return {
            "bellValue": self.bell_value,
            "gap": self.gap_to_quantum_max,
            "entropyBits": self.conditional_entropy_bits,
            "entropyNats": self.conditional_entropy_nats,
            "distribution": [float(p) for p in self.outcome_distribution],
            "uniformityDeviation": self.uniformity_deviation,
            "certified": self.certified,
        }


def cq_state(strategy: Strategy, psi: np.ndarray) -> CqState:
    """Blocks sigma_j = tr_AB[ |psi><psi| (A^povm_j (x) I_B (x) I_E) ].

    ``psi`` must be a purification of the strategy's state, with the
    environment as the trailing tensor factor.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    dA, dB = strategy.dims.dA, strategy.dims.dB
    n_ab = dA * dB
    if psi.size % n_ab != 0:
        raise ValueError("purification length is not a multiple of dA*dB")
    d_e = psi.size // n_ab
    M = psi.reshape(n_ab, d_e)
    marginal = M @ dagger(M)
    if frobenius(marginal - strategy.rho) > 1e-9 * max(1.0, frobenius(strategy.rho)):
        raise ValueError("psi does not purify the strategy state")
    tensor = psi.reshape(dA, dB, d_e)
    blocks = np.einsum(
        "abe,jpa,pbf->jef", tensor, strategy.alice_povm, tensor.conj(), optimize=True
    )
    return CqState(
        num_outcomes=strategy.alice_povm.shape[0], eve_dim=d_e, blocks=blocks
    )


def von_neumann_entropy(rho: np.ndarray, base: float = 2.0) -> float:
    """-sum lambda log(lambda) over eigenvalues above the 1e-14 floor."""
    rho = np.asarray(rho, dtype=complex)
    if not is_state(rho, 1e-8):
        raise ValueError("entropy input is not a quantum state")
    lam = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    lam = lam[lam > EIGENVALUE_FLOOR]
    return float(-(lam * np.log(lam)).sum() / np.log(base))


def _spectrum_entropy(lam: np.ndarray, base: float) -> float:
    lam = lam[lam > EIGENVALUE_FLOOR]
    if lam.size == 0:
        return 0.0
    return float(-(lam * np.log(lam)).sum() / np.log(base))


def conditional_entropy(cq: CqState, base: float = 2.0) -> float:
    """H(A|E) = H(AE) - H(E) of the block-diagonal classical-quantum state."""
    joint = np.concatenate(
        [np.linalg.eigvalsh((b + dagger(b)) / 2) for b in cq.blocks]
    )
    eve = np.linalg.eigvalsh(
        (cq.eve_state() + dagger(cq.eve_state())) / 2
    )
    return _spectrum_entropy(joint, base) - _spectrum_entropy(eve, base)


def randomness_report(
    strategy: Strategy, S: GramMatrix, tol: float = 1e-9
) -> RandomnessReport:
    """Bell value, conditional entropy under the canonical purification, and
    the outcome distribution of the povm setting.

    ``certified`` flags whether the optimality hypothesis holds within tol;
    below the quantum value the entropy is descriptive only, not a
    device-independent bound.
    """
    report = bell_value(strategy, S)
    psi = purify(strategy.rho)
    cq = cq_state(strategy, psi)
    bits = conditional_entropy(cq, base=2.0)
    nats = bits * np.log(2.0)
    dist = cq.outcome_distribution()
    n = strategy.n_outcomes
    deviation = float(np.abs(dist - 1.0 / n).max())
    certified = bool(abs(report.gap) <= tol * max(1.0, float(n)))
    return RandomnessReport(
        bell_value=report.value,
        gap_to_quantum_max=report.gap,
        conditional_entropy_bits=float(bits),
        conditional_entropy_nats=float(nats),
        outcome_distribution=dist,
        uniformity_deviation=deviation,
        certified=certified,
    )
