"""Quantum simulation schemas."""

import math
from typing import Optional

import numpy as np

from app.schemas.base import DomainModel


class EmbeddedGate(DomainModel):
    """A k×k operator G realized as the top-left block of a unitary, scaled by 1/e.

    ``unitary`` is indexed aux-major: index = aux * k + logical, so projecting
    the auxiliary wires onto |0…0> leaves ``source / e`` acting on the logical wires.
    """
    label: str
    source: np.ndarray
    unitary: np.ndarray
    e: float
    e_squared: float
    n_logical: int
    n_aux: int

    @property
    def block_rows(self) -> int:
        return 2 ** self.n_logical

    @property
    def action(self) -> np.ndarray:
        k = self.block_rows
        return self.unitary[:k, :k]

    def unitarity_error(self) -> float:
        dimension = self.unitary.shape[0]
        return float(np.max(np.abs(self.unitary.conj().T @ self.unitary - np.eye(dimension))))

    def block_error(self) -> float:
        return float(np.max(np.abs(self.e * self.action - self.source)))


class StateVector(DomainModel):
    """Normalized amplitudes over ``n_wires`` wires, wire 0 being the most significant bit.

    ``log2_survival`` accumulates log2 of the squared norm kept by every post-selection.
    """
    n_wires: int
    amplitudes: np.ndarray
    log2_survival: float = 0.0

    @property
    def survival(self) -> float:
        return 2.0 ** self.log2_survival

    @classmethod
    def zero(cls, n_wires: int) -> "StateVector":
        amplitudes = np.zeros(2 ** n_wires, dtype=complex)
        amplitudes[0] = 1.0
        return cls(n_wires=n_wires, amplitudes=amplitudes)

    @classmethod
    def from_amplitudes(cls, amplitudes, log2_survival: float = 0.0) -> "StateVector":
        vector = np.asarray(amplitudes, dtype=complex)
        n_wires = int(round(math.log2(vector.size)))
        norm = np.linalg.norm(vector)
        return cls(n_wires=n_wires, amplitudes=vector / norm, log2_survival=log2_survival)

    def probability(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)

    def amplitude(self, bits: str) -> complex:
        return complex(self.amplitudes[int(bits, 2)])

    def ratio(self) -> Optional[float]:
        """Second amplitude over the first for one-wire states."""
        if self.n_wires != 1 or abs(self.amplitudes[0]) == 0:
            return None
        return float((self.amplitudes[1] / self.amplitudes[0]).real)
