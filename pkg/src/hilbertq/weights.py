"""Weight vectors (k, m) over the two embeddings, with the operator gates."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class WeightData:
    k: tuple
    m: tuple

    def __post_init__(self):
        if len(self.k) != 2 or len(self.m) != 2:
            raise ValueError("weights are indexed by the two embeddings")

    def k_plus_2m(self):
        return tuple(ki + 2 * mi for ki, mi in zip(self.k, self.m))

    def parallel(self) -> bool:
        """(k_theta, m_theta) independent of theta."""
        return self.k[0] == self.k[1] and self.m[0] == self.m[1]

    def k_plus_2m_parallel(self) -> bool:
        a, b = self.k_plus_2m()
        return a == b

    def tp_gate(self, theta_indices) -> bool:
        """sum over the prime's embeddings of min(m, m+k-1) >= 0."""
        total = 0
        for i in theta_indices:
            total += min(self.m[i], self.m[i] + self.k[i] - 1)
        return total >= 0

    def sp_gate(self, theta_indices, e: int, f: int) -> bool:
        """sum over the prime's embeddings of (k + 2m) >= 2 e f."""
        total = 0
        for i in theta_indices:
            total += self.k[i] + 2 * self.m[i]
        return total >= 2 * e * f

    def to_json(self):
        return {"k": list(self.k), "m": list(self.m)}

    @staticmethod
    def from_json(blob):
        return WeightData(tuple(blob["k"]), tuple(blob["m"]))
