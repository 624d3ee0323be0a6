"""Finite Hermitian sections of Gram matrices."""

from dataclasses import dataclass
from typing import Any, Dict, Sequence, Tuple

import numpy as np
from scipy import linalg


@dataclass(frozen=True, eq=False)
class GramSection:
    radius: int
    indices: Tuple[Tuple[int, ...], ...]
    matrix: np.ndarray
    lam_min: float
    lam_max: float
    sigma_min: float

    @classmethod
    def from_matrix(cls, radius: int, indices: Sequence[Tuple[int, ...]], matrix: np.ndarray) -> "GramSection":
        eigenvalues = linalg.eigvalsh(matrix)
        lam_min, lam_max = float(eigenvalues[0]), float(eigenvalues[-1])
        return cls(radius, tuple(indices), matrix, lam_min, lam_max, float(np.sqrt(max(lam_min, 0.0))))

    @property
    def size(self) -> int:
        return len(self.indices)

    def eigen_summary(self) -> Dict[str, Any]:
        return {
            "radius": self.radius,
            "size": self.size,
            "lam_min": self.lam_min,
            "lam_max": self.lam_max,
            "sigma_min": self.sigma_min,
        }


def hermitian_from_upper(entries: Dict[Tuple[int, int], complex], size: int) -> np.ndarray:
    """Assemble a matrix from its upper triangle; the lower triangle is the exact conjugate."""
    matrix = np.zeros((size, size), dtype=complex)
    for (i, j), value in entries.items():
        if i == j:
            matrix[i, i] = value.real
        else:
            matrix[i, j] = value
            matrix[j, i] = np.conj(value)
    return matrix
