"""Shared test helpers."""

import numpy as np

from sptgame import spin_model as sm
from sptgame.pauli import from_sites


def dephased_cluster(n: int, eps: float) -> np.ndarray:
    """Independent Z dephasing with probability eps on each cluster qubit."""
    psi = sm.prepare_cluster_state(n)
    rho = np.zeros((1 << n, 1 << n), dtype=complex)
    for flips in range(1 << n):
        weight = eps ** flips.bit_count() * (1 - eps) ** (n - flips.bit_count())
        phi = psi.copy()
        for j in range(1, n + 1):
            if (flips >> (j - 1)) & 1:
                phi = sm.apply_pauli(from_sites(n, {j: "Z"}), phi)
        rho += weight * np.outer(phi, phi.conj())
    return rho
