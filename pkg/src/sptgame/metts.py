"""METTS Markov chain over product states with the dense Trotter backend.

One chain alternates imaginary-time evolution e^{-beta H / 2} of a product
state with a projective collapse back to a product state in a per-iteration
basis; ensemble averages of the recorded expectation values converge to
Gibbs expectations.  Error bars carry the integrated autocorrelation time
of the chain, estimated with the truncated lagged-product sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .pauli import NONTRIVIAL, PauliString, onsite_rep
from .spin_model import (
    ModelParams,
    dense_hamiltonian,
    expectation,
    imaginary_time_evolve,
)

COLLAPSE_POLICIES = ("z", "alternating_zx", "random_bloch", "fixed_x", "fixed_y")

_BASIS_Z = np.eye(2, dtype=complex)
_BASIS_X = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_BASIS_Y = np.array([[1, 1], [1j, -1j]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class MettsConfig:
    beta: float
    num_iterations: int = 110
    warmup: int = 10
    collapse_policy: str = "z"
    seed: int = 0
    trotter_step: float = 0.05

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("inverse temperature must be positive")
        if self.num_iterations < 2:
            raise ValueError("need at least two recorded iterations")
        if self.warmup < 0:
            raise ValueError("warmup cannot be negative")
        if self.collapse_policy not in COLLAPSE_POLICIES:
            raise ValueError(
                f"unknown collapse policy {self.collapse_policy!r}; "
                f"choose from {COLLAPSE_POLICIES}"
            )


@dataclass(frozen=True)
class EstimateReport:
    """Chain estimate with autocorrelation-aware error bar s = sigma sqrt(tau/N)."""

    mean: float
    variance: float  # sample variance, (N-1)-normalized
    tau: float
    stderr: float
    series: np.ndarray

    @property
    def relative_error(self) -> float:
        if self.mean == 0.0:
            return math.inf
        return abs(self.stderr / self.mean)


def error_report(series) -> EstimateReport:
    """Mean, variance, truncated autocorrelation time, and standard error.

    C(t) uses the lagged-product estimator normalized by the biased
    variance; the tau sum stops at the first nonpositive C(t).  A constant
    series reports sigma = 0, s = 0, tau = 1.
    """
    series = np.asarray(series, dtype=float)
    n = len(series)
    if n < 2:
        raise ValueError("need at least two samples")
    mean = float(series.mean())
    centered = series - mean
    biased_var = float(np.mean(centered**2))
    variance = biased_var * n / (n - 1)
    if biased_var <= (1e-14 * (abs(mean) + 1.0)) ** 2:  # constant up to roundoff
        return EstimateReport(mean, 0.0, 1.0, 0.0, series)
    tau = 1.0
    for t in range(1, n):
        c_t = float(np.mean(series[: n - t] * series[t:]) - mean * mean) / biased_var
        if c_t <= 0.0:
            break
        tau += 2.0 * c_t
    stderr = math.sqrt(variance * tau / n)
    return EstimateReport(mean, variance, tau, stderr, series)


# -- collapse machinery ----------------------------------------------------------


def _policy_bases(
    policy: str, iteration: int, n: int, rng: np.random.Generator
) -> list[np.ndarray]:
    if policy == "z":
        return [_BASIS_Z] * n
    if policy == "fixed_x":
        return [_BASIS_X] * n
    if policy == "fixed_y":
        return [_BASIS_Y] * n
    if policy == "alternating_zx":
        return [_BASIS_Z if iteration % 2 == 0 else _BASIS_X] * n
    # random_bloch: each site uniform over the sphere via two angles
    bases = []
    for _ in range(n):
        theta = math.acos(2.0 * rng.random() - 1.0)
        phi = 2.0 * math.pi * rng.random()
        c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
        bases.append(
            np.array([[c, -s], [np.exp(1j * phi) * s, np.exp(1j * phi) * c]])
        )
    return bases


def policy_explores_symmetry_sectors(policy: str) -> bool:
    """False when every collapse basis diagonalizes the onsite symmetry
    action: the chain then never leaves a symmetry sector.  Only the fixed
    X basis fails this way; the fixed Y basis maps its states to each other
    and is not caught by this structural test."""
    fixed = {"z": _BASIS_Z, "fixed_x": _BASIS_X, "fixed_y": _BASIS_Y}
    if policy not in fixed:
        return True
    v = fixed[policy]
    for g in NONTRIVIAL:
        diagonal = True
        for bit in (g.a, g.b):
            op = np.linalg.matrix_power(np.array([[0.0, 1.0], [1.0, 0.0]]), bit)
            m = v.conj().T @ op @ v
            if np.abs(m - np.diag(np.diag(m))).max() > 1e-12:
                diagonal = False
        if diagonal:
            return False
    return True


def collapse_step(
    psi: np.ndarray,
    policy: str,
    iteration: int,
    rng: np.random.Generator,
) -> tuple[tuple[int, ...], np.ndarray]:
    """Collapse to a product state in the policy's per-site basis.

    Sites are measured sequentially; outcome probabilities follow the Born
    rule and are asserted to sum to one at each site.  The returned state is
    an exact product state, the label its outcome bits."""
    n = int(math.log2(len(psi)))
    bases = _policy_bases(policy, iteration, n, rng)
    psi = psi.astype(complex)
    bits = []
    for j in range(1, n + 1):
        v = bases[j - 1]
        low = 1 << (j - 1)
        view = psi.reshape(-1, 2, low)
        amps = [
            v[0, b].conjugate() * view[:, 0, :] + v[1, b].conjugate() * view[:, 1, :]
            for b in (0, 1)
        ]
        probs = [float(np.sum(np.abs(a) ** 2)) for a in amps]
        assert abs(probs[0] + probs[1] - 1.0) < 1e-9, "collapse probabilities off unity"
        b = 0 if rng.random() < probs[0] else 1
        amp = amps[b] / math.sqrt(probs[b])
        out = np.empty_like(view)
        out[:, 0, :] = v[0, b] * amp
        out[:, 1, :] = v[1, b] * amp
        psi = out.reshape(-1)
        bits.append(b)
    return tuple(bits), psi


def _product_state(bases: list[np.ndarray], bits: tuple[int, ...]) -> np.ndarray:
    psi = np.array([1.0 + 0.0j])
    for j, (v, b) in enumerate(zip(bases, bits)):
        psi = np.kron(v[:, b], psi)  # qubit j+1 occupies bit j
    return psi


# -- the chain -------------------------------------------------------------------


@dataclass(frozen=True)
class MettsRun:
    config: MettsConfig
    reports: dict[str, EstimateReport]
    non_ergodic: bool
    labels_visited: list[tuple[int, ...]] = field(repr=False, default_factory=list)


def run_metts(
    config: MettsConfig,
    params: ModelParams,
    observables: dict[str, PauliString],
) -> MettsRun:
    """Run one METTS chain and report per-observable estimates.

    Warmup iterations are evolved and collapsed but never recorded.  The
    chain is fully determined by (config, params, seed).
    """
    for label, op in observables.items():
        if not op.is_hermitian:
            raise ValueError(f"observable {label} is not Hermitian")
        if op.n != params.n:
            raise ValueError(f"observable {label} has size {op.n}, chain {params.n}")
    rng = np.random.default_rng(config.seed)
    bases = _policy_bases(config.collapse_policy, 0, params.n, rng)
    bits = tuple(int(b) for b in rng.integers(0, 2, size=params.n))
    psi = _product_state(bases, bits)
    series: dict[str, list[float]] = {label: [] for label in observables}
    labels_visited = []
    total = config.warmup + config.num_iterations
    for iteration in range(total):
        phi, _ = imaginary_time_evolve(
            psi, params, config.beta / 2.0, dt=config.trotter_step
        )
        if iteration >= config.warmup:
            for label, op in observables.items():
                series[label].append(expectation(phi, op))
        bits, psi = collapse_step(phi, config.collapse_policy, iteration, rng)
        labels_visited.append(bits)
    reports = {label: error_report(vals) for label, vals in series.items()}
    return MettsRun(
        config,
        reports,
        non_ergodic=not policy_explores_symmetry_sectors(config.collapse_policy),
        labels_visited=labels_visited,
    )


def merge_runs(runs: list[MettsRun]) -> dict[str, tuple[float, float]]:
    """Inverse-variance pooling of independent chains: (mean, stderr) per
    observable.  Chains with zero variance dominate with weight capped."""
    labels = runs[0].reports.keys()
    merged = {}
    for label in labels:
        weights = []
        means = []
        for run in runs:
            rep = run.reports[label]
            weights.append(1.0 / max(rep.stderr**2, 1e-30))
            means.append(rep.mean)
        weights = np.asarray(weights)
        means = np.asarray(means)
        total = weights.sum()
        merged[label] = (float((weights * means).sum() / total), float(math.sqrt(1.0 / total)))
    return merged


# -- stationary distribution diagnostics ----------------------------------------


@dataclass(frozen=True)
class StationarityResult:
    tv_distance: float
    frequencies: np.ndarray
    exact: np.ndarray
    detailed_balance_violation: float


def stationarity_test(
    params: ModelParams,
    beta: float,
    steps: int,
    seed: int = 0,
    warmup: int = 100,
) -> StationarityResult:
    """Long-chain histogram of visited Z-basis labels against p_j / Z.

    Dense-exponential propagation, so only tiny chains are sensible; the
    detailed-balance residual max |p_j T(j->k) - p_k T(k->j)| is computed
    from the same dense quantities."""
    if params.n > 4:
        raise ValueError("stationarity diagnostics are for tiny chains (n <= 4)")
    h = dense_hamiltonian(params)
    half = scipy.linalg.expm(-0.5 * beta * h)
    weights = np.einsum("ij,ij->j", half, half)  # p_j = <j|e^{-beta H}|j>
    exact = weights / weights.sum()
    # p_j T(j->k) = |<k| e^{-beta H / 2} |j>|^2, symmetric for real symmetric H
    flux = half**2
    db_violation = float(np.abs(flux - flux.T).max())
    rng = np.random.default_rng(seed)
    dim = h.shape[0]
    j = int(rng.integers(0, dim))
    counts = np.zeros(dim)
    for step in range(warmup + steps):
        phi = half[:, j]
        probs = np.abs(phi) ** 2
        probs /= probs.sum()
        j = int(rng.choice(dim, p=probs))
        if step >= warmup:
            counts[j] += 1
    frequencies = counts / counts.sum()
    tv = 0.5 * float(np.abs(frequencies - exact).sum())
    return StationarityResult(tv, frequencies, exact, db_violation)
