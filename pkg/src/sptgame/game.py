"""The multiplayer contextual triangle game.

N = n/2 players sit on a ring of two-qubit blocks; three of them (the
corners) receive random input bits, everyone else is fed 0.  Every player
answers with three bits.  The win conditions are parity constraints whose
quantum counterparts are global symmetry representations (even-parity
conditions) and twisted string order parameters (odd-parity conditions), so
the winning probability of the cluster-state measurement strategy is a
closed function of five expectation values.

The module carries the referee (win_check), the strategy evaluators
(classical brute force, light-cone-restricted strategies, sampled quantum
play), the analytic winning probability, its graph-diagonal reconstruction,
and the cluster-fidelity lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import spin_model
from .pauli import (
    NONTRIVIAL,
    ORDERED_PAIRS,
    GroupElement,
    PauliString,
    boundary_ops,
    embed_block,
    onsite_rep,
    symmetry_rep,
    twisted_string_order,
)
from .spin_model import expectation, sample_pauli_outcomes


@dataclass(frozen=True)
class GameSpec:
    """Player count, corner placement, and the strategy pair (g, h)."""

    n_players: int
    corners: tuple[int, int, int]
    pair: tuple[GroupElement, GroupElement]

    def __post_init__(self):
        a, b, c = self.corners
        if not (1 <= a < b < c <= self.n_players):
            raise ValueError(f"corners must be ascending blocks in 1..{self.n_players}")
        g, h = self.pair
        if g.is_identity or h.is_identity or g == h:
            raise ValueError("strategy pair must be distinct nontrivial elements")

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_players

    @classmethod
    def equidistant(cls, n_players: int, pair) -> "GameSpec":
        """Corners spaced N/3 apart, the hardest layout for classical play."""
        if n_players % 3:
            raise ValueError(
                f"equidistant corners need 3 | N, got N = {n_players}; "
                "pass explicit corners instead"
            )
        step = n_players // 3
        return cls(n_players, (1, 1 + step, 1 + 2 * step), pair)

    def zero_corner_pairs(self) -> list[tuple[int, int, int]]:
        """(mu, nu, rho) triples: the twisted condition for input-0 corner rho
        runs from mu (outputs d) forward to nu (outputs e)."""
        out = []
        for r in range(3):
            rho = self.corners[r]
            mu = self.corners[(r + 1) % 3]
            nu = self.corners[(r + 2) % 3]
            out.append((mu, nu, rho))
        return out


@dataclass(frozen=True)
class Transcript:
    """Corner inputs plus the (N, 3) matrix of per-player output bits."""

    corner_inputs: tuple[int, int, int]
    outputs: np.ndarray  # shape (N, 3), entries 0/1


def measurement_context(
    input_bit: int, g: GroupElement, h: GroupElement
) -> tuple[PauliString, PauliString, PauliString]:
    """Two-qubit observables a player measures for the given input.

    Input 0 yields (u(h), u(g), u(gh)); input 1 yields the twisted context
    (u(h)V^L(g), u(g), V^R(g)u(h)).  Products that come out anti-Hermitian
    are promoted to the Hermitian observable by a quarter phase; already
    Hermitian products keep their literal sign.  With that convention each
    triple multiplies to +identity and the global condition operators come
    out as the exact twisted string order parameters.
    """
    if g.is_identity or h.is_identity:
        raise ValueError("measurement contexts need nontrivial elements")
    if input_bit == 0:
        return (onsite_rep(h), onsite_rep(g), onsite_rep(g * h))
    v_left, v_right = boundary_ops(g)
    return (
        (onsite_rep(h) * v_left).hermitized(),
        onsite_rep(g),
        (v_right * onsite_rep(h)).hermitized(),
    )


@lru_cache(maxsize=None)
def _embedded_contexts(spec: GameSpec):
    """Per-block embedded contexts for both input values."""
    g, h = spec.pair
    n = spec.n_qubits
    out = {}
    for bit in (0, 1):
        ctx = measurement_context(bit, g, h)
        out[bit] = {
            p: tuple(embed_block(op, p, n) for op in ctx)
            for p in range(1, spec.n_players + 1)
        }
    return out


def _blocks_between(p: int, q: int, nblocks: int) -> list[int]:
    span = (q - p) % nblocks
    return [((p - 1 + k) % nblocks) + 1 for k in range(1, span)]


def win_check(spec: GameSpec, transcript: Transcript) -> bool:
    """Evaluate exactly the conditions active for the given corner inputs.

    Always: (i) even total parity and (iii) even parity of the b string.
    All-zero inputs add (ii), even parity of the a string.  Two-ones inputs
    add the twisted condition d_mu + c-string on edge mu->nu + e_nu +
    a-string everywhere else = 1.
    """
    outs = np.asarray(transcript.outputs)
    n_players = spec.n_players
    if outs.shape != (n_players, 3) or not np.isin(outs, (0, 1)).all():
        raise ValueError("transcript needs an (N, 3) matrix of bits")
    if int(outs.sum()) % 2:
        return False
    if int(outs[:, 1].sum()) % 2:
        return False
    inputs = transcript.corner_inputs
    if sum(inputs) == 0:
        if int(outs[:, 0].sum()) % 2:
            return False
    elif sum(inputs) == 2:
        r = inputs.index(0)
        mu, nu, rho = spec.zero_corner_pairs()[r]
        edge = _blocks_between(mu, nu, n_players)
        rest = [
            p for p in range(1, n_players + 1)
            if p not in (mu, nu) and p not in edge
        ]
        total = outs[mu - 1, 0] + outs[nu - 1, 2]
        total += sum(outs[p - 1, 2] for p in edge)
        total += sum(outs[p - 1, 0] for p in rest)
        if total % 2 != 1:
            return False
    return True


# -- analytic winning probability ---------------------------------------------


@dataclass(frozen=True)
class ExpectationSet:
    """The five inputs of the winning-probability formula.

    For non-equidistant corners, twist and u_g_twist are the averages of the
    three corner-pair twisted values; the formula is linear, so the average
    reproduces the exact input-averaged winning probability.
    """

    u_g: float
    u_h: float
    u_gh: float
    twist: float
    u_g_twist: float

    def __post_init__(self):
        for name in ("u_g", "u_h", "u_gh", "twist", "u_g_twist"):
            v = getattr(self, name)
            if not -1 - 1e-9 <= v <= 1 + 1e-9:
                raise ValueError(f"{name} = {v} outside [-1, 1]")


def quantum_win_prob(es: ExpectationSet) -> float:
    """Average winning probability of the cluster-state measurement strategy."""
    p = (
        12.0 * (1.0 + es.u_g)
        + es.u_h
        + es.u_gh
        - 3.0 * (es.twist + es.u_g_twist)
    ) / 32.0
    assert -1e-12 <= p <= 1 + 1e-12, f"winning probability {p} outside [0, 1]"
    return min(1.0, max(0.0, p))


def condition_operators(spec: GameSpec):
    """Global operators behind the win conditions: U(g), U(h), U(gh) and the
    per-pair twisted string order parameters with their U(g) composites."""
    g, h = spec.pair
    n = spec.n_qubits
    u_g = symmetry_rep(g, n)
    ops = {
        "u_g": u_g,
        "u_h": symmetry_rep(h, n),
        "u_gh": symmetry_rep(g * h, n),
        "twists": [],
        "u_g_twists": [],
    }
    for mu, nu, _ in spec.zero_corner_pairs():
        t = twisted_string_order(g, h, mu, nu, n)
        ops["twists"].append(t)
        ops["u_g_twists"].append(u_g * t)
    return ops


def expectation_set_from_state(state: np.ndarray, spec: GameSpec) -> ExpectationSet:
    """Theorem inputs measured on a dense state (vector or density)."""
    ops = condition_operators(spec)
    return ExpectationSet(
        u_g=expectation(state, ops["u_g"]),
        u_h=expectation(state, ops["u_h"]),
        u_gh=expectation(state, ops["u_gh"]),
        twist=float(np.mean([expectation(state, t) for t in ops["twists"]])),
        u_g_twist=float(np.mean([expectation(state, t) for t in ops["u_g_twists"]])),
    )


def win_probability(state: np.ndarray, spec: GameSpec) -> float:
    return quantum_win_prob(expectation_set_from_state(state, spec))


def min_win_prob(expectation_provider) -> tuple[float, tuple[GroupElement, GroupElement]]:
    """Minimum of the winning probability over the 6 ordered strategy pairs."""
    best = None
    for g, h in ORDERED_PAIRS:
        p = quantum_win_prob(expectation_provider(g, h))
        if best is None or p < best[0]:
            best = (p, (g, h))
    return best


def min_win_prob_state(
    state: np.ndarray, n_players: int, corners: tuple[int, int, int] | None = None
) -> tuple[float, tuple[GroupElement, GroupElement]]:
    """Minimum winning probability of a dense state over strategy pairs."""

    def provider(g, h):
        if corners is None:
            spec = GameSpec.equidistant(n_players, (g, h))
        else:
            spec = GameSpec(n_players, corners, (g, h))
        return expectation_set_from_state(state, spec)

    return min_win_prob(provider)


# -- sampled quantum play -------------------------------------------------------


@dataclass(frozen=True)
class SampledGameResult:
    wins: int
    trials: int

    @property
    def rate(self) -> float:
        return self.wins / self.trials

    @property
    def sigma(self) -> float:
        """1-sigma binomial error bar on the empirical rate."""
        r = self.rate
        return math.sqrt(max(r * (1.0 - r), 1.0 / self.trials) / self.trials)


def _mixture_sampler(state: np.ndarray, rng: np.random.Generator):
    """Draw pure states: trivial for vectors, eigen-mixture for densities."""
    if state.ndim == 1:
        vec = state.astype(complex)
        return lambda: vec
    vals, vecs = np.linalg.eigh(state)
    vals = np.clip(vals.real, 0.0, None)
    vals /= vals.sum()

    def draw():
        k = rng.choice(len(vals), p=vals)
        return vecs[:, k].astype(complex)

    return draw


def play_sampled(
    spec: GameSpec, state: np.ndarray, trials: int, rng: np.random.Generator
) -> SampledGameResult:
    """Monte-Carlo referee: draw corner inputs, measure every player's
    context on the shared state, apply win_check."""
    dim = state.shape[0]
    if dim != 1 << spec.n_qubits:
        raise ValueError(
            f"state has dimension {dim}, game needs {1 << spec.n_qubits}"
        )
    contexts = _embedded_contexts(spec)
    # one-time commutation audit; the trial loop skips re-validation
    audit = [op for p in range(1, spec.n_players + 1) for op in contexts[1][p]]
    sample_pauli_outcomes(
        spin_model.prepare_cluster_state(spec.n_qubits), audit[:6],
        np.random.default_rng(0),
    )
    draw = _mixture_sampler(state, rng)
    corner_set = set(spec.corners)
    wins = 0
    for _ in range(trials):
        psi = draw()
        inputs = tuple(int(b) for b in rng.integers(0, 2, size=3))
        bits_by_corner = dict(zip(spec.corners, inputs))
        ops = []
        for p in range(1, spec.n_players + 1):
            bit = bits_by_corner[p] if p in corner_set else 0
            ops.extend(contexts[bit][p])
        outcomes, _ = _sample_commuting(psi, ops, rng)
        outs = (1 - np.asarray(outcomes).reshape(spec.n_players, 3)) // 2
        if win_check(spec, Transcript(inputs, outs)):
            wins += 1
    return SampledGameResult(wins, trials)


def _sample_commuting(psi, ops, rng):
    """sample_pauli_outcomes without the pairwise commutation re-check."""
    psi = psi.astype(complex).copy()
    outcomes = []
    for op in ops:
        applied = spin_model.apply_pauli(op, psi)
        p_plus = 0.5 * (1.0 + np.vdot(psi, applied).real)
        p_plus = min(1.0, max(0.0, p_plus))
        s = 1 if rng.random() < p_plus else -1
        prob = p_plus if s == 1 else 1.0 - p_plus
        psi = 0.5 * (psi + s * applied)
        psi /= math.sqrt(prob)
        outcomes.append(s)
    return outcomes, psi


# -- classical strategies ---------------------------------------------------------


@dataclass(frozen=True)
class ClassicalOptimum:
    optimum: float
    witness: tuple[int, int, int]  # 6-bit strategy word per player
    optimum_fixed_b: float
    witness_fixed_b: tuple[int, int, int]
    strategies_enumerated: int


def _three_player_wins(s1, s2, s3, inputs) -> np.ndarray:
    """Vectorized referee for 3-player deterministic strategies.

    Strategy word: bit 0..2 = (a, b(0), c), bit 3..5 = (d, b(1), e).
    """
    outs = []
    for s, x in zip((s1, s2, s3), inputs):
        base = 0 if x == 0 else 3
        outs.append(((s >> base) & 1, (s >> (base + 1)) & 1, (s >> (base + 2)) & 1))
    total = sum(sum(o) for o in outs) % 2
    ok = total == 0
    bsum = (outs[0][1] + outs[1][1] + outs[2][1]) % 2
    ok &= bsum == 0
    if sum(inputs) == 0:
        asum = (outs[0][0] + outs[1][0] + outs[2][0]) % 2
        ok &= asum == 0
    elif sum(inputs) == 2:
        r = inputs.index(0)
        mu, nu = (r + 1) % 3, (r + 2) % 3
        twisted = (outs[mu][0] + outs[nu][2] + outs[r][0]) % 2
        ok &= twisted == 1
    return ok


def classical_optimum_3player() -> ClassicalOptimum:
    """Exhaustive maximum over all 2^18 deterministic 3-player strategies.

    Also reports the optimum when b may not depend on the input (b(0) = b(1)).
    """
    s = np.arange(64)
    s1 = s[:, None, None]
    s2 = s[None, :, None]
    s3 = s[None, None, :]
    wins = np.zeros((64, 64, 64), dtype=np.int8)
    patterns = [(x1, x2, x3) for x1 in (0, 1) for x2 in (0, 1) for x3 in (0, 1)]
    for inputs in patterns:
        wins += _three_player_wins(s1, s2, s3, inputs)
    best = int(wins.max())
    idx = np.unravel_index(int(wins.argmax()), wins.shape)
    fixed_mask = ((s >> 1) & 1) == ((s >> 4) & 1)
    wins_fixed = np.where(
        fixed_mask[:, None, None] & fixed_mask[None, :, None] & fixed_mask[None, None, :],
        wins,
        -1,
    )
    best_fixed = int(wins_fixed.max())
    idx_fixed = np.unravel_index(int(wins_fixed.argmax()), wins.shape)
    return ClassicalOptimum(
        optimum=best / 8.0,
        witness=tuple(int(i) for i in idx),
        optimum_fixed_b=best_fixed / 8.0,
        witness_fixed_b=tuple(int(i) for i in idx_fixed),
        strategies_enumerated=64**3,
    )


# -- light-cone-restricted strategies -----------------------------------------------


class LightconeViolation(ValueError):
    """A strategy's outputs depend on inputs outside its communication range."""


def _ring_distance(p: int, q: int, n_players: int) -> int:
    d = abs(p - q) % n_players
    return min(d, n_players - d)


def evaluate_lightcone_strategy(spec: GameSpec, rounds: int, strategy) -> float:
    """Exact average winning probability of a depth-limited classical strategy.

    `strategy(player, inputs)` maps a block index and the dict
    {corner: bit} to that player's three output bits.  Outputs are probed
    across input patterns that agree within the player's light cone; any
    disagreement raises LightconeViolation.
    """
    patterns = [(x1, x2, x3) for x1 in (0, 1) for x2 in (0, 1) for x3 in (0, 1)]
    all_outputs = {}
    for pat in patterns:
        inputs = dict(zip(spec.corners, pat))
        outs = np.array(
            [strategy(p, inputs) for p in range(1, spec.n_players + 1)], dtype=int
        )
        all_outputs[pat] = outs
    for p in range(1, spec.n_players + 1):
        visible = [
            i for i, c in enumerate(spec.corners)
            if _ring_distance(p, c, spec.n_players) <= rounds
        ]
        seen = {}
        for pat in patterns:
            key = tuple(pat[i] for i in visible)
            row = tuple(all_outputs[pat][p - 1])
            if key in seen and seen[key] != row:
                raise LightconeViolation(
                    f"player {p} output depends on inputs beyond {rounds} rounds"
                )
            seen[key] = row
    won = sum(
        win_check(spec, Transcript(pat, all_outputs[pat])) for pat in patterns
    )
    return won / 8.0


def forwarding_strategy(spec: GameSpec):
    """Perfect strategy once every corner sees the other corners' inputs.

    Everybody answers (0,0,0) except the d-end corner of a two-ones input,
    which answers (1,0,1): the twisted condition receives its odd bit and
    total parity stays even.  Needs rounds >= corner separation.
    """
    corner_index = {c: i for i, c in enumerate(spec.corners)}

    def strategy(player, inputs):
        if player not in corner_index:
            return (0, 0, 0)
        pat = tuple(inputs[c] for c in spec.corners)
        if sum(pat) == 2:
            r = pat.index(0)
            mu = spec.corners[(r + 1) % 3]
            if player == mu:
                return (1, 0, 1)
        return (0, 0, 0)

    return strategy


def embedded_three_player_strategy(spec: GameSpec, words: tuple[int, int, int]):
    """Corners play a deterministic 3-player strategy on their own input;
    everyone else answers (0,0,0).  Purely local: works at rounds = 0."""
    corner_index = {c: i for i, c in enumerate(spec.corners)}

    def strategy(player, inputs):
        if player not in corner_index:
            return (0, 0, 0)
        s = words[corner_index[player]]
        base = 0 if inputs[player] == 0 else 3
        return ((s >> base) & 1, (s >> (base + 1)) & 1, (s >> (base + 2)) & 1)

    return strategy


def constant_strategy(out0: tuple[int, int, int], out1: tuple[int, int, int]):
    """Inputs ignored beyond the player's own bit; fixed outputs."""

    def strategy(player, inputs):
        return out1 if inputs.get(player, 0) else out0

    return strategy


# -- graph-diagonal reconstruction and fidelity bound ---------------------------------


def _parity_signs(bits: int, dim: int) -> np.ndarray:
    r = np.arange(dim)
    return 1.0 - 2.0 * (np.bitwise_count(r & bits) & 1)


def win_prob_from_graph_diagonal(c: np.ndarray, spec: GameSpec) -> float:
    """Winning probability from the stabilizer-eigenbasis diagonal alone.

    Every condition operator is +-kappa(r'), so its eigenvalue on basis
    state r is +-(-1)^{r.r'}; the probability is the c-weighted average of
    the closed-form values.
    """
    from .pauli import decompose_stabilizer_product

    c = np.asarray(c, dtype=float)
    dim = len(c)
    if abs(c.sum() - 1.0) > 1e-9 or c.min() < -1e-12:
        raise ValueError("graph diagonal must be a probability vector")
    ops = condition_operators(spec)

    def values(op):
        dec = decompose_stabilizer_product(op)
        assert dec is not None, f"{op.label()} not in the stabilizer span"
        return dec.sign * _parity_signs(dec.bits, dim)

    p_r = 12.0 * (1.0 + values(ops["u_g"])) + values(ops["u_h"]) + values(ops["u_gh"])
    for t, ut in zip(ops["twists"], ops["u_g_twists"]):
        p_r -= values(t) + values(ut)
    p_r /= 32.0
    return float(np.dot(c, p_r))


def fidelity_bound_check(
    state: np.ndarray, n_players: int, corners: tuple[int, int, int] | None = None
) -> tuple[float, float, bool]:
    """Cluster fidelity f_n, minimum winning probability, and f_n <= P check."""
    f = spin_model.cluster_fidelity(state)
    p_min, _ = min_win_prob_state(state, n_players, corners)
    return f, p_min, f <= p_min + 1e-10
