"""Closed-form thermal analytics for the cluster Hamiltonian at (0, 0).

The Gibbs state of the pure cluster Hamiltonian expands over stabilizer
products kappa(r) with weight tanh^{|r|}(beta * delta / 2), so every
symmetry representation and twisted string order parameter has an exact
tanh-power expectation value.  From those follow the minimum winning
probability, the critical temperature where it crosses 7/8, the critical
size at fixed temperature, and the equivalent single-qubit dephasing rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .game import ExpectationSet, min_win_prob
from .pauli import (
    GroupElement,
    GZ,
    decompose_stabilizer_product,
    symmetry_rep,
    twisted_string_order_cached,
)

#: tanh^{n/2} value at which the winning probability crosses 7/8
CROSSING = (math.sqrt(13.0) - 1.0) / 3.0


@dataclass(frozen=True)
class ThermalPoint:
    """Chain length and inverse temperature; beta = inf is the pure state."""

    n: int
    beta: float
    delta: float = 2.0

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError(f"chain length must be even and >= 2, got {self.n}")
        if not (self.beta > 0):
            raise ValueError("inverse temperature must be positive (or math.inf)")

    @property
    def tanh_factor(self) -> float:
        """tanh(beta * delta / 2); exactly 1 in the pure-state limit."""
        if math.isinf(self.beta):
            return 1.0
        return math.tanh(self.beta * self.delta / 2.0)


def symmetry_ev(g: GroupElement, tp: ThermalPoint) -> float:
    """<U((a,b))> = tanh^{(a+b) n/2}(beta delta / 2)."""
    return tp.tanh_factor ** ((g.a + g.b) * tp.n // 2)


def _span(p: int, q: int, n: int) -> int:
    """Forward block distance q - p on the cyclic block ring."""
    if p == q:
        raise ValueError("string endpoints must differ")
    return (q - p) % (n // 2)


def twisted_ev(
    g: GroupElement, h: GroupElement, p: int, q: int, tp: ThermalPoint
) -> float:
    """Thermal twisted-string expectation; d = 2(q - p) is the string length.

    The three Hamming-weight cases: (n+d)/2 for the {x,y} pairs, n - d/2
    when h = z, and the d-independent n/2 when g = z.
    """
    if g.is_identity or h.is_identity or g == h:
        raise ValueError("need distinct nontrivial group elements")
    t = tp.tanh_factor
    n = tp.n
    d = 2 * _span(p, q, n)
    if g != GZ and h != GZ:
        return -(t ** ((n + d) // 2))
    if h == GZ:
        return -(t ** (n - d // 2))
    return -(t ** (n // 2))


def composite_ev(
    g: GroupElement, h: GroupElement, p: int, q: int, tp: ThermalPoint
) -> float:
    """<U(g) T^{(g,h)}_[p,q]>, reduced exactly through the stabilizer span.

    The composite is another signed stabilizer product; its Hamming weight is
    read off mechanically rather than assuming factorization of the two
    expectation values.
    """
    op = symmetry_rep(g, tp.n) * twisted_string_order_cached(g, h, p, q, tp.n)
    dec = decompose_stabilizer_product(op)
    assert dec is not None, "composite left the stabilizer span"
    return dec.sign * tp.tanh_factor ** dec.weight


def expectation_set(
    g: GroupElement, h: GroupElement, p: int, q: int, tp: ThermalPoint
) -> ExpectationSet:
    """The five winning-probability inputs of the thermal cluster state."""
    return ExpectationSet(
        u_g=symmetry_ev(g, tp),
        u_h=symmetry_ev(h, tp),
        u_gh=symmetry_ev(g * h, tp),
        twist=twisted_ev(g, h, p, q, tp),
        u_g_twist=composite_ev(g, h, p, q, tp),
    )


def min_win(tp: ThermalPoint) -> float:
    """Minimum winning probability (1/8)[3 + 2 t^{n/2} + 3 t^n].

    Attained by the (z, x) and (z, y) strategies; independent of the string
    placement because the g = z twisted value is.
    """
    t_half = tp.tanh_factor ** (tp.n // 2)
    return (3.0 + 2.0 * t_half + 3.0 * t_half * t_half) / 8.0


def min_win_over_pairs(tp: ThermalPoint, p: int, q: int):
    """Minimum over the six ordered pairs from the closed-form expectations."""
    return min_win_prob(lambda g, h: expectation_set(g, h, p, q, tp))


def critical_temperature(n: int, delta: float = 2.0) -> float:
    """Temperature where min_win drops through 7/8 for an n-qubit chain."""
    if n < 2 or n % 2:
        raise ValueError(f"chain length must be even and >= 2, got {n}")
    return delta / (2.0 * math.atanh(CROSSING ** (2.0 / n)))


def critical_size(temperature: float, delta: float = 2.0) -> float:
    """Largest chain supporting quantum advantage at fixed temperature."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    t = math.tanh(delta / (2.0 * temperature))
    if t >= 1.0:
        raise ValueError(
            f"tanh(delta/2T) saturates to 1 at T = {temperature}; the critical "
            "size overflows the floating-point range"
        )
    return 2.0 * math.log(CROSSING) / math.log(t)


def dephasing_probability(beta: float) -> float:
    """Single-qubit dephasing rate eps = (1 + e^{2 beta})^{-1} matching the
    thermal cluster state at delta = 2."""
    if beta < 0:
        raise ValueError("inverse temperature must be nonnegative")
    if math.isinf(beta):
        return 0.0
    w = math.exp(-2.0 * beta)
    return w / (1.0 + w)
