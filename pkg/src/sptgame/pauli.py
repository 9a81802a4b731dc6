"""Exact signed Pauli-string algebra on a periodic spin-1/2 chain.

Operators are stored in symplectic form

    P = i^phase * X^x * Z^z,

where ``x`` and ``z`` are n-bit masks (qubit j <-> bit j-1) and the phase is
an integer power of i kept mod 4.  Every product is exact; no floating point
enters the group algebra.  Site indices are 1-based and cyclic, mirroring the
periodic chain, and block p owns qubits 2p-1 and 2p.

The module also provides the constructors for the Z2xZ2 cluster-phase
operator zoo: stabilizers, global and truncated symmetry representations,
projective boundary operators, string order parameters, their twisted
variants, and decomposition into stabilizer products.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_PAULI_FACTORS = {
    (0, 0): np.eye(2),
    (1, 0): np.array([[0.0, 1.0], [1.0, 0.0]]),
    (0, 1): np.array([[1.0, 0.0], [0.0, -1.0]]),
    (1, 1): np.array([[0.0, -1.0], [1.0, 0.0]]),  # X @ Z
}

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


@dataclass(frozen=True)
class GroupElement:
    """Element (a, b) of Z2 x Z2, composed by bitwise addition mod 2."""

    a: int
    b: int

    def __post_init__(self):
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise ValueError("group element bits must be 0 or 1")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement((self.a + other.a) % 2, (self.b + other.b) % 2)

    @property
    def is_identity(self) -> bool:
        return self.a == 0 and self.b == 0

    @property
    def label(self) -> str:
        return {(0, 0): "e", (0, 1): "x", (1, 0): "y", (1, 1): "z"}[(self.a, self.b)]

    def __repr__(self):
        return f"GroupElement({self.label})"


E = GroupElement(0, 0)
GX = GroupElement(0, 1)
GY = GroupElement(1, 0)
GZ = GroupElement(1, 1)

NONTRIVIAL = (GX, GY, GZ)
#: the six ordered pairs (g, h) of distinct nontrivial elements
ORDERED_PAIRS = tuple((g, h) for g in NONTRIVIAL for h in NONTRIVIAL if g != h)


def from_label(label: str) -> GroupElement:
    return {"e": E, "x": GX, "y": GY, "z": GZ}[label]


def _parity(mask: int) -> int:
    return mask.bit_count() & 1


@dataclass(frozen=True)
class PauliString:
    """Signed n-qubit Pauli operator i^phase * X^x * Z^z with cyclic sites."""

    n: int
    x: int
    z: int
    phase: int  # power of i, mod 4

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("mask exceeds qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- group algebra ----------------------------------------------------

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Exact group product; Z^z1 moved past X^x2 costs (-1)^{z1.x2}."""
        if self.n != other.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n}")
        phase = (self.phase + other.phase + 2 * _parity(self.z & other.x)) % 4
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z, phase)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n}")
        return (_parity(self.x & other.z) ^ _parity(self.z & other.x)) == 0

    def adjoint(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, -self.phase + 2 * self.y_count)

    @property
    def y_count(self) -> int:
        return (self.x & self.z).bit_count()

    @property
    def is_hermitian(self) -> bool:
        # i^phase X^x Z^z is self-adjoint iff phase and Y-count share parity
        return (self.phase - self.y_count) % 2 == 0

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0 and self.phase == 0

    def hermitized(self) -> "PauliString":
        """Nearest Hermitian operator: untouched if already Hermitian,
        otherwise multiplied by i^((y_count - phase) mod 4)."""
        if self.is_hermitian:
            return self
        return PauliString(self.n, self.x, self.z, self.y_count)

    # -- conversions -------------------------------------------------------

    def site(self, j: int) -> tuple[int, int]:
        """(x, z) bits at 1-based cyclic site j."""
        b = (j - 1) % self.n
        return (self.x >> b) & 1, (self.z >> b) & 1

    def to_matrix(self) -> np.ndarray:
        """Dense matrix, little-endian (qubit 1 = least significant bit)."""
        if self.n > 12:
            raise ValueError("dense Pauli matrix limited to n <= 12")
        m = np.array([[1.0]])
        for j in range(1, self.n + 1):
            m = np.kron(_PAULI_FACTORS[self.site(j)], m)
        return (1j ** self.phase) * m

    def label(self) -> str:
        """Sparse human-readable form, e.g. '-i X1 Z3 Y5'."""
        sites = []
        for j in range(1, self.n + 1):
            xz = self.site(j)
            if xz != (0, 0):
                sites.append(f"{_LETTER[xz]}{j}")
        pref = {0: "+", 1: "+i", 2: "-", 3: "-i"}[(self.phase - self.y_count) % 4]
        return pref + (" ".join(sites) if sites else " 1")

    def __repr__(self):
        return f"PauliString({self.n}: {self.label()})"


def identity(n: int) -> PauliString:
    return PauliString(n, 0, 0, 0)


def from_sites(n: int, factors: dict[int, str], phase: int = 0) -> PauliString:
    """Pauli string with the given letters at 1-based cyclic sites.

    A 'Y' contributes its conventional phase, i.e. Y = i X Z per site.
    """
    x = z = 0
    for j, letter in factors.items():
        b = (j - 1) % n
        if letter in ("X", "Y"):
            if (x >> b) & 1:
                raise ValueError(f"site {j} assigned twice")
            x |= 1 << b
        if letter in ("Z", "Y"):
            if letter == "Z" and (z >> b) & 1:
                raise ValueError(f"site {j} assigned twice")
            z |= 1 << b
        if letter == "Y":
            phase += 1
        if letter not in ("X", "Y", "Z"):
            raise ValueError(f"unknown Pauli letter {letter!r}")
    return PauliString(n, x, z, phase)


def multiply(p: PauliString, q: PauliString) -> PauliString:
    return p * q


def commutes(p: PauliString, q: PauliString) -> bool:
    return p.commutes_with(q)


# -- cluster-phase operators ----------------------------------------------


def cluster_stabilizer(j: int, n: int) -> PauliString:
    """K_j = Z_{j-1} X_j Z_{j+1} with cyclic site indices."""
    if not 1 <= j <= n:
        raise ValueError(f"site {j} outside 1..{n}")
    x = 1 << (j - 1)
    z = (1 << ((j - 2) % n)) ^ (1 << (j % n))
    return PauliString(n, x, z, 0)


def _require_even(n: int):
    if n % 2:
        raise ValueError(f"chain length must be even, got {n}")


def symmetry_rep(g: GroupElement, n: int) -> PauliString:
    """U((a,b)) = X^a on odd sites, X^b on even sites."""
    _require_even(n)
    x = 0
    for j in range(1, n + 1):
        if (g.a if j % 2 else g.b):
            x |= 1 << (j - 1)
    return PauliString(n, x, 0, 0)


def onsite_rep(g: GroupElement) -> PauliString:
    """Two-qubit onsite factor u((a,b)) = X^a (x) X^b."""
    return PauliString(2, g.a | (g.b << 1), 0, 0)


def boundary_ops(g: GroupElement) -> tuple[PauliString, PauliString]:
    """Fixed-point boundary operators (V^L, V^R) on two qubits.

    V^L((a,b)) = Z^b (x) X^b Z^a and V^R((a,b)) = Z^b X^a (x) Z^a, with the
    literal per-site operator order preserved (Z^b X^a = (-1)^{ab} X^a Z^b).
    """
    a, b = g.a, g.b
    v_left = PauliString(2, g.b << 1, b | (a << 1), 0)
    v_right = PauliString(2, a, b | (a << 1), 2 * a * b)
    return v_left, v_right


def twist_phase(g: GroupElement, h: GroupElement) -> int:
    """Commutator phase of the projective edge representation, (-1)^{ad-bc}."""
    return 1 - 2 * ((g.a * h.b + g.b * h.a) % 2)


def embed_block(op: PauliString, p: int, n: int) -> PauliString:
    """Place a 2-qubit operator on block p (qubits 2p-1, 2p) of an n-chain."""
    if op.n != 2:
        raise ValueError("embed_block expects a 2-qubit operator")
    _require_even(n)
    out = identity(n)
    for q in (1, 2):
        xb, zb = op.site(q)
        site = ((2 * p - 2 + (q - 1)) % n) + 1
        b = site - 1
        out = PauliString(n, out.x | (xb << b), out.z | (zb << b), 0)
    return PauliString(n, out.x, out.z, op.phase)


def _blocks_between(p: int, q: int, nblocks: int) -> list[int]:
    """Blocks strictly between p and q, walking cyclically forward from p."""
    span = (q - p) % nblocks
    return [((p - 1 + k) % nblocks) + 1 for k in range(1, span)]


def truncated_symmetry(g: GroupElement, p: int, q: int, n: int) -> PauliString:
    """Bulk-truncated symmetry: u(g) on blocks p+1 .. q-1."""
    _require_even(n)
    if p >= q:
        raise ValueError(f"need block p < q, got p={p}, q={q}")
    return _truncated_symmetry_cyclic(g, p, q, n)


def _truncated_symmetry_cyclic(g: GroupElement, p: int, q: int, n: int) -> PauliString:
    out = identity(n)
    for blk in _blocks_between(p, q, n // 2):
        out = out * embed_block(onsite_rep(g), blk, n)
    return out


def string_order(g: GroupElement, p: int, q: int, n: int) -> PauliString:
    """String order parameter S_[p,q](g) = V^L_p U_[p,q](g) V^R_q.

    Blocks are cyclic: q < p walks forward through the boundary.  The trivial
    group element is rejected; it would yield the identity and silently
    degenerate any game built on it.
    """
    if g.is_identity:
        raise ValueError("string order parameter needs a nontrivial element")
    if p == q:
        raise ValueError("string endpoints must differ")
    v_left, v_right = boundary_ops(g)
    out = embed_block(v_left, p, n)
    out = out * _truncated_symmetry_cyclic(g, p, q, n)
    return out * embed_block(v_right, q, n)


def twisted_string_order(
    g: GroupElement, h: GroupElement, p: int, q: int, n: int
) -> PauliString:
    """Twisted string order parameter V^R_q(g) U(h) V^L_p(g) U_[p,q](g).

    The factor order is the defining one; the overlapping supports make the
    sign of the result depend on it.
    """
    if g.is_identity or h.is_identity:
        raise ValueError("twisted string order needs nontrivial elements")
    if p == q:
        raise ValueError("string endpoints must differ")
    v_left, v_right = boundary_ops(g)
    out = embed_block(v_right, q, n)
    out = out * symmetry_rep(h, n)
    out = out * embed_block(v_left, p, n)
    return out * _truncated_symmetry_cyclic(g, p, q, n)


# -- stabilizer products ----------------------------------------------------


@dataclass(frozen=True)
class StabilizerProduct:
    """sign * prod_j K_j^{r_j}, with r packed little-endian (bit j-1 = r_j)."""

    n: int
    bits: int
    sign: int

    @property
    def weight(self) -> int:
        return self.bits.bit_count()


def stabilizer_product(bits: int, n: int) -> PauliString:
    """Exact product prod_j K_j^{r_j} in ascending site order."""
    out = identity(n)
    for j in range(1, n + 1):
        if (bits >> (j - 1)) & 1:
            out = out * cluster_stabilizer(j, n)
    return out


def _rot_left(mask: int, n: int) -> int:
    full = (1 << n) - 1
    return ((mask << 1) | (mask >> (n - 1))) & full


def _rot_right(mask: int, n: int) -> int:
    full = (1 << n) - 1
    return ((mask >> 1) | (mask << (n - 1))) & full


def decompose_stabilizer_product(op: PauliString) -> StabilizerProduct | None:
    """Write op as +-kappa(r) if it lies in the stabilizer span.

    Each K_j is the unique generator carrying X_j, so r is op's X mask; the
    Z mask must then match r_{j-1} XOR r_{j+1} and the phase must come out
    +-1 against the exact regenerated product.  Returns None otherwise.
    """
    n = op.n
    bits = op.x
    if op.z != _rot_left(bits, n) ^ _rot_right(bits, n):
        return None
    ref = stabilizer_product(bits, n)
    if op == ref:
        return StabilizerProduct(n, bits, 1)
    if op == -ref:
        return StabilizerProduct(n, bits, -1)
    return None


@lru_cache(maxsize=None)
def _cached_twisted(g_label: str, h_label: str, p: int, q: int, n: int) -> PauliString:
    return twisted_string_order(from_label(g_label), from_label(h_label), p, q, n)


def twisted_string_order_cached(
    g: GroupElement, h: GroupElement, p: int, q: int, n: int
) -> PauliString:
    return _cached_twisted(g.label, h.label, p, q, n)
