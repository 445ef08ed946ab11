"""GHZ-like states, dimension expansion, and the bipartite qudit strategy.

A GHZ-like state over n parties of local dimension d is sum_j s_j |j...j>
with nonnegative coefficients sorted descending. Grouping k copies of such a
state as a single state of local dimension d^k stays in the family; the
sample count n_de_k prices verifying k-copy groups with the qudit strategy
whose second-largest eigenvalue is ((n-1)s0^2 + s1^2) / (n + (n-1)s0^2 +
s1^2) in terms of the top two coefficients.

For two qubit pairs per party (d = 4) the concrete strategy is built from
five mutually unbiased bases of the two-qubit space: one party measures a
basis drawn with fixed weights, announces the outcome, and the other party
accepts exactly the matching reduced state. Both parties initiate with equal
probability; the resulting operator fixes the target and has second-largest
eigenvalue cos^2(theta) / (2 + cos^2(theta)).

Sorted tensor-power coefficients grow as d^k, so tensor_power_spec refuses
to materialize past the dense cap; n_de_k instead evaluates the top-two
coefficients of the power spec in closed form (s0^k and s0^(k-1) s1), which
is exact for any k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qcore import DENSE_DIM_CAP, Ket, Operator
from .strategy import ComplexityReport, Strategy

# =====================================================================
# Domain types
# =====================================================================


@dataclass
class GhzSpec:
    """Shape of a GHZ-like state: party count, local dimension, coefficients."""

    n: int
    d: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.n = int(self.n)
        self.d = int(self.d)
        if self.n < 2:
            raise ValueError(f"party count must be at least 2: {self.n}")
        if self.d < 2:
            raise ValueError(f"local dimension must be at least 2: {self.d}")
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if self.coeffs.size != self.d:
            raise ValueError(f"{self.coeffs.size} coefficients for local dimension {self.d}")
        if np.any(self.coeffs < 0.0):
            raise ValueError("coefficients must be nonnegative")
        if np.any(np.diff(self.coeffs) > 1e-12):
            raise ValueError("coefficients must be sorted descending")
        total = float(np.sum(self.coeffs**2))
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"coefficient square-sum {total} is not 1")


@dataclass
class MubBasis:
    """One of the five mutually unbiased bases of the two-qubit space."""

    label: int
    vectors: list[Ket]

    def __post_init__(self) -> None:
        if not 0 <= self.label <= 4:
            raise ValueError(f"basis label {self.label} outside 0..4")
        if len(self.vectors) != 4:
            raise ValueError(f"basis needs 4 vectors, got {len(self.vectors)}")
        gram = np.array(
            [[v.amplitudes.conj() @ w.amplitudes for w in self.vectors] for v in self.vectors]
        )
        dev = float(np.max(np.abs(gram - np.eye(4))))
        if dev > 1e-12:
            raise ValueError(f"basis {self.label} not orthonormal: deviation {dev:.3e}")


# Basis tables: rows are basis vectors over |00>, |01>, |10>, |11>.
_MUB_TABLES: list[np.ndarray] = [
    np.eye(4, dtype=complex),
    np.array(
        [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, -1, 1], [1, -1, 1, -1]], dtype=complex
    )
    / 2.0,
    np.array(
        [[1, -1, -1j, -1j], [1, -1, 1j, 1j], [1, 1, 1j, -1j], [1, 1, -1j, 1j]],
        dtype=complex,
    )
    / 2.0,
    np.array(
        [[1, -1j, -1j, -1], [1, -1j, 1j, 1], [1, 1j, 1j, -1], [1, 1j, -1j, 1]],
        dtype=complex,
    )
    / 2.0,
    np.array(
        [[1, -1j, -1, -1j], [1, -1j, 1, 1j], [1, 1j, -1, 1j], [1, 1j, 1, -1j]],
        dtype=complex,
    )
    / 2.0,
]


def mub_bases() -> list[MubBasis]:
    """The five mutually unbiased bases used by the d = 4 strategy."""
    return [
        MubBasis(label, [Ket(row, (2, 2)) for row in table])
        for label, table in enumerate(_MUB_TABLES)
    ]


# =====================================================================
# States and tensor powers
# =====================================================================


def ghz_ket(spec: GhzSpec) -> Ket:
    """The GHZ-like state sum_j s_j |j>^(x n) with dims (d,) * n."""
    size = spec.d**spec.n
    amps = np.zeros(size, dtype=complex)
    stride = (size - 1) // (spec.d - 1)  # index of |j...j> is j * stride
    for j in range(spec.d):
        amps[j * stride] = spec.coeffs[j]
    return Ket(amps, (spec.d,) * spec.n)


def tensor_power_spec(spec: GhzSpec, k: int) -> GhzSpec:
    """Coefficient spec of k regrouped copies: all k-fold products, sorted.

    The state of the result equals the k-fold tensor power of the input
    state after regrouping each party's k qudits into one d^k qudit.
    """
    if k < 1:
        raise ValueError(f"power must be at least 1: {k}")
    size = spec.d**k
    if size > DENSE_DIM_CAP:
        raise ValueError(f"tensor power dimension {size} exceeds cap {DENSE_DIM_CAP}")
    prods = np.array([1.0])
    for _ in range(k):
        prods = np.kron(prods, spec.coeffs)
    return GhzSpec(spec.n, size, np.sort(prods)[::-1])


def lambda2_lhz(spec: GhzSpec) -> float:
    """Second-largest eigenvalue of the reference qudit strategy for spec."""
    s0sq = float(spec.coeffs[0]) ** 2
    s1sq = float(spec.coeffs[1]) ** 2
    top = (spec.n - 1) * s0sq + s1sq
    return top / (spec.n + top)


def n_de_k(spec: GhzSpec, k: int, epsilon: float, delta: float) -> ComplexityReport:
    """Sample counts for verifying k-copy groups of a GHZ-like state.

    approx_N is the leading-order count
    (n + (n-1) s0^(2k) + s0^(2k-2) s1^2) / (n epsilon) * ln(1/delta);
    exact_N prices each k-copy test at the relaxed per-group infidelity
    eps' = 1 - (1 - epsilon)^k and multiplies the test count by k. The
    second-largest eigenvalue of the regrouped strategy is evaluated in
    closed form from the top two power coefficients s0^k and s0^(k-1) s1,
    valid for any k without materializing the power spec.
    """
    if k < 1:
        raise ValueError(f"power must be at least 1: {k}")
    if not 0.0 < epsilon < 1.0 or not 0.0 < delta < 1.0:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    s0 = float(spec.coeffs[0])
    s1 = float(spec.coeffs[1])
    n = spec.n
    top = (n - 1) * s0 ** (2 * k) + s0 ** (2 * k - 2) * s1**2
    approx = (n + top) / (n * epsilon) * math.log(1.0 / delta)
    lam2k = top / (n + top)
    eps_group = -math.expm1(k * math.log1p(-epsilon))  # 1 - (1-eps)^k
    exact = k * math.log(delta) / math.log1p(-(1.0 - lam2k) * eps_group)
    return ComplexityReport(epsilon, delta, exact, approx, "dimension_expansion")


# =====================================================================
# The (2, 1, 4) MUB strategy
# =====================================================================


def mub_strategy_d4(theta: float) -> Strategy:
    """Bipartite strategy for the theta family of two-qubit-pair states.

    The target is cos^2(t)|00> + cos(t)sin(t)(|11> + |22>) + sin^2(t)|33>
    over two ququarts. Each round one party (equal weight) measures a basis
    l drawn with weight p0 for the computational basis and (1 - p0)/4 for
    each unbiased basis, and the other party accepts the matching reduced
    state; basis vectors with zero overlap against the target reject
    outright. theta must lie strictly inside (0, pi/4) so the coefficient
    ordering stays non-degenerate.
    """
    if not 0.0 < theta < math.pi / 4.0:
        raise ValueError(f"theta = {theta} outside the open interval (0, pi/4)")
    c = math.cos(theta)
    s = math.sin(theta)
    coeffs = np.array([c * c, c * s, c * s, s * s])
    psi = np.zeros(16, dtype=complex)
    psi[[0, 5, 10, 15]] = coeffs
    target = Ket(psi, (4, 4))

    p0 = (coeffs[0] ** 2 + coeffs[1] ** 2) / (2.0 + coeffs[0] ** 2 + coeffs[1] ** 2)
    weights = [p0] + [(1.0 - p0) / 4.0] * 4

    decomposition: list[tuple[float, Operator]] = []
    omega = np.zeros((16, 16), dtype=complex)
    for weight, table in zip(weights, _MUB_TABLES):
        first = np.zeros((16, 16), dtype=complex)
        second = np.zeros((16, 16), dtype=complex)
        for u in table:
            reduced = coeffs * u.conj()
            norm = float(np.linalg.norm(reduced))
            if norm <= 1e-12:
                continue
            v = reduced / norm
            pu = np.outer(u, u.conj())
            pv = np.outer(v, v.conj())
            first += np.kron(pu, pv)
            second += np.kron(pv, pu)
        for half in (first, second):
            test = Operator((half + half.conj().T) / 2.0, (4, 4), hermitian=True)
            decomposition.append((weight / 2.0, test))
            omega += (weight / 2.0) * test.entries
    omega = (omega + omega.conj().T) / 2.0
    return Strategy(Operator(omega, (4, 4), hermitian=True), target, 1, decomposition)
