"""Single-copy and two-copy verification strategy analysis.

A strategy is a Hermitian accept operator Omega with 0 <= Omega <= I that
fixes the target state, optionally carrying its decomposition into projective
tests with sampling probabilities. Single-copy efficiency is governed by the
second-largest eigenvalue of Omega; the two-copy analysis reduces Omega to
three scalars (lambda_star, gamma_star, xi_star) obtained by compressing the
operator onto the subspace where the first copy is on target and the second
is orthogonal to it. From those scalars follow the local-maximum check, the
infidelity ceiling eps_max under which the two-copy pass analysis holds, and
sample-count estimates.

The compression uses the isometry W whose columns are psi (x) v_i for an
orthonormal basis v_i of psi-perp, so every eigenvalue problem here is of
size D-1 regardless of the doubled space's size, and the dense operator is
only ever applied to D-1 columns.

Channels enter through the Kraus picture: a trace-preserving channel whose
Kraus operators all map the target onto the all-zeros ket induces the
strategy Omega = sum_i M_i^dag |0..0><0..0| M_i.

Sample-count conventions: exact_N values use the exact ln ratio and are
reported as reals (consumers round up); approx_N uses the leading-order
1/((1 - eigenvalue) * epsilon) * ln(1/delta) form. eps_max is float("inf")
when unbounded; regime thresholds around sqrt(epsilon) follow fixed factors
of 10 either way, with an explicit ambiguity flag in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    HADAMARD,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    PHASE_S,
    Ket,
    Operator,
    bell_ket,
    orthonormal_complement,
)

UNBOUNDED = float("inf")

STRUCT_TOL = 1e-10


# =====================================================================
# Domain types
# =====================================================================

@dataclass
class Strategy:
    """Accept operator with its target state and copy count.

    ``omega`` acts on ``copies`` tensor copies of the target space and must
    carry the hermitian tag and fix target^(x copies). When a decomposition
    is given it must consist of probabilities summing to 1 and projective
    tests recombining to omega within 1e-10. Positivity of omega and the
    upper bound omega <= I are part of the contract but are not
    eigendecomposed at construction time (they are covered by spectrum
    checks in the test suite); everything verified here is O(dim^2).
    """

    omega: Operator
    target: Ket
    copies: int = 1
    decomposition: list[tuple[float, Operator]] | None = None

    def __post_init__(self) -> None:
        if self.copies < 1:
            raise ValueError(f"copy count must be at least 1: {self.copies}")
        if not self.omega.hermitian:
            raise ValueError("strategy operator must be tagged hermitian")
        expected = self.target.dim ** self.copies
        if self.omega.dim != expected:
            raise ValueError(
                f"operator side {self.omega.dim} does not match "
                f"target dim {self.target.dim} with {self.copies} copies"
            )
        tvec = self.target_product()
        dev = float(np.max(np.abs(self.omega.entries @ tvec - tvec)))
        if dev > STRUCT_TOL:
            raise ValueError(f"operator does not fix the target product state: deviation {dev:.3e}")
        if self.decomposition is not None:
            total = 0.0
            acc = np.zeros_like(self.omega.entries)
            for idx, (prob, test) in enumerate(self.decomposition):
                if prob < -STRUCT_TOL:
                    raise ValueError(f"test {idx} has negative probability {prob}")
                if test.dim != self.omega.dim:
                    raise ValueError(f"test {idx} has side {test.dim}, expected {self.omega.dim}")
                proj_dev = float(np.max(np.abs(test.entries @ test.entries - test.entries)))
                if proj_dev > STRUCT_TOL:
                    raise ValueError(f"test {idx} is not a projector: |T^2 - T| = {proj_dev:.3e}")
                total += prob
                acc = acc + prob * test.entries
            if abs(total - 1.0) > STRUCT_TOL:
                raise ValueError(f"test probabilities sum to {total}, not 1")
            mix_dev = float(np.max(np.abs(acc - self.omega.entries)))
            if mix_dev > STRUCT_TOL:
                raise ValueError(f"decomposition does not recombine to omega: deviation {mix_dev:.3e}")

    def target_product(self) -> np.ndarray:
        """Amplitudes of target^(x copies)."""
        vec = self.target.amplitudes
        for _ in range(self.copies - 1):
            vec = np.kron(vec, self.target.amplitudes)
        return vec


@dataclass
class TwoCopyAnalysis:
    """Scalars controlling a swap-symmetric two-copy strategy.

    ``eps_max`` is the infidelity ceiling: float("inf") when unbounded, None
    when it cannot be decided without a concrete epsilon.
    ``regime_ambiguous`` marks gamma_star falling between the two fixed
    sqrt(epsilon) thresholds (or an undecidable regime), in which case
    eps_max carries the bounded-case value but should be read with care.
    """

    lambda_star: float
    gamma_star: float
    xi_star: float
    eps_max: float | None
    local_max_ok: bool
    symmetric_ok: bool
    regime_ambiguous: bool = False

    def __post_init__(self) -> None:
        for name in ("lambda_star", "gamma_star", "xi_star"):
            val = getattr(self, name)
            if not -1e-9 <= val <= 1.0 + 1e-9:
                raise ValueError(f"{name} = {val} outside [0, 1]")
        expected = self.xi_star + self.gamma_star / 2.0 < 1.0
        if self.local_max_ok != expected:
            raise ValueError("local_max_ok inconsistent with xi_star + gamma_star/2 < 1")


@dataclass
class KrausChannel:
    """Trace-preserving channel given by its Kraus operators.

    Each operator maps the input space (prod of in_dims) to the output space
    (prod of out_dims); the completeness sum M^dag M must be the identity
    within 1e-10.
    """

    kraus_ops: list[np.ndarray]
    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        self.in_dims = tuple(int(d) for d in self.in_dims)
        self.out_dims = tuple(int(d) for d in self.out_dims)
        din = int(np.prod(self.in_dims))
        dout = int(np.prod(self.out_dims))
        if not self.kraus_ops:
            raise ValueError("channel needs at least one Kraus operator")
        self.kraus_ops = [np.asarray(m, dtype=complex) for m in self.kraus_ops]
        for idx, m in enumerate(self.kraus_ops):
            if m.shape != (dout, din):
                raise ValueError(
                    f"Kraus operator {idx} has shape {m.shape}, expected ({dout}, {din})"
                )
        acc = np.zeros((din, din), dtype=complex)
        for m in self.kraus_ops:
            acc += m.conj().T @ m
        dev = float(np.max(np.abs(acc - np.eye(din))))
        if dev > STRUCT_TOL:
            raise ValueError(f"channel is not trace preserving: |sum M^dag M - I| = {dev:.3e}")


@dataclass
class ComplexityReport:
    """Sample-count estimates at a working infidelity and confidence level."""

    epsilon: float
    delta: float
    exact_N: float
    approx_N: float
    formula_id: str

    def __post_init__(self) -> None:
        for name in ("epsilon", "delta"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise ValueError(f"{name} = {val} outside (0, 1)")
        if not self.exact_N > 0 or not self.approx_N > 0:
            raise ValueError("sample counts must be positive")


# =====================================================================
# Single-copy analysis
# =====================================================================

def lambda2(s: Strategy) -> float:
    """Second-largest eigenvalue of a single-copy strategy operator.

    Computed as the top eigenvalue after deflating exactly the target
    eigenvector (not the whole unit eigenspace), so operators with several
    unit eigenvalues report 1.
    """
    if s.copies != 1:
        raise ValueError(f"lambda2 needs a single-copy strategy, got copies = {s.copies}")
    tvec = s.target.amplitudes
    dev = float(np.max(np.abs(s.omega.entries @ tvec - tvec)))
    if dev > STRUCT_TOL:
        raise ValueError(f"target is not fixed by the operator: deviation {dev:.3e}")
    deflated = s.omega.entries - np.outer(tvec, tvec.conj())
    top = float(np.linalg.eigvalsh((deflated + deflated.conj().T) / 2.0)[-1])
    return max(top, 0.0)


def single_copy_complexity(lambda2: float, epsilon: float, delta: float) -> ComplexityReport:
    """Sample counts for repeated single-copy tests.

    exact_N = ln(delta) / ln(1 - (1 - lambda2) epsilon); approx_N is the
    leading-order 1/((1 - lambda2) epsilon) * ln(1/delta). A lambda2 of 1
    yields unbounded (inf) counts rather than an error.
    """
    if not 0.0 <= lambda2 <= 1.0:
        raise ValueError(f"lambda2 = {lambda2} outside [0, 1]")
    gap = (1.0 - lambda2) * epsilon
    if gap <= 0.0:
        return ComplexityReport(epsilon, delta, UNBOUNDED, UNBOUNDED, "single_copy")
    exact = math.log(delta) / math.log1p(-gap)
    approx = math.log(1.0 / delta) / gap
    return ComplexityReport(epsilon, delta, exact, approx, "single_copy")


# =====================================================================
# Two-copy analysis
# =====================================================================

def _swap_conjugate(entries: np.ndarray, d: int) -> np.ndarray:
    """F A F for the copy-swap F, done by index transposition."""
    return entries.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)


def _swap_columns(block: np.ndarray, d: int) -> np.ndarray:
    """Apply the copy swap to every column of a (d*d, m) block."""
    return block.reshape(d, d, -1).transpose(1, 0, 2).reshape(d * d, -1)


def symmetrize_two_copy(s: Strategy) -> Strategy:
    """Average a two-copy strategy with its swap conjugate.

    Idempotent, preserves the target fixed point. Any decomposition is
    dropped: swap-averaged tests are no longer projectors in general, while
    the averaged operator itself is exact.
    """
    if s.copies != 2:
        raise ValueError(f"symmetrization needs a two-copy strategy, got copies = {s.copies}")
    d = s.target.dim
    if s.omega.dim != d * d:
        raise ValueError(f"operator side {s.omega.dim} is not the two-copy square {d * d}")
    avg = (s.omega.entries + _swap_conjugate(s.omega.entries, d)) / 2.0
    return Strategy(Operator(avg, (d, d), hermitian=True), s.target, copies=2)


def two_copy_analysis(s: Strategy, tol: float = STRUCT_TOL, epsilon: float | None = None) -> TwoCopyAnalysis:
    """Compress a swap-symmetric two-copy strategy to its governing scalars.

    lambda_star is the top eigenvalue of twice the symmetric-subspace
    compression of omega restricted to (target (x) target-perp); gamma_star
    and xi_star are the matching compressions of F omega and (F/2 + I) omega.
    All three restricted matrices must come out Hermitian (they do when
    omega commutes with the swap, which the symmetry precondition enforces).

    eps_max follows the fixed regime thresholds: bounded-case formula when
    gamma_star >= 10 sqrt(epsilon), unbounded when gamma_star <= 0.1
    sqrt(epsilon), both-with-flag in between. Without an epsilon the regime
    is decided only in the clean gamma_star <= tol case (unbounded).
    """
    if s.copies != 2:
        raise ValueError(f"two-copy analysis needs copies = 2, got {s.copies}")
    d = s.target.dim
    om = s.omega.entries
    asym = float(np.max(np.abs(om - _swap_conjugate(om, d))))
    if asym > tol:
        raise ValueError(f"operator is not swap symmetric: deviation {asym:.3e} > {tol:.1e}")

    comp = orthonormal_complement(s.target)
    width = comp.shape[1]
    if width == 0:
        lam = gam = xi = 0.0
    else:
        w_iso = np.kron(s.target.amplitudes[:, None], comp)
        ps_w = (w_iso + _swap_columns(w_iso, d)) / 2.0
        om_ps_w = om @ ps_w
        om_w = om @ w_iso
        lam_mat = 2.0 * ps_w.conj().T @ om_ps_w
        gam_mat = w_iso.conj().T @ _swap_columns(om_w, d)
        xi_mat = gam_mat / 2.0 + w_iso.conj().T @ om_w
        lam = _top_of_restricted("lambda_star", lam_mat, tol)
        gam = _top_of_restricted("gamma_star", gam_mat, tol)
        xi = _top_of_restricted("xi_star", xi_mat, tol)

    if lam >= 1.0:
        raise ValueError(f"lambda_star = {lam} >= 1; two-copy analysis does not apply")
    local_ok = xi + gam / 2.0 < 1.0
    eps_max, ambiguous = insurance_ceiling(gam, xi, epsilon, tol)
    return TwoCopyAnalysis(lam, gam, xi, eps_max, local_ok, True, ambiguous)


def _top_of_restricted(name: str, mat: np.ndarray, tol: float) -> float:
    herm_dev = float(np.max(np.abs(mat - mat.conj().T)))
    if herm_dev > max(10.0 * tol, 1e-9):
        raise ValueError(f"restricted operator for {name} is not Hermitian: deviation {herm_dev:.3e}")
    top = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)[-1])
    return max(top, 0.0)


def insurance_ceiling(
    gamma: float, xi: float, epsilon: float | None = None, tol: float = STRUCT_TOL
) -> tuple[float | None, bool]:
    """Infidelity ceiling under which the two-copy pass bound holds, with regime flag.

    Returns (eps_max, ambiguous). gamma at or below 0.1 sqrt(epsilon) means
    the ceiling is unbounded (inf); gamma at or above 10 sqrt(epsilon) means
    the bounded-case formula applies cleanly; in between the bounded value is
    returned with the ambiguity flag set. Without an epsilon only the clean
    gamma <= tol case is decided.
    """
    if epsilon is None:
        if gamma <= tol:
            return UNBOUNDED, False
        return None, True
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon = {epsilon} outside (0, 1)")
    root = math.sqrt(epsilon)
    if gamma <= 0.1 * root:
        return UNBOUNDED, False
    bounded = 0.5 * epsilon + 0.5 * epsilon * ((1.0 - xi + 0.5 * gamma) / gamma) ** 2
    if gamma >= 10.0 * root:
        return bounded, False
    return bounded, True


def two_copy_complexity(analysis: TwoCopyAnalysis, epsilon: float, delta: float) -> ComplexityReport:
    """Sample counts for a two-copy strategy from its analysis scalars.

    Uses the leading-order per-round pass probability
    p = 1 - 2 (1 - lambda_star) epsilon; exact_N = 2 ln(delta) / ln(p) counts
    copies (two per round), approx_N is 1/((1 - lambda_star) epsilon) *
    ln(1/delta). The analysis must satisfy the local-maximum condition,
    lambda_star < 1, and epsilon <= eps_max; violations raise with the
    failing hypothesis named.
    """
    if not analysis.local_max_ok:
        raise ValueError(
            "local-maximum condition fails: xi_star + gamma_star/2 = "
            f"{analysis.xi_star + analysis.gamma_star / 2.0:.6f} >= 1"
        )
    if analysis.lambda_star >= 1.0:
        raise ValueError(f"lambda_star = {analysis.lambda_star} >= 1")
    if analysis.eps_max is None:
        raise ValueError("eps_max undecided; rerun the analysis with a concrete epsilon")
    if epsilon > analysis.eps_max:
        raise ValueError(f"epsilon = {epsilon} exceeds eps_max = {analysis.eps_max}")
    if not 0.0 < epsilon < 1.0 or not 0.0 < delta < 1.0:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    shrink = 2.0 * (1.0 - analysis.lambda_star) * epsilon
    if shrink >= 1.0:
        raise ValueError(f"pass probability 1 - {shrink} is not positive; epsilon too large")
    exact = 2.0 * math.log(delta) / math.log1p(-shrink)
    approx = math.log(1.0 / delta) / ((1.0 - analysis.lambda_star) * epsilon)
    return ComplexityReport(epsilon, delta, exact, approx, "two_copy")


# =====================================================================
# Channel correspondence
# =====================================================================

def strategy_from_channel(ch: KrausChannel, target: Ket) -> Strategy:
    """Strategy induced by a channel that funnels the target to |0...0>.

    Every Kraus operator must map the target to a multiple of the all-zeros
    output ket (checked; the first offending index is reported). The accept
    operator is sum_i M_i^dag |0..0><0..0| M_i, and the result is verified to
    fix the target product state.
    """
    din = int(np.prod(ch.in_dims))
    copies = _infer_copies(target.dim, din)
    tvec = target.amplitudes
    for _ in range(copies - 1):
        tvec = np.kron(tvec, target.amplitudes)
    for idx, m in enumerate(ch.kraus_ops):
        image = m @ tvec
        residual = image.copy()
        residual[0] = 0.0
        if float(np.linalg.norm(residual)) > STRUCT_TOL:
            raise ValueError(
                f"Kraus operator {idx} does not map the target to the all-zeros ket "
                f"(residual norm {float(np.linalg.norm(residual)):.3e})"
            )
    stack = np.stack([m.conj().T[:, 0] for m in ch.kraus_ops], axis=1)
    omega = stack @ stack.conj().T
    omega = (omega + omega.conj().T) / 2.0
    dims = ch.in_dims if copies == 1 else (target.dim,) * copies
    return Strategy(Operator(omega, dims, hermitian=True), target, copies=copies)


def _infer_copies(target_dim: int, channel_dim: int) -> int:
    copies = 1
    size = target_dim
    while size < channel_dim:
        size *= target_dim
        copies += 1
    if size != channel_dim:
        raise ValueError(
            f"channel input dim {channel_dim} is not a tensor power of target dim {target_dim}"
        )
    return copies


def reference_bell_artifacts() -> tuple[Strategy, KrausChannel]:
    """Reference single-copy Bell strategy and its six-operator Kraus channel.

    The strategy averages the three two-qubit parity tests (ZZ with +1
    accept, YY with -1, XX with +1), each drawn with probability 1/3; its
    second-largest eigenvalue is 1/3. The channel's Kraus operators pair the
    bras <0|, <1|, <+|, <-|, <+i|, <-i| on the first qubit with the unitaries
    I, X, H, XH, HS, XHS on the second, each weighted 1/sqrt(3), and induce
    exactly the same accept operator.
    """
    eye4 = np.eye(4, dtype=complex)
    tests = [
        (eye4 + np.kron(PAULI_Z, PAULI_Z)) / 2.0,
        (eye4 - np.kron(PAULI_Y, PAULI_Y)) / 2.0,
        (eye4 + np.kron(PAULI_X, PAULI_X)) / 2.0,
    ]
    omega = sum(tests) / 3.0
    target = bell_ket(0, 0)
    decomposition = [
        (1.0 / 3.0, Operator(t, (2, 2), hermitian=True)) for t in tests
    ]
    strat = Strategy(Operator(omega, (2, 2), hermitian=True), target, 1, decomposition)

    sq2 = 1.0 / np.sqrt(2.0)
    bras = [
        np.array([1.0, 0.0], dtype=complex),
        np.array([0.0, 1.0], dtype=complex),
        np.array([sq2, sq2], dtype=complex),
        np.array([sq2, -sq2], dtype=complex),
        np.array([sq2, sq2 * 1.0j], dtype=complex),
        np.array([sq2, -sq2 * 1.0j], dtype=complex),
    ]
    eye2 = np.eye(2, dtype=complex)
    unitaries = [
        eye2,
        PAULI_X,
        HADAMARD,
        PAULI_X @ HADAMARD,
        HADAMARD @ PHASE_S,
        PAULI_X @ HADAMARD @ PHASE_S,
    ]
    ket0 = np.array([[1.0], [0.0]], dtype=complex)
    kraus = [
        np.kron(ket0 @ bra.conj()[None, :], u) / np.sqrt(3.0)
        for bra, u in zip(bras, unitaries)
    ]
    channel = KrausChannel(kraus, (2, 2), (2, 2))
    return strat, channel


# =====================================================================
# JSON round trip
# =====================================================================

def strategy_to_json(s: Strategy) -> dict:
    """Serializable dict for a strategy (see strategy_from_json)."""
    payload = {
        "dims": list(s.target.dims),
        "copies": s.copies,
        "target": _encode_complex(s.target.amplitudes),
        "omega": _encode_complex(s.omega.entries.reshape(-1)),
    }
    if s.decomposition is not None:
        payload["decomposition"] = [
            {"p": float(p), "T": _encode_complex(t.entries.reshape(-1))}
            for p, t in s.decomposition
        ]
    return payload


def strategy_from_json(data: dict) -> Strategy:
    """Rebuild a strategy from its JSON dict form.

    Expected keys: dims (single-copy subsystem dims), copies, target and
    omega as [re, im] pair lists (omega row-major over the full multi-copy
    space), and optionally decomposition as a list of {p, T} entries.
    """
    dims = tuple(int(d) for d in data["dims"])
    copies = int(data["copies"])
    target = Ket(_decode_complex(data["target"]), dims)
    side = target.dim ** copies
    omega_vec = _decode_complex(data["omega"])
    if omega_vec.size != side * side:
        raise ValueError(f"omega has {omega_vec.size} entries, expected {side * side}")
    op_dims = dims if copies == 1 else (target.dim,) * copies
    omega = Operator(omega_vec.reshape(side, side), op_dims, hermitian=True)
    decomposition = None
    if data.get("decomposition") is not None:
        decomposition = []
        for entry in data["decomposition"]:
            tvec = _decode_complex(entry["T"])
            if tvec.size != side * side:
                raise ValueError(f"test has {tvec.size} entries, expected {side * side}")
            decomposition.append(
                (float(entry["p"]), Operator(tvec.reshape(side, side), op_dims, hermitian=True))
            )
    return Strategy(omega, target, copies, decomposition)


def _encode_complex(values: np.ndarray) -> list[list[float]]:
    flat = np.asarray(values, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _decode_complex(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("complex payload must be a list of [re, im] pairs")
    return arr[:, 0] + 1.0j * arr[:, 1]
