"""Protocol-level Monte Carlo simulation and an independent worst-case oracle.

Every trial consumes one fixed row of a (trials, 4) uniform table drawn once
from a counter-based generator keyed by the config seed. The columns are
(first component draw, second component draw, test-or-outcome draw, accept
threshold); a trial's result is a pure function of its own row and the
precomputed per-component tables, so aggregation order cannot change the
pass count and chunked execution reproduces serial runs bit for bit.

Source descriptors are a single ket or a weighted list of kets. Components
living on a single copy of the target space are drawn independently for each
stored copy (an i.i.d. source); components living on the full multi-copy
space are drawn once per round and model fakes correlated across copies.

The worst-case oracle maximizes the pass probability over product fakes
sqrt(1 - e) psi + sqrt(e) perp by sweeping both infidelities over a
geometric grid and, for each pair, alternating exact unit-sphere
maximizations of the objective in one orthogonal component with the other
held fixed. The inner step solves the quadratic-plus-linear sphere problem
through the eigendecomposition of the restricted operator (the plain top
eigenvector whenever the linear term vanishes), so the oracle shares no
formulas with the two-copy analysis it cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import hadamard

from .graph_strategy import GraphStrategy, fidelity_from_passrate, parity_accept_indices
from .graphs import graph_state
from .qcore import Ket, orthonormal_complement
from .strategy import Strategy, two_copy_analysis

_ORACLE_SEED = 20240502

# =====================================================================
# Trial configuration
# =====================================================================


@dataclass
class TrialConfig:
    """Trial count, seed, and source descriptor for a simulation run."""

    trials: int
    seed: int
    source: Ket | Sequence[tuple[float, Ket]]

    def __post_init__(self) -> None:
        self.trials = int(self.trials)
        if self.trials < 1:
            raise ValueError(f"trial count must be positive: {self.trials}")
        self.seed = int(self.seed)
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed {self.seed} outside the 64-bit range")
        if isinstance(self.source, Ket):
            self.source = ((1.0, self.source),)
        else:
            self.source = tuple((float(w), k) for w, k in self.source)
        if not self.source:
            raise ValueError("source needs at least one component")
        total = 0.0
        dim = self.source[0][1].dim
        for idx, (weight, ket) in enumerate(self.source):
            if weight < 0.0:
                raise ValueError(f"component {idx} has negative weight {weight}")
            if ket.dim != dim:
                raise ValueError(
                    f"component {idx} has dim {ket.dim}, expected {dim} like the first"
                )
            total += weight
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"component weights sum to {total}, not 1")


def _uniform_table(cfg: TrialConfig) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=cfg.seed))
    return gen.random((cfg.trials, 4))


def _component_indices(cum: np.ndarray, draws: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cum, draws, side="right"), cum.size - 1)


def _source_mode(cfg: TrialConfig, single_dim: int, copies: int) -> bool:
    """True when components are single-copy (i.i.d. per copy), else composite."""
    dim = cfg.source[0][1].dim
    if dim == single_dim:
        return True
    if dim == single_dim**copies and copies > 1:
        return False
    raise ValueError(
        f"source components of dim {dim} fit neither one copy ({single_dim}) "
        f"nor the full {copies}-copy space ({single_dim ** copies})"
    )


# =====================================================================
# Protocol sampling
# =====================================================================


def simulate_protocol(
    s: Strategy | GraphStrategy, cfg: TrialConfig
) -> tuple[int, float, float]:
    """Sample the verification protocol; returns (passes, p_emp, stderr).

    Graph strategies are simulated at the protocol level: per round a joint
    Bell outcome is drawn from its exact distribution and the parity decision
    is applied. Other strategies need a decomposition; per round a test is
    drawn and accepted against its exact conditional pass probability.
    """
    if isinstance(s, GraphStrategy):
        results = _graph_trials(s, cfg)
    elif isinstance(s, Strategy):
        if s.decomposition is None:
            raise ValueError(
                "strategy carries no decomposition and no protocol form; nothing to sample"
            )
        results = _decomposition_trials(s, cfg)
    else:
        raise ValueError(f"cannot simulate a {type(s).__name__}")
    passes = int(np.sum(results))
    p_emp = passes / cfg.trials
    stderr = math.sqrt(p_emp * (1.0 - p_emp) / cfg.trials)
    return passes, p_emp, stderr


def _bell_table(n: int, pair_matrix: np.ndarray, c_idx: np.ndarray) -> np.ndarray:
    """Flattened Bell-outcome distribution for a (d, d) pair amplitude matrix."""
    d = 1 << n
    rows = np.arange(d, dtype=np.int64)
    gathered = pair_matrix[rows[:, None], rows[None, :] ^ rows[:, None]]
    amps = hadamard(d, dtype=float) @ gathered / np.sqrt(d)
    return np.abs(amps.reshape(-1)) ** 2


def _graph_trials(gs: GraphStrategy, cfg: TrialConfig) -> np.ndarray:
    d = 1 << gs.graph.n
    iid = _source_mode(cfg, d, 2)
    weights = np.array([w for w, _ in cfg.source])
    kets = [k.amplitudes for _, k in cfg.source]
    cum = np.cumsum(weights)
    uniforms = _uniform_table(cfg)

    c_idx = parity_accept_indices(gs.graph)
    accepted = np.zeros(d * d, dtype=bool)
    accepted[c_idx * d + np.arange(d)] = True

    if iid:
        first = _component_indices(cum, uniforms[:, 0])
        second = _component_indices(cum, uniforms[:, 1])
        keys = first * len(kets) + second
    else:
        keys = _component_indices(cum, uniforms[:, 0])

    results = np.zeros(cfg.trials, dtype=bool)
    for key in np.unique(keys):
        if iid:
            pair = np.outer(kets[key // len(kets)], kets[key % len(kets)])
        else:
            pair = kets[key].reshape(d, d)
        probs = _bell_table(gs.graph.n, pair, c_idx)
        mask = keys == key
        outcomes = _component_indices(np.cumsum(probs), uniforms[mask, 2])
        results[mask] = accepted[outcomes]
    return results


def _decomposition_trials(s: Strategy, cfg: TrialConfig) -> np.ndarray:
    iid = _source_mode(cfg, s.target.dim, s.copies)
    if iid and s.copies > 2:
        raise ValueError(
            f"i.i.d. sampling supports at most two copies, got {s.copies}; "
            "provide composite components"
        )
    weights = np.array([w for w, _ in cfg.source])
    kets = [k.amplitudes for _, k in cfg.source]
    cum = np.cumsum(weights)
    uniforms = _uniform_table(cfg)

    probs = np.array([p for p, _ in s.decomposition])
    tests = [t.entries for _, t in s.decomposition]
    cum_tests = np.cumsum(probs)
    cum_tests[-1] = max(cum_tests[-1], 1.0)

    if iid and s.copies == 2:
        first = _component_indices(cum, uniforms[:, 0])
        second = _component_indices(cum, uniforms[:, 1])
        keys = first * len(kets) + second
        states = [
            np.kron(kets[a], kets[b])
            for a in range(len(kets))
            for b in range(len(kets))
        ]
    else:
        keys = _component_indices(cum, uniforms[:, 0])
        states = kets

    table = np.empty((len(states), len(tests)))
    for i, state in enumerate(states):
        for l, test in enumerate(tests):
            val = float(np.real(state.conj() @ (test @ state)))
            table[i, l] = min(max(val, 0.0), 1.0)

    drawn = _component_indices(cum_tests, uniforms[:, 2])
    return uniforms[:, 3] < table[keys, drawn]


def fidelity_experiment(gs: GraphStrategy, ensemble: TrialConfig) -> tuple[float, float]:
    """Estimate fidelity from the sampled pass rate; returns (F_hat, F_true).

    Needs an i.i.d. single-copy source: F_hat is the square root of the
    empirical pass rate, F_true the exact overlap of the source's mixed state
    with the graph state.
    """
    d = 1 << gs.graph.n
    if not _source_mode(ensemble, d, 2):
        raise ValueError("fidelity estimation needs an i.i.d. single-copy source")
    _, p_emp, _ = simulate_protocol(gs, ensemble)
    f_hat = fidelity_from_passrate(p_emp)
    gvec = graph_state(gs.graph).amplitudes
    f_true = sum(
        w * float(np.abs(gvec.conj() @ k.amplitudes) ** 2) for w, k in ensemble.source
    )
    return f_hat, f_true


# =====================================================================
# Worst-case oracle
# =====================================================================


@dataclass
class WorstCaseReport:
    """Best fake-state pass probability found by the brute-force search."""

    p_hat: float
    argmax_state_descriptors: dict
    iterations: int
    converged: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_hat <= 1.0:
            raise ValueError(f"p_hat = {self.p_hat} outside [0, 1]")


def worst_case_oracle(
    s: Strategy,
    epsilon: float,
    probe_bound: float = 0.5,
    grid_points: int = 9,
    starts: int = 8,
    tol: float = 1e-10,
    max_iters: int = 500,
) -> WorstCaseReport:
    """Maximize the two-copy pass probability over independent pure fakes.

    Each copy is sqrt(1 - e) psi + sqrt(e) perp with its own infidelity e in
    [epsilon, probe_bound] and its own orthogonal component. The infidelity
    pair is swept over a geometric grid (with the (epsilon, epsilon) corner
    always included); for each pair, alternating exact sphere maximizations
    run until the objective changes by less than tol or the iteration cap is
    hit, from `starts` deterministic random starts. Ties resolve to the
    earliest run, so the result is reproducible.
    """
    if s.copies != 2:
        raise ValueError(f"oracle needs a two-copy strategy, got copies = {s.copies}")
    d = s.target.dim
    om = s.omega.entries
    swapped = om.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
    asym = float(np.max(np.abs(om - swapped)))
    if asym > 1e-10:
        raise ValueError(f"operator is not swap symmetric: deviation {asym:.3e}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon = {epsilon} outside (0, 1)")
    ceiling = two_copy_analysis(s, epsilon=epsilon).eps_max
    if ceiling is not None and epsilon >= ceiling:
        raise ValueError(f"epsilon = {epsilon} is not below eps_max = {ceiling}")

    psi = s.target.amplitudes
    comp = orthonormal_complement(s.target)
    width = comp.shape[1]
    if width == 0:
        raise ValueError("target space has no orthogonal directions to fake")
    omega4 = om.reshape(d, d, d, d)

    hi = min(probe_bound, 0.5)
    if not epsilon < hi:
        raise ValueError(f"epsilon = {epsilon} is not below the probe bound {hi}")
    grid = np.geomspace(epsilon, hi, grid_points)
    pairs = [(epsilon, epsilon)] + [(a, b) for a in grid for b in grid]

    rng = np.random.Generator(np.random.Philox(key=_ORACLE_SEED))
    x_starts = _random_units(rng, starts, width)
    y_starts = _random_units(rng, starts, width)

    best = (-1.0, None)
    for a, b in pairs:
        for st in range(starts):
            value, x, y, iters, conv = _alternate(
                omega4, psi, comp, a, b, x_starts[st], y_starts[st], tol, max_iters
            )
            if value > best[0]:
                best = (value, (a, b, x, y, iters, conv))

    value, (a, b, x, y, iters, conv) = best
    if value > 1.0 + 1e-8:
        raise ValueError(f"objective {value} exceeds 1; operator violates the <= I bound")
    descriptors = {
        "eps_r": float(a),
        "eps_r_prime": float(b),
        "perp": comp @ x,
        "perp_prime": comp @ y,
    }
    return WorstCaseReport(min(max(value, 0.0), 1.0), descriptors, iters, conv)


def _random_units(rng: np.random.Generator, count: int, width: int) -> np.ndarray:
    block = rng.normal(size=(count, width)) + 1.0j * rng.normal(size=(count, width))
    return block / np.linalg.norm(block, axis=1, keepdims=True)


def _alternate(omega4, psi, comp, a, b, x0, y0, tol, max_iters):
    x, y = x0, y0
    previous = -np.inf
    for sweep in range(1, max_iters + 1):
        sigma_p = math.sqrt(1.0 - b) * psi + math.sqrt(b) * (comp @ y)
        m_first = np.einsum("j,ijkl,l->ik", sigma_p.conj(), omega4, sigma_p)
        x = _sphere_max(a, comp.conj().T @ m_first @ comp, comp.conj().T @ (m_first @ psi))

        sigma = math.sqrt(1.0 - a) * psi + math.sqrt(a) * (comp @ x)
        m_second = np.einsum("i,ijkl,k->jl", sigma.conj(), omega4, sigma)
        y = _sphere_max(b, comp.conj().T @ m_second @ comp, comp.conj().T @ (m_second @ psi))

        sigma_p = math.sqrt(1.0 - b) * psi + math.sqrt(b) * (comp @ y)
        value = float(np.real(sigma_p.conj() @ (m_second @ sigma_p)))
        if abs(value - previous) < tol:
            return value, x, y, sweep, True
        previous = value
    return previous, x, y, max_iters, False


def _sphere_max(mix: float, quad: np.ndarray, cross: np.ndarray) -> np.ndarray:
    """Unit x maximizing mix x'Qx + 2 sqrt(mix(1-mix)) Re(x'c)."""
    ahat = mix * (quad + quad.conj().T) / 2.0
    chat = math.sqrt(mix * (1.0 - mix)) * cross
    vals, vecs = np.linalg.eigh(ahat)
    beta = vecs.conj().T @ chat
    if float(np.linalg.norm(beta)) <= 1e-14:
        return vecs[:, -1]
    top = vals[-1]
    interior = top - vals > 1e-13 * max(1.0, abs(top))
    tail2 = float(np.sum(np.abs(beta[interior]) ** 2 / (top - vals[interior]) ** 2))
    top_mass = float(np.sum(np.abs(beta[~interior]) ** 2))
    if top_mass <= 1e-28 and tail2 <= 1.0:
        partial = vecs[:, interior] @ (beta[interior] / (top - vals[interior]))
        return partial + math.sqrt(max(1.0 - tail2, 0.0)) * vecs[:, -1]

    def norm2(mu: float) -> float:
        return float(np.sum(np.abs(beta) ** 2 / (mu - vals) ** 2))

    lo = top + max(math.sqrt(top_mass), 1e-300)
    while norm2(lo) < 1.0:
        lo = top + (lo - top) / 2.0
        if lo - top < 1e-280:
            break
    hi = top + float(np.linalg.norm(beta)) + 1e-30
    while norm2(hi) > 1.0:
        hi = top + 2.0 * (hi - top)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if norm2(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    x = vecs @ (beta / (mu - vals))
    return x / float(np.linalg.norm(x))
