"""Truncated Fock-basis density operators for one or two modes.

Two-mode basis states |n1 n2> are ordered with n2 running fastest, so a
density matrix reshapes to ``rho[n1, n2, m1, m2]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from math import comb, factorial
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import (
    DomainError,
    HeraldImpossibleError,
    PreconditionError,
    TruncationError,
    TruncationWarning,
    UnsupportedConfigurationError,
)
from .gaussian import CovarianceState

TRUNCATION_TOL = 1e-3
HEADROOM_TOL = 1e-6
HERALD_FLOOR = 1e-14
DEFAULT_CUTOFF = 12


@dataclass(frozen=True)
class FockDensity:
    """Normalised density matrix plus the weight it had before normalisation.

    For prepared states ``trace_weight`` is the population kept by the
    truncation; for conditional operations it is the success weight.
    """

    rho: np.ndarray
    n_modes: int
    cutoff: int
    trace_weight: float = 1.0

    def __post_init__(self):
        if self.n_modes not in (1, 2):
            raise DomainError("only one- and two-mode Fock states are supported")
        d = (self.cutoff + 1) ** self.n_modes
        if self.rho.shape != (d, d):
            raise DomainError(f"rho must be {d}x{d} for cutoff {self.cutoff}, got {self.rho.shape}")

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))

    def tensor4(self) -> np.ndarray:
        d = self.dim
        return self.rho.reshape(d, d, d, d)

    def populations(self) -> np.ndarray:
        """Photon-number populations, shape (d,) or (d, d)."""
        p = np.real(np.diag(self.rho))
        return p if self.n_modes == 1 else p.reshape(self.dim, self.dim)

    def is_physical(self, tol: float = 1e-9) -> bool:
        if np.max(np.abs(self.rho - self.rho.conj().T)) > 1e-10:
            return False
        return bool(np.linalg.eigvalsh(self.rho)[0] >= -tol)


def _normalised(rho: np.ndarray, n_modes: int, cutoff: int, weight: float) -> FockDensity:
    tr = float(np.real(np.trace(rho)))
    if tr > 0:
        rho = rho / tr
    return FockDensity(rho, n_modes, cutoff, weight)


def _check_truncation(weight: float, allow_truncation: bool, what: str) -> None:
    if 1.0 - weight > TRUNCATION_TOL and not allow_truncation:
        warnings.warn(
            f"{what}: {1.0 - weight:.3g} of the population lies beyond the cutoff",
            TruncationWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# state preparation


def fock_state(ns: Sequence[int], cutoff: int) -> FockDensity:
    ns = list(ns)
    d = cutoff + 1
    psi = np.zeros(d ** len(ns), dtype=complex)
    idx = 0
    for n in ns:
        if not 0 <= n <= cutoff:
            raise DomainError(f"photon number {n} exceeds cutoff {cutoff}")
        idx = idx * d + n
    psi[idx] = 1.0
    return pure_state(psi, len(ns), cutoff)


def pure_state(psi: np.ndarray, n_modes: int, cutoff: int) -> FockDensity:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = float(np.real(np.vdot(psi, psi)))
    if norm <= 0:
        raise DomainError("zero state vector")
    psi = psi / np.sqrt(norm)
    return FockDensity(np.outer(psi, psi.conj()), n_modes, cutoff, 1.0)


def tmsv_fock(r: float, cutoff: int = DEFAULT_CUTOFF, allow_truncation: bool = False) -> FockDensity:
    """Two-mode squeezed vacuum sum_n q_n |n n>, q_n = sqrt(1 - lam^2) lam^n, lam = tanh r."""
    if r < 0:
        raise DomainError(f"squeezing r must be >= 0, got {r}")
    if cutoff < 1:
        raise DomainError("cutoff must be >= 1")
    lam = np.tanh(r)
    n = np.arange(cutoff + 1)
    q = np.sqrt(1.0 - lam * lam) * lam**n
    weight = float(np.sum(q * q))
    _check_truncation(weight, allow_truncation, "tmsv_fock")
    d = cutoff + 1
    psi = np.zeros(d * d, dtype=complex)
    psi[n * d + n] = q
    psi /= np.sqrt(weight)
    return FockDensity(np.outer(psi, psi.conj()), 2, cutoff, weight)


def coherent_fock(q: float, p: float, cutoff: int, allow_truncation: bool = False) -> FockDensity:
    """Single-mode coherent state with quadrature means (q, p), alpha = (q + ip) / 2."""
    alpha = 0.5 * (q + 1j * p)
    n = np.arange(cutoff + 1)
    log_fact = np.array([np.sum(np.log(np.arange(1, k + 1))) for k in n])
    amp = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * log_fact) * alpha**n
    weight = float(np.sum(np.abs(amp) ** 2))
    _check_truncation(weight, allow_truncation, "coherent_fock")
    amp = amp / np.sqrt(weight)
    return FockDensity(np.outer(amp, amp.conj()), 1, cutoff, weight)


# ---------------------------------------------------------------------------
# single-mode operators and their action


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1)


def _on_mode(op: np.ndarray, mode: int, n_modes: int) -> np.ndarray:
    if n_modes == 1:
        return op
    eye = np.eye(op.shape[0])
    return np.kron(op, eye) if mode == 0 else np.kron(eye, op)


def _apply_local(state: FockDensity, mode: int, kraus: Sequence[np.ndarray]) -> np.ndarray:
    """sum_k K rho K^dagger with each K acting on ``mode``."""
    if not 0 <= mode < state.n_modes:
        raise DomainError(f"mode {mode} out of range for a {state.n_modes}-mode state")
    d = state.dim
    if state.n_modes == 1:
        return sum(K @ state.rho @ K.conj().T for K in kraus)
    t = state.tensor4()
    out = np.zeros_like(t)
    for K in kraus:
        if mode == 0:
            out += np.einsum("ia,abcd,jc->ibjd", K, t, K.conj(), optimize=True)
        else:
            out += np.einsum("ib,abcd,jd->aicj", K, t, K.conj(), optimize=True)
    return out.reshape(d * d, d * d)


def _top_population(state: FockDensity, mode: int) -> float:
    pops = state.populations()
    if state.n_modes == 1:
        return float(pops[-1])
    return float(pops[-1, :].sum() if mode == 0 else pops[:, -1].sum())


def apply_ladder(state: FockDensity, mode: int, which: str, allow_truncation: bool = False) -> FockDensity:
    """Apply a or a^dagger to ``mode``.

    The result is renormalised; ``trace_weight`` holds Tr(L rho L^dagger),
    i.e. <n> for annihilation and <n> + 1 for creation.  A zero weight leaves
    a zero matrix.
    """
    a = annihilation(state.cutoff)
    if which == "annihilate":
        op = a
    elif which == "create":
        if _top_population(state, mode) > HEADROOM_TOL and not allow_truncation:
            raise TruncationError("creation operator would push population past the cutoff")
        op = a.T
    else:
        raise DomainError(f"unknown ladder operation {which!r}")
    rho = _apply_local(state, mode, [op])
    weight = float(np.real(np.trace(rho)))
    return _normalised(rho, state.n_modes, state.cutoff, weight)


# ---------------------------------------------------------------------------
# beam splitter


@lru_cache(maxsize=None)
def _bs_block(total: int, tau: float) -> np.ndarray:
    """Beam-splitter unitary on the fixed-photon-number block |k, total-k>."""
    theta = np.arccos(np.sqrt(tau))
    G = np.zeros((total + 1, total + 1))
    for k in range(total + 1):
        # a1^dag a2 - a1 a2^dag acting on |k, total - k>
        if k < total:
            G[k + 1, k] = np.sqrt((k + 1) * (total - k))
        if k > 0:
            G[k - 1, k] = -np.sqrt(k * (total - k + 1))
    return expm(theta * G)


def bs_element(tau: float, n_out: tuple[int, int], n_in: tuple[int, int]) -> float:
    """<n_out| U(tau) |n_in>, with a1 -> sqrt(tau) a1 + sqrt(1-tau) a2 in the Heisenberg picture."""
    total = n_in[0] + n_in[1]
    if n_out[0] + n_out[1] != total:
        return 0.0
    return float(_bs_block(total, float(tau))[n_out[0], n_in[0]])


@lru_cache(maxsize=32)
def beam_splitter_unitary(tau: float, cutoff: int) -> np.ndarray:
    """BS unitary restricted to the truncated two-mode space (exact elements)."""
    d = cutoff + 1
    U = np.zeros((d * d, d * d))
    for n1 in range(d):
        for n2 in range(d):
            total = n1 + n2
            block = _bs_block(total, float(tau))
            for k in range(max(0, total - cutoff), min(total, cutoff) + 1):
                U[k * d + (total - k), n1 * d + n2] = block[k, n1]
    return U


MAX_BS_ENTRIES = None  # default budget: (cutoff + 1) ** 4


def apply_two_mode_bs(
    state: FockDensity,
    tau: float,
    ancilla: FockDensity | None = None,
    budget: int | None = MAX_BS_ENTRIES,
) -> FockDensity:
    """Mix the two modes of ``state`` (or ``state`` with ``ancilla``) on a beam splitter."""
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau must lie in [0, 1], got {tau}")
    if ancilla is not None:
        if state.n_modes != 1 or ancilla.n_modes != 1 or ancilla.cutoff != state.cutoff:
            raise DomainError("ancilla form needs two single-mode states with equal cutoff")
        state = FockDensity(np.kron(state.rho, ancilla.rho), 2, state.cutoff, state.trace_weight)
    if state.n_modes != 2:
        raise DomainError("beam splitter needs a two-mode state")
    limit = budget if budget is not None else state.dim**4
    if state.rho.size > limit:
        raise DomainError(f"state has {state.rho.size} entries, budget is {limit}")
    U = beam_splitter_unitary(float(tau), state.cutoff)
    return replace(state, rho=U @ state.rho @ U.T)


# ---------------------------------------------------------------------------
# loss channel


@dataclass(frozen=True)
class KrausLossChannel:
    tau: float
    max_terms: int

    def operators(self, cutoff: int) -> list[np.ndarray]:
        """G_l = sqrt((1-tau)^l / l!) tau^(n/2) a^l for l < max_terms."""
        d = cutoff + 1
        t = self.tau
        ops = []
        for l in range(min(self.max_terms, d)):
            G = np.zeros((d, d))
            for n in range(l, d):
                G[n - l, n] = np.sqrt(comb(n, l) * (1.0 - t) ** l) * t ** ((n - l) / 2.0)
            ops.append(G)
        return ops


def apply_loss_kraus(state: FockDensity, mode: int, tau: float) -> FockDensity:
    """Pure-loss channel of transmissivity ``tau`` on ``mode``."""
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau must lie in [0, 1], got {tau}")
    if tau == 1.0:
        return state
    ops = KrausLossChannel(tau, state.cutoff + 1).operators(state.cutoff)
    return replace(state, rho=_apply_local(state, mode, ops))


# ---------------------------------------------------------------------------
# heralded non-Gaussian operations


@dataclass(frozen=True)
class HeraldResult:
    state: FockDensity
    success_probability: float
    creation_probability: float

    def __post_init__(self):
        if not 0 < self.success_probability <= 1 + 1e-12:
            raise DomainError("herald success probability must lie in (0, 1]")


def herald_operator(tau: float, cutoff: int, ancilla_in: int, herald: int) -> np.ndarray:
    """<herald|_anc U(tau) |ancilla_in>_anc as an operator on the signal mode."""
    d = cutoff + 1
    M = np.zeros((d, d))
    for n in range(d):
        n_out = n + ancilla_in - herald
        if 0 <= n_out <= cutoff:
            M[n_out, n] = bs_element(tau, (n_out, herald), (n, ancilla_in))
    return M


_OP_SPEC = {"subtract": (0, None), "add": (1, 0), "replace": (1, 1)}


def nongaussian_op(
    state: FockDensity,
    which: str,
    sides: str = "both",
    bs_tau: float | Sequence[float] = 0.9,
    k: int = 1,
    detector: str = "pnr",
    ideal: bool = False,
    source_efficiency: float = 1.0,
) -> HeraldResult:
    """Heralded photon subtraction, addition or replacement on a two-mode state.

    Each selected side mixes its mode with an ancilla (vacuum for
    subtraction, one photon otherwise) on a beam splitter and keeps the
    event where the ancilla port registers k photons (subtract), vacuum
    (add) or one photon (replace).  ``bs_tau`` may be one value or one per
    side.  ``detector="on_off"`` heralds subtraction on any click.
    ``ideal=True`` applies a**k directly (success probability reported as 1).
    ``source_efficiency`` multiplies ``creation_probability`` once per
    single-photon ancilla consumed.
    """
    if state.n_modes != 2:
        raise DomainError("non-Gaussian operations act on two-mode states")
    if which not in _OP_SPEC:
        raise DomainError(f"unknown operation {which!r}")
    modes = {"mode1": [0], "mode2": [1], "both": [0, 1]}.get(sides)
    if modes is None:
        raise DomainError(f"sides must be mode1, mode2 or both, got {sides!r}")
    taus = list(bs_tau) if isinstance(bs_tau, (list, tuple)) else [bs_tau] * len(modes)
    if len(taus) != len(modes):
        raise DomainError("need one beam-splitter transmissivity per side")
    if k < 1:
        raise DomainError("herald photon count k must be >= 1")
    ancilla_in, herald = _OP_SPEC[which]
    if which == "subtract":
        herald = k

    current = state
    prob = 1.0
    for mode, tau in zip(modes, taus):
        if ideal:
            if which != "subtract":
                raise UnsupportedConfigurationError("ideal variant exists for subtraction only")
            ops = [np.linalg.matrix_power(annihilation(state.cutoff), k)]
        else:
            if not 0.0 < tau < 1.0:
                raise DomainError(f"beam-splitter transmissivity must lie in (0, 1), got {tau}")
            if ancilla_in and _top_population(current, mode) > HEADROOM_TOL:
                raise TruncationError("photon addition would push population past the cutoff")
            if which == "subtract" and detector == "on_off":
                ops = [herald_operator(tau, state.cutoff, 0, j) for j in range(1, state.cutoff + 1)]
            elif detector in ("pnr", "on_off"):
                ops = [herald_operator(tau, state.cutoff, ancilla_in, herald)]
            else:
                raise DomainError(f"unknown detector {detector!r}")
        rho = _apply_local(current, mode, ops)
        p = float(np.real(np.trace(rho)))
        if p < HERALD_FLOOR:
            raise HeraldImpossibleError(f"{which} herald on mode {mode} has probability {p:.3g}")
        if not ideal:
            prob *= p
        current = _normalised(rho, 2, state.cutoff, 1.0)
    n_photons = ancilla_in * len(modes)
    return HeraldResult(current, prob, prob * source_efficiency**n_photons)


# ---------------------------------------------------------------------------
# entanglement


def partial_transpose(state: FockDensity) -> np.ndarray:
    """Partial transpose on mode 2."""
    d = state.dim
    return state.tensor4().transpose(0, 3, 2, 1).reshape(d * d, d * d)


def log_negativity_fock(state: FockDensity) -> float:
    if state.n_modes != 2:
        raise DomainError("log-negativity needs a two-mode state")
    ev = np.linalg.eigvalsh(partial_transpose(state))
    negativity = float(-np.sum(ev[ev < 0]))
    return float(np.log2(1.0 + 2.0 * negativity))


def reduced_state(state: FockDensity, keep: int) -> np.ndarray:
    t = state.tensor4()
    return np.einsum("abcb->ac", t) if keep == 0 else np.einsum("abad->bd", t)


def _entropy_bits(rho: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(rho)
    ev = ev[ev > 1e-15]
    return float(-np.sum(ev * np.log2(ev)))


def entropy_of_entanglement_pure(state: FockDensity, purity_tol: float = 1e-6) -> float:
    if state.n_modes != 2:
        raise DomainError("entropy of entanglement needs a two-mode state")
    if state.purity() < 1.0 - purity_tol:
        raise PreconditionError("state is mixed; use log_negativity_fock for mixed states")
    return _entropy_bits(reduced_state(state, 0))


def ensemble_average(states: Sequence[FockDensity], weights: Sequence[float]) -> FockDensity:
    """Convex mixture sum_i p_i rho_i."""
    states = list(states)
    w = np.asarray(weights, dtype=float)
    if not states or len(states) != w.size:
        raise DomainError("need one weight per state")
    if abs(w.sum() - 1.0) > 1e-6 or np.any(w < 0):
        raise DomainError(f"weights must be non-negative and sum to 1, got {w.sum():.9g}")
    first = states[0]
    for s in states[1:]:
        if s.n_modes != first.n_modes or s.cutoff != first.cutoff:
            raise DomainError("all states in an ensemble must share dimensions")
    rho = sum(wi * s.rho for wi, s in zip(w, states))
    weight = float(sum(wi * s.trace_weight for wi, s in zip(w, states)))
    return FockDensity(rho, first.n_modes, first.cutoff, weight)


# ---------------------------------------------------------------------------
# moments


def covariance_of_fock(state: FockDensity) -> CovarianceState:
    """First and symmetrised second quadrature moments (hbar = 2).

    Moments come from normal-ordered expectations so the truncated ladder
    matrices are exact for any state supported below the cutoff.
    """
    if state.trace_weight < 1.0 - TRUNCATION_TOL and state.trace_weight <= 1.0:
        warnings.warn("state was heavily truncated; moments may be inaccurate", TruncationWarning, stacklevel=2)
    n = state.n_modes
    a1 = annihilation(state.cutoff)
    lowers = [_on_mode(a1, m, n) for m in range(n)]
    rho = state.rho
    ev = lambda op: complex(np.trace(rho @ op))
    alpha = np.array([ev(a) for a in lowers])
    # ladder vector A = (a1, a1^dag, a2, a2^dag, ...) and quadratures R = T A
    T = np.zeros((2 * n, 2 * n), dtype=complex)
    for m in range(n):
        T[2 * m, 2 * m], T[2 * m, 2 * m + 1] = 1.0, 1.0
        T[2 * m + 1, 2 * m], T[2 * m + 1, 2 * m + 1] = -1j, 1j
    first = np.empty(2 * n, dtype=complex)
    first[0::2], first[1::2] = alpha, alpha.conj()
    sym = np.empty((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            aa = ev(lowers[i] @ lowers[j])
            ad_a = ev(lowers[i].T @ lowers[j])  # <a_i^dag a_j>
            delta = 0.5 if i == j else 0.0
            sym[2 * i, 2 * j] = aa
            sym[2 * i + 1, 2 * j + 1] = np.conj(aa)
            sym[2 * i + 1, 2 * j] = ad_a + (delta if i == j else 0.0)
            sym[2 * i, 2 * j + 1] = np.conj(ad_a) + (delta if i == j else 0.0)
    # sym[i, j] = <(A_i A_j + A_j A_i)> / 2; for i == j the (a, a^dag) pair picks up +1/2
    mean = np.real(T @ first)
    second = np.real(T @ sym @ T.T)
    cov = second - np.outer(mean, mean)
    return CovarianceState(mean, 0.5 * (cov + cov.T), check=False)
