"""Gaussian states in the covariance-matrix picture.

Conventions: hbar = 2 so the vacuum has unit quadrature variance, and the
quadrature vector is interleaved as (q1, p1, q2, p2, ...).  Mode indices are
zero-based throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, PhysicalityError

PHYSICALITY_TOL = 1e-9
SYMMETRY_TOL = 1e-12

Z2 = np.diag([1.0, -1.0])
I2 = np.eye(2)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with blocks [[0, 1], [-1, 0]]."""
    if n_modes < 1:
        raise DomainError(f"n_modes must be >= 1, got {n_modes}")
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class CovarianceState:
    """Mean vector and covariance matrix of an N-mode Gaussian state.

    The covariance is symmetrised on construction; an asymmetry larger than
    ``SYMMETRY_TOL`` (relative to the largest entry) is rejected, as is any
    symplectic eigenvalue below ``1 - PHYSICALITY_TOL``.
    """

    mean: np.ndarray
    cov: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise DomainError(f"covariance must be a 2N x 2N matrix, got shape {cov.shape}")
        if mean.shape[0] != cov.shape[0]:
            raise DomainError(
                f"mean has length {mean.shape[0]} but covariance is {cov.shape[0]}x{cov.shape[0]}"
            )
        if not np.all(np.isfinite(cov)) or not np.all(np.isfinite(mean)):
            raise DomainError("mean and covariance must be finite")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
            raise DomainError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)
        if self.check:
            nu = symplectic_eigenvalues(cov)
            if nu[0] < 1.0 - PHYSICALITY_TOL:
                raise PhysicalityError(
                    f"smallest symplectic eigenvalue {nu[0]:.6g} < 1: state violates the uncertainty relation"
                )

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 covariance block between modes ``i`` and ``j``."""
        return self.cov[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]

    def tensor(self, other: "CovarianceState") -> "CovarianceState":
        """Product state with ``other``'s modes appended after this one's."""
        n1, n2 = self.cov.shape[0], other.cov.shape[0]
        cov = np.zeros((n1 + n2, n1 + n2))
        cov[:n1, :n1] = self.cov
        cov[n1:, n1:] = other.cov
        return CovarianceState(np.concatenate([self.mean, other.mean]), cov, check=False)


CovLike = Union[CovarianceState, np.ndarray, Sequence[Sequence[float]]]


def _as_cov(cov: CovLike) -> np.ndarray:
    if isinstance(cov, CovarianceState):
        return cov.cov
    m = np.asarray(cov, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise DomainError(f"covariance must be a 2N x 2N matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
        raise DomainError("covariance matrix is not symmetric")
    return 0.5 * (m + m.T)


def _check_mode(state: CovarianceState, mode: int) -> None:
    if not 0 <= mode < state.n_modes:
        raise DomainError(f"mode index {mode} out of range for a {state.n_modes}-mode state")


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


# ---------------------------------------------------------------------------
# state preparation


def tmsv_cov(v: float) -> np.ndarray:
    """Covariance of a two-mode squeezed vacuum with single-mode variance ``v``."""
    if v < 1.0:
        raise DomainError(f"TMSV variance must be >= 1, got {v}")
    c = np.sqrt(max(v * v - 1.0, 0.0))
    return np.block([[v * I2, c * Z2], [c * Z2, v * I2]])


def prepare_gaussian(kind: str, **params) -> CovarianceState:
    """Canonical Gaussian states.

    ``vacuum`` (optional ``n_modes``), ``coherent`` (``q``, ``p``),
    ``thermal`` (``v_t`` or ``n_bar``), ``squeezed_single`` (``r_s``, q squeezed)
    and ``tmsv`` (``r`` or ``v``).
    """
    if kind == "vacuum":
        n = int(params.get("n_modes", 1))
        return CovarianceState(np.zeros(2 * n), np.eye(2 * n))
    if kind == "coherent":
        q, p = float(params.get("q", 0.0)), float(params.get("p", 0.0))
        if not (np.isfinite(q) and np.isfinite(p)):
            raise DomainError("coherent amplitude must be finite")
        return CovarianceState(np.array([q, p]), np.eye(2))
    if kind == "thermal":
        if "n_bar" in params:
            v_t = 2.0 * float(params["n_bar"]) + 1.0
        else:
            v_t = float(params["v_t"])
        if v_t < 1.0:
            raise DomainError(f"thermal variance v_t must be >= 1, got {v_t}")
        return CovarianceState(np.zeros(2), v_t * np.eye(2))
    if kind == "squeezed_single":
        r_s = float(params["r_s"])
        if r_s < 0.0:
            raise DomainError(f"squeezing r_s must be >= 0, got {r_s}")
        return CovarianceState(np.zeros(2), np.diag([np.exp(-2 * r_s), np.exp(2 * r_s)]))
    if kind == "tmsv":
        if "v" in params:
            v = float(params["v"])
        else:
            v = float(np.cosh(2.0 * float(params["r"])))
        return CovarianceState(np.zeros(4), tmsv_cov(v))
    raise DomainError(f"unknown Gaussian state kind {kind!r}")


# ---------------------------------------------------------------------------
# symplectic transforms


def beam_splitter_matrix(tau: float) -> np.ndarray:
    """4x4 symplectic matrix of a beam splitter with intensity transmissivity ``tau``."""
    _check_unit("tau", tau)
    t, s = np.sqrt(tau), np.sqrt(1.0 - tau)
    return np.block([[t * I2, s * I2], [-s * I2, t * I2]])


def _embed(small: np.ndarray, modes: Sequence[int], n_modes: int) -> np.ndarray:
    big = np.eye(2 * n_modes)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    big[np.ix_(idx, idx)] = small
    return big


def apply_symplectic(state: CovarianceState, S: np.ndarray, modes: Sequence[int] | None = None) -> CovarianceState:
    if modes is not None:
        S = _embed(S, modes, state.n_modes)
    return CovarianceState(S @ state.mean, S @ state.cov @ S.T, check=False)


def apply_beam_splitter(state: CovarianceState, mode_i: int, mode_j: int, tau: float) -> CovarianceState:
    _check_mode(state, mode_i)
    _check_mode(state, mode_j)
    if mode_i == mode_j:
        raise DomainError("beam splitter needs two distinct modes")
    return apply_symplectic(state, beam_splitter_matrix(tau), (mode_i, mode_j))


def partial_trace(state: CovarianceState, keep: Iterable[int]) -> CovarianceState:
    """Restrict to the modes in ``keep`` (in the given order)."""
    keep = list(keep)
    if not keep:
        raise DomainError("partial trace must keep at least one mode")
    for m in keep:
        _check_mode(state, m)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in keep])
    return CovarianceState(state.mean[idx], state.cov[np.ix_(idx, idx)], check=False)


def attenuate(state: CovarianceState, mode: int, tau: float, v_n: float = 1.0) -> CovarianceState:
    """Send ``mode`` through a lossy channel mixing in thermal noise of variance ``v_n``."""
    _check_mode(state, mode)
    _check_unit("tau", tau)
    if v_n < 1.0:
        raise DomainError(f"noise variance v_n must be >= 1, got {v_n}")
    n = state.n_modes
    joint = state.tensor(CovarianceState(np.zeros(2), v_n * np.eye(2), check=False))
    mixed = apply_beam_splitter(joint, mode, n, tau)
    return partial_trace(mixed, range(n))


def single_mode_transfer_cov(v: float, tau: float, v_n: float = 1.0) -> np.ndarray:
    """Closed form for a TMSV whose second mode crossed a (tau, v_n) channel."""
    c = np.sqrt(tau) * np.sqrt(max(v * v - 1.0, 0.0))
    b = tau * v + (1.0 - tau) * v_n
    return np.block([[v * I2, c * Z2], [c * Z2, b * I2]])


def two_mode_transfer_cov(v: float, tau1: float, tau2: float, v_n1: float = 1.0, v_n2: float = 1.0) -> np.ndarray:
    """Closed form for a TMSV with both modes sent through independent channels."""
    c = np.sqrt(tau1 * tau2) * np.sqrt(max(v * v - 1.0, 0.0))
    a = tau1 * v + (1.0 - tau1) * v_n1
    b = tau2 * v + (1.0 - tau2) * v_n2
    return np.block([[a * I2, c * Z2], [c * Z2, b * I2]])


# ---------------------------------------------------------------------------
# spectra and entropies


def symplectic_eigenvalues(cov: CovLike) -> np.ndarray:
    """Symplectic spectrum, ascending, one copy of each value."""
    m = _as_cov(cov)
    n = m.shape[0] // 2
    ev = np.linalg.eigvals(1j * symplectic_form(n) @ m)
    return np.sort(np.abs(ev))[::2]


def two_mode_symplectic_eigenvalues(cov: CovLike, transpose: bool = False) -> tuple[float, float]:
    """Closed-form (nu_minus, nu_plus) of a two-mode CM.

    With ``transpose`` the spectrum of the partially transposed CM is returned,
    which only flips the sign of det C in the seralian invariant.
    """
    m = _as_cov(cov)
    if m.shape != (4, 4):
        raise DomainError("two-mode covariance matrix required")
    det_a = np.linalg.det(m[:2, :2])
    det_b = np.linalg.det(m[2:, 2:])
    det_c = np.linalg.det(m[:2, 2:])
    det_m = np.linalg.det(m)
    delta = det_a + det_b + (-2.0 if transpose else 2.0) * det_c
    root = np.sqrt(max(delta * delta - 4.0 * det_m, 0.0))
    nu_plus_sq = 0.5 * (delta + root)
    # stable form of (delta - root) / 2
    nu_minus_sq = 2.0 * det_m / (delta + root) if delta + root > 0 else 0.0
    return float(np.sqrt(max(nu_minus_sq, 0.0))), float(np.sqrt(max(nu_plus_sq, 0.0)))


_G_SERIES_EDGE = 1e-8


def g_entropy(x: float) -> float:
    """Entropy in bits of a single-mode thermal state with symplectic eigenvalue ``x``."""
    if x < 1.0 - PHYSICALITY_TOL:
        raise PhysicalityError(f"symplectic eigenvalue {x:.6g} < 1")
    if x <= 1.0:
        return 0.0
    y = 0.5 * (x - 1.0)
    if x - 1.0 < _G_SERIES_EDGE:
        # (1+y)log(1+y) - y log y, expanded to second order in y
        return (y - y * np.log(y) + 0.5 * y * y) / np.log(2.0)
    return float((y + 1.0) * np.log2(y + 1.0) - y * np.log2(y))


def von_neumann_entropy(cov: CovLike) -> float:
    """Entropy in bits of the Gaussian state with covariance ``cov``."""
    return float(sum(g_entropy(nu) for nu in symplectic_eigenvalues(cov)))


def log_negativity_gaussian(cov: CovLike) -> float:
    """Logarithmic negativity (ebits) of a two-mode Gaussian state."""
    m = _as_cov(cov)
    if m.shape != (4, 4):
        raise DomainError(f"log-negativity needs a two-mode CM, got {m.shape[0] // 2} modes")
    nu_tilde, _ = two_mode_symplectic_eigenvalues(m, transpose=True)
    if nu_tilde <= 0.0:
        raise PhysicalityError("partially transposed CM has a vanishing symplectic eigenvalue")
    return max(0.0, -float(np.log2(nu_tilde)))


# ---------------------------------------------------------------------------
# measurements


def condition_on_measurement(
    state: CovarianceState,
    mode: int,
    kind: str,
    outcome: Sequence[float] | float | None = None,
) -> CovarianceState:
    """State of the remaining modes after measuring ``mode``.

    ``kind`` is ``homodyne_q``, ``homodyne_p`` or ``heterodyne``.  The
    conditional covariance does not depend on the outcome; the mean does and
    defaults to outcome zero.  Heterodyne outcomes are the raw (q, p) pair
    with one unit of vacuum noise added.
    """
    _check_mode(state, mode)
    if state.n_modes < 2:
        raise DomainError("cannot condition a single-mode state on itself")
    rest = [m for m in range(state.n_modes) if m != mode]
    ra = np.concatenate([[2 * m, 2 * m + 1] for m in rest])
    rb = np.array([2 * mode, 2 * mode + 1])
    A = state.cov[np.ix_(ra, ra)]
    B = state.cov[np.ix_(rb, rb)]
    C = state.cov[np.ix_(ra, rb)]
    if kind == "homodyne_q":
        gain = C @ np.linalg.pinv(np.diag([1.0, 0.0]) @ B @ np.diag([1.0, 0.0]))
    elif kind == "homodyne_p":
        gain = C @ np.linalg.pinv(np.diag([0.0, 1.0]) @ B @ np.diag([0.0, 1.0]))
    elif kind == "heterodyne":
        gain = C @ np.linalg.inv(B + I2)
    else:
        raise DomainError(f"unknown measurement kind {kind!r}")
    x = np.zeros(2)
    if outcome is not None:
        if kind == "heterodyne":
            x = np.asarray(outcome, dtype=float).reshape(2)
        elif kind == "homodyne_q":
            x[0] = float(np.asarray(outcome).reshape(-1)[0])
        else:
            x[1] = float(np.asarray(outcome).reshape(-1)[0])
    mean = state.mean[ra] + gain @ (x - state.mean[rb])
    return CovarianceState(mean, A - gain @ C.T, check=False)


def wigner_density(state: CovarianceState, point: Sequence[float]) -> float:
    R = np.asarray(point, dtype=float).reshape(-1)
    if R.shape[0] != state.cov.shape[0]:
        raise DomainError("phase-space point has the wrong dimension")
    det = np.linalg.det(state.cov)
    if det <= 0.0:
        raise DomainError("Wigner function undefined for a singular covariance matrix")
    d = R - state.mean
    quad = d @ np.linalg.solve(state.cov, d)
    return float(np.exp(-0.5 * quad) / ((2 * np.pi) ** state.n_modes * np.sqrt(det)))


# ---------------------------------------------------------------------------
# two-mode standard form


@dataclass(frozen=True)
class TwoModeStandardForm:
    a: float
    b: float
    c_plus: float
    c_minus: float

    def covariance(self) -> np.ndarray:
        C = np.diag([self.c_plus, self.c_minus])
        return np.block([[self.a * I2, C], [C, self.b * I2]])


def standard_form(cov: CovLike) -> TwoModeStandardForm:
    """Local-symplectic invariants (a, b, c+, c-) with c+ >= |c-|."""
    m = _as_cov(cov)
    if m.shape != (4, 4):
        raise DomainError("standard form is defined for two-mode CMs")
    det_a = np.linalg.det(m[:2, :2])
    det_b = np.linalg.det(m[2:, 2:])
    det_c = np.linalg.det(m[:2, 2:])
    det_m = np.linalg.det(m)
    if det_a < 1.0 - PHYSICALITY_TOL or det_b < 1.0 - PHYSICALITY_TOL:
        raise PhysicalityError("local determinants below one")
    a, b = np.sqrt(det_a), np.sqrt(det_b)
    ab = a * b
    # det M = (ab - c+^2)(ab - c-^2) and det C = c+ c-
    s = (ab * ab + det_c * det_c - det_m) / ab
    plus = np.sqrt(max(s + 2.0 * det_c, 0.0))
    minus = np.sqrt(max(s - 2.0 * det_c, 0.0))
    return TwoModeStandardForm(float(a), float(b), float(0.5 * (plus + minus)), float(0.5 * (plus - minus)))
