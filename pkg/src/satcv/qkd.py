"""CV-QKD key rates, fading integration, post-selection and entanglement swapping.

Everything runs in the entanglement-based picture: Alice holds one mode of a
two-mode squeezed vacuum of variance ``v`` and sends the other through the
channel.  Squeezed-state protocols correspond to Alice measuring homodyne,
coherent-state protocols to Alice measuring heterodyne.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import fock as fk
from .atmosphere import DEFAULT_BINS, NORMALIZATION_TOL, FadingDistribution
from .errors import (
    DomainError,
    PreconditionError,
    ProtocolError,
    UnsupportedConfigurationError,
)
from .gaussian import (
    I2,
    Z2,
    CovarianceState,
    apply_beam_splitter,
    attenuate,
    condition_on_measurement,
    log_negativity_gaussian,
    single_mode_transfer_cov,
    tmsv_cov,
    von_neumann_entropy,
)

HOMODYNE_KINDS = ("homodyne_q", "homodyne_p")
TIE_TOL = 1e-15


# ---------------------------------------------------------------------------
# configuration and results


@dataclass(frozen=True)
class ProtocolConfig:
    state_type: str = "coherent"
    detection: str = "homodyne"
    reconciliation: str = "reverse"
    efficiency: float = 1.0
    alice_detection: str | None = None

    def __post_init__(self):
        if self.state_type not in ("coherent", "squeezed"):
            raise ProtocolError(f"state_type must be coherent or squeezed, got {self.state_type!r}")
        if self.detection not in ("homodyne", "heterodyne"):
            raise ProtocolError(f"detection must be homodyne or heterodyne, got {self.detection!r}")
        if self.reconciliation not in ("direct", "reverse"):
            raise ProtocolError(f"reconciliation must be direct or reverse, got {self.reconciliation!r}")
        if not 0.0 < self.efficiency <= 1.0:
            raise ProtocolError(f"reconciliation efficiency must lie in (0, 1], got {self.efficiency}")
        implied = "homodyne" if self.state_type == "squeezed" else "heterodyne"
        if self.alice_detection is not None and self.alice_detection != implied:
            raise ProtocolError(
                f"{self.state_type} states correspond to Alice measuring {implied}, not {self.alice_detection}"
            )

    @property
    def alice_kind(self) -> str:
        return "homodyne" if self.state_type == "squeezed" else "heterodyne"

    @property
    def bob_kind(self) -> str:
        return self.detection


def modulation_variance(v: float, state_type: str) -> float:
    """Prepare-and-measure modulation variance equivalent to TMSV variance ``v``."""
    if v < 1:
        raise DomainError(f"v must be >= 1, got {v}")
    if state_type == "squeezed":
        return v - 1.0 / v
    if state_type == "coherent":
        return v - 1.0
    raise ProtocolError(f"unknown state_type {state_type!r}")


@dataclass(frozen=True)
class ChannelPoint:
    tau: float
    omega: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise DomainError(f"tau must lie in [0, 1], got {self.tau}")
        if self.omega < 1.0:
            raise DomainError(f"omega must be >= 1, got {self.omega}")


@dataclass(frozen=True)
class RateResult:
    """Key-rate decomposition in bits per pulse sent.

    ``key_rate`` is the reported, non-negative rate; ``key_rate_raw`` is
    ``efficiency * mutual_info - holevo`` without any flooring.  For fading
    scenarios ``mutual_info`` and ``holevo`` are averages over the selected
    bins weighted by probability mass, so they too are per pulse sent.
    """

    key_rate: float
    key_rate_raw: float
    mutual_info: float
    holevo: float
    selection_probability: float = 1.0
    scenario: str = "fixed"
    lower_bound: bool = False
    per_eta_curve: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if not 0.0 <= self.selection_probability <= 1.0 + 1e-9:
            raise DomainError("selection probability must lie in [0, 1]")
        if self.key_rate < 0:
            raise DomainError("reported key rate must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.per_eta_curve is not None:
            d["per_eta_curve"] = [list(p) for p in self.per_eta_curve]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# single-channel key rate


def _outcome_cov(cov: np.ndarray, mode: int, kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Rows selected by a measurement and the noise it adds to them."""
    if kind == "homodyne_q":
        return np.array([2 * mode]), np.zeros((1, 1))
    if kind == "homodyne_p":
        return np.array([2 * mode + 1]), np.zeros((1, 1))
    return np.array([2 * mode, 2 * mode + 1]), I2


def _mutual_information(cov: np.ndarray, kind_a: str, kind_b: str) -> float:
    ra, na = _outcome_cov(cov, 0, kind_a)
    rb, nb = _outcome_cov(cov, 1, kind_b)
    sa = cov[np.ix_(ra, ra)] + na
    sb = cov[np.ix_(rb, rb)] + nb
    rows = np.concatenate([ra, rb])
    joint = cov[np.ix_(rows, rows)].copy()
    joint[: len(ra), : len(ra)] += na
    joint[len(ra) :, len(ra) :] += nb
    return 0.5 * float(np.log2(np.linalg.det(sa) * np.linalg.det(sb) / np.linalg.det(joint)))


def _basis_choices(protocol: ProtocolConfig) -> list[tuple[str, str]]:
    """Measurement kinds (Alice, Bob), one pair per equally likely basis choice."""
    if protocol.alice_kind == "heterodyne" and protocol.bob_kind == "heterodyne":
        return [("heterodyne", "heterodyne")]
    if protocol.alice_kind == "heterodyne":
        return [("heterodyne", k) for k in HOMODYNE_KINDS]
    if protocol.bob_kind == "heterodyne":
        return [(k, "heterodyne") for k in HOMODYNE_KINDS]
    return list(zip(HOMODYNE_KINDS, HOMODYNE_KINDS))


def keyrate_collective(cm: CovarianceState | np.ndarray, protocol: ProtocolConfig) -> RateResult:
    """Asymptotic key rate against collective Gaussian attacks.

    Eve purifies the Alice-Bob state, so her entropy equals S(AB) and, once
    the reference party has measured, her conditional entropy equals that of
    the other party's conditional state.
    """
    if not isinstance(cm, CovarianceState):
        cm = CovarianceState(np.zeros(4), np.asarray(cm, dtype=float))
    if cm.n_modes != 2:
        raise DomainError("key rates need a two-mode Alice-Bob covariance matrix")
    cov = cm.cov
    s_ab = von_neumann_entropy(cov)
    ref = 1 if protocol.reconciliation == "reverse" else 0
    choices = _basis_choices(protocol)
    i_ab = float(np.mean([_mutual_information(cov, ka, kb) for ka, kb in choices]))
    ref_kinds = sorted({pair[ref] for pair in choices})
    s_cond = float(
        np.mean([von_neumann_entropy(condition_on_measurement(cm, ref, kind).cov) for kind in ref_kinds])
    )
    holevo = s_ab - s_cond
    if abs(holevo) < 1e-12:  # rounding noise when Eve is decoupled
        holevo = 0.0
    raw = protocol.efficiency * i_ab - holevo
    return RateResult(max(0.0, raw), raw, i_ab, holevo)


def keyrate_fixed(v: float, channel: ChannelPoint, protocol: ProtocolConfig) -> RateResult:
    """Key rate through a fixed entangling-cloner channel (Eve's TMSV variance ``omega``)."""
    if v < 1:
        raise DomainError(f"v must be >= 1, got {v}")
    cov = single_mode_transfer_cov(v, channel.tau, channel.omega)
    return keyrate_collective(CovarianceState(np.zeros(4), cov), protocol)


# ---------------------------------------------------------------------------
# fading channels


@dataclass(frozen=True)
class _BinRates:
    eta: np.ndarray
    mass: np.ndarray
    edges: np.ndarray
    rate: np.ndarray
    mutual: np.ndarray
    holevo: np.ndarray


def _check_normalised(mass: np.ndarray) -> None:
    if abs(float(mass.sum()) - 1.0) > NORMALIZATION_TOL:
        raise DomainError(f"fading distribution carries mass {mass.sum():.9g}, not 1")


def _bin_rates(v, dist, omega, protocol, n_bins, rate_fn=None) -> _BinRates:
    eta, mass = dist.bins(n_bins)
    _check_normalised(mass)
    rate_fn = rate_fn or (lambda e: keyrate_fixed(v, ChannelPoint(e * e, omega), protocol))
    results = [rate_fn(float(e)) for e in eta]
    return _BinRates(
        eta,
        mass,
        dist.edges(n_bins),
        np.array([r.key_rate_raw for r in results]),
        np.array([r.mutual_info for r in results]),
        np.array([r.holevo for r in results]),
    )


def _aggregate(br: _BinRates, start: int, protocol, scenario: str, signed: bool, lower_bound=False) -> RateResult:
    sel = slice(start, None)
    m = br.mass[sel]
    per_bin = br.rate[sel] if signed else np.maximum(br.rate[sel], 0.0)
    curve = tuple((float(e), float(k)) for e, k in zip(br.eta, br.rate))
    return RateResult(
        key_rate=max(0.0, float(np.sum(m * per_bin))),
        key_rate_raw=float(np.sum(m * br.rate[sel])),
        mutual_info=float(np.sum(m * br.mutual[sel])),
        holevo=float(np.sum(m * br.holevo[sel])),
        selection_probability=min(1.0, float(np.sum(m))),
        scenario=scenario,
        lower_bound=lower_bound,
        per_eta_curve=curve,
    )


def _first_bin_at(br: _BinRates, eta_th: float) -> int:
    """Index of the first bin whose midpoint is at or above ``eta_th``."""
    return int(np.searchsorted(br.eta, eta_th, side="left"))


def ensemble_covariance(v: float, dist: FadingDistribution, omega: float = 1.0, n_bins: int = DEFAULT_BINS):
    """Covariance of the fading-averaged state (channel realisation unknown)."""
    eta, mass = dist.bins(n_bins)
    _check_normalised(mass)
    m1 = float(np.sum(mass * eta))
    m2 = float(np.sum(mass * eta * eta))
    c = m1 * np.sqrt(v * v - 1.0)
    b = m2 * v + (1.0 - m2) * omega
    cov = np.block([[v * I2, c * Z2], [c * Z2, b * I2]])
    return CovarianceState(np.zeros(4), cov)


def keyrate_fading(
    v: float,
    dist: FadingDistribution,
    omega: float,
    protocol: ProtocolConfig,
    scenario: str = "per_eta",
    eta_th: float = 0.0,
    n_bins: int = DEFAULT_BINS,
    signed: bool = False,
) -> RateResult:
    """Key rate over a fading channel with transmissivity eta**2 per realisation.

    ``per_eta`` assumes the parties know eta for every pulse and integrates
    the per-realisation rate; bins with a negative rate are discarded unless
    ``signed`` is set.  ``postselected`` keeps only bins at or above
    ``eta_th``.  ``ensemble`` evaluates the fading-averaged state and is
    flagged as a lower bound.
    """
    if scenario == "ensemble":
        r = keyrate_collective(ensemble_covariance(v, dist, omega, n_bins), protocol)
        return RateResult(r.key_rate, r.key_rate_raw, r.mutual_info, r.holevo, 1.0, "ensemble", True)
    if scenario not in ("per_eta", "postselected"):
        raise DomainError(f"unknown scenario {scenario!r}")
    br = _bin_rates(v, dist, omega, protocol, n_bins)
    start = _first_bin_at(br, eta_th) if scenario == "postselected" else 0
    return _aggregate(br, start, protocol, scenario, signed)


def _golden_section_index(f: Callable[[int], float], lo: int, hi: int) -> int:
    """Maximise f over integers in [lo, hi] by golden-section bracketing."""
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    while b - a > 3:
        c = int(round(b - inv_phi * (b - a)))
        d = int(round(a + inv_phi * (b - a)))
        if c == d:
            d = c + 1
        if f(c) >= f(d):
            b = d
        else:
            a = c
    return max(range(a, b + 1), key=lambda j: (f(j), -j))


def optimize_threshold(
    v: float,
    dist: FadingDistribution,
    omega: float,
    protocol: ProtocolConfig,
    n_bins: int = DEFAULT_BINS,
) -> tuple[float, RateResult]:
    """Post-selection threshold maximising the signed post-selected key rate.

    The objective for starting bin j is the mass-weighted sum of per-bin
    rates from j upwards.  Ties resolve toward the smaller threshold, so a
    non-negative rate curve yields a threshold of 0.
    """
    br = _bin_rates(v, dist, omega, protocol, n_bins)
    weighted = br.mass * br.rate
    tail = np.append(np.cumsum(weighted[::-1])[::-1], 0.0)
    n = len(br.eta)
    j = _golden_section_index(lambda i: float(tail[i]), 0, n)
    while j > 0 and tail[j - 1] >= tail[j] - TIE_TOL:
        j -= 1
    eta_th = 0.0 if j == 0 else float(br.edges[j])
    return eta_th, _aggregate(br, j, protocol, "postselected", signed=True)


# ---------------------------------------------------------------------------
# entanglement over fading channels


@dataclass(frozen=True)
class EntanglementResult:
    value: float
    measure: str
    scenario: str
    label: str = ""
    per_eta_curve: tuple[tuple[float, float], ...] | None = None


def log_negativity_standard_form(a, b, c):
    """Log-negativity of [[aI, cZ], [cZ, bI]]; vectorised over array inputs."""
    a, b, c = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a, b, c)))
    nu = 0.5 * ((a + b) - np.sqrt((a - b) ** 2 + 4.0 * c * c))
    return np.maximum(0.0, -np.log2(nu))


def _gaussian_measure(cov: np.ndarray, measure: str) -> float:
    if measure == "log_negativity":
        return log_negativity_gaussian(cov)
    if measure == "entropy_pure":
        if abs(np.linalg.det(cov) - 1.0) > 1e-6:
            raise PreconditionError("state is mixed; use log_negativity for mixed states")
        return von_neumann_entropy(cov[:2, :2])
    raise DomainError(f"unknown entanglement measure {measure!r}")


def _fock_measure(state: fk.FockDensity, measure: str) -> float:
    if measure == "log_negativity":
        return fk.log_negativity_fock(state)
    if measure == "entropy_pure":
        return fk.entropy_of_entanglement_pure(state)
    raise DomainError(f"unknown entanglement measure {measure!r}")


def entanglement_fading(
    source: float | Callable[[], fk.FockDensity],
    dist: FadingDistribution,
    measure: str = "log_negativity",
    scenario: str = "per_eta",
    second: FadingDistribution | None = None,
    v_n: float = 1.0,
    n_bins: int = DEFAULT_BINS,
) -> EntanglementResult:
    """Entanglement left after one (or, with ``second``, two) fading channels.

    ``source`` is a TMSV variance ``v`` or a zero-argument callable returning
    a two-mode Fock state.  The channel acts on mode 1 (the second mode);
    ``second`` adds an independent channel on mode 0.
    """
    if scenario not in ("per_eta", "ensemble"):
        raise DomainError(f"unknown scenario {scenario!r}")
    eta2, mass2 = dist.bins(n_bins)
    _check_normalised(mass2)
    if second is not None:
        eta1, mass1 = second.bins(n_bins)
        _check_normalised(mass1)
    gaussian = not callable(source)

    if gaussian:
        v = float(source)
        if v < 1:
            raise DomainError(f"v must be >= 1, got {v}")
        if scenario == "ensemble":
            if second is None:
                cov = ensemble_covariance(v, dist, v_n, n_bins).cov
            else:
                t1 = float(np.sum(mass1 * eta1 * eta1))
                t2 = float(np.sum(mass2 * eta2 * eta2))
                c = float(np.sum(mass1 * eta1)) * float(np.sum(mass2 * eta2)) * np.sqrt(v * v - 1.0)
                a, b = t1 * v + (1 - t1) * v_n, t2 * v + (1 - t2) * v_n
                cov = np.block([[a * I2, c * Z2], [c * Z2, b * I2]])
            return EntanglementResult(_gaussian_measure(cov, measure), measure, scenario, "gaussian_entanglement_only")
        if second is None:
            vals = np.array([_gaussian_measure(single_mode_transfer_cov(v, e * e, v_n), measure) for e in eta2])
            curve = tuple(zip(eta2.tolist(), vals.tolist()))
            return EntanglementResult(float(np.sum(mass2 * vals)), measure, scenario, "", curve)
        if measure != "log_negativity":
            raise PreconditionError("two lossy channels leave a mixed state; use log_negativity")
        t1, t2 = np.meshgrid(eta1 * eta1, eta2 * eta2, indexing="ij")
        vals = log_negativity_standard_form(
            t1 * v + (1 - t1) * v_n, t2 * v + (1 - t2) * v_n, np.sqrt(t1 * t2) * np.sqrt(v * v - 1.0)
        )
        return EntanglementResult(float(np.sum(np.outer(mass1, mass2) * vals)), measure, scenario)

    base = source()
    if isinstance(base, fk.HeraldResult):
        base = base.state

    def channel(e2: float, e1: float | None) -> fk.FockDensity:
        out = fk.apply_loss_kraus(base, 1, e2 * e2)
        return out if e1 is None else fk.apply_loss_kraus(out, 0, e1 * e1)

    if second is None:
        pairs = [(float(e), None, float(m)) for e, m in zip(eta2, mass2)]
    else:
        pairs = [(float(e2), float(e1), float(m1 * m2)) for e1, m1 in zip(eta1, mass1) for e2, m2 in zip(eta2, mass2)]
    states = [channel(e2, e1) for e2, e1, _ in pairs]
    weights = np.array([w for _, _, w in pairs])
    if scenario == "ensemble":
        mixed = fk.ensemble_average(states, weights / weights.sum())
        return EntanglementResult(_fock_measure(mixed, measure), measure, scenario)
    vals = np.array([_fock_measure(s, measure) for s in states])
    curve = tuple((e2, float(x)) for (e2, _, _), x in zip(pairs, vals)) if second is None else None
    return EntanglementResult(float(np.sum(weights * vals)), measure, scenario, "", curve)


# ---------------------------------------------------------------------------
# entanglement swapping


@dataclass(frozen=True)
class SwapConfig:
    """Two TMSV sources whose inner modes travel to a relay for a Bell measurement.

    ``gains`` is ``"optimal"`` or a mapping ``{"a": (g_q, g_p), "b": (g_q, g_p)}``:
    each party displaces its (q, p) by ``-(g_q x_q, g_p x_p)`` where x_q and
    x_p are the relay's two homodyne outcomes.
    """

    r_a: float
    r_b: float
    tau_a: float = 1.0
    tau_b: float = 1.0
    v_n: float = 1.0
    gains: str | dict = "optimal"

    def __post_init__(self):
        if self.r_a < 0 or self.r_b < 0:
            raise DomainError("squeezing must be >= 0")
        for t in (self.tau_a, self.tau_b):
            if not 0.0 <= t <= 1.0:
                raise DomainError(f"transmissivity must lie in [0, 1], got {t}")
        if self.v_n < 1.0:
            raise DomainError(f"noise variance must be >= 1, got {self.v_n}")
        if self.gains != "optimal" and not isinstance(self.gains, dict):
            raise DomainError("gains must be 'optimal' or a dict of per-party (g_q, g_p)")


@dataclass(frozen=True)
class SwapGains:
    """Regression of the outer modes' quadratures on the relay outcomes.

    ``matrix`` has rows (q_A, p_A, q_B, p_B) and columns (x_q, x_p);
    ``outcome_cov`` is the covariance of (x_q, x_p).
    """

    matrix: np.ndarray
    outcome_cov: np.ndarray

    def per_party(self) -> dict:
        m = self.matrix
        return {"a": (float(m[0, 0]), float(m[1, 1])), "b": (float(m[2, 0]), float(m[3, 1]))}


def _swap_network(config: SwapConfig) -> CovarianceState:
    """Four-mode state just before the relay measurement (modes 1, 2 at the relay)."""
    v_a, v_b = np.cosh(2 * config.r_a), np.cosh(2 * config.r_b)
    st = CovarianceState(np.zeros(4), tmsv_cov(v_a)).tensor(CovarianceState(np.zeros(4), tmsv_cov(v_b)))
    st = attenuate(st, 1, config.tau_a, config.v_n)
    st = attenuate(st, 2, config.tau_b, config.v_n)
    return apply_beam_splitter(st, 1, 2, 0.5)


def optimize_swap_gain(config: SwapConfig) -> SwapGains:
    """Feed-forward gains that cancel the outcome dependence of the outer modes exactly."""
    cov = _swap_network(config).cov
    outer = [0, 1, 6, 7]
    meas = [2, 5]  # q of relay mode 1, p of relay mode 2
    sxx = cov[np.ix_(meas, meas)]
    srx = cov[np.ix_(outer, meas)]
    return SwapGains(srx @ np.linalg.inv(sxx), sxx)


def entanglement_swap(config: SwapConfig) -> CovarianceState:
    """Covariance of the outer modes after the relay's conjugate homodyne measurement.

    With optimal gains this is the outcome-independent conditional state.
    Other gains leave residual outcome noise ``(M - K) S (M - K)^T``.
    """
    st = _swap_network(config)
    st = condition_on_measurement(st, 1, "homodyne_q")
    st = condition_on_measurement(st, 1, "homodyne_p")  # relay mode 2 is now index 1
    cov = st.cov
    if config.gains != "optimal":
        g = optimize_swap_gain(config)
        K = np.zeros((4, 2))
        (aq, ap), (bq, bp) = config.gains["a"], config.gains["b"]
        K[0, 0], K[1, 1], K[2, 0], K[3, 1] = aq, ap, bq, bp
        R = g.matrix - K
        cov = cov + R @ g.outcome_cov @ R.T
    return CovarianceState(np.zeros(4), cov)


def swap_fading(
    config: SwapConfig,
    dist_a: FadingDistribution,
    dist_b: FadingDistribution,
    n_bins: int = 50,
) -> float:
    """Log-negativity after swapping, averaged bin by bin over both arms' fading."""
    ea, ma = dist_a.bins(n_bins)
    eb, mb = dist_b.bins(n_bins)
    total = 0.0
    for x, wa in zip(ea, ma):
        for y, wb in zip(eb, mb):
            cfg = SwapConfig(config.r_a, config.r_b, x * x, y * y, config.v_n, config.gains)
            total += wa * wb * log_negativity_gaussian(entanglement_swap(cfg).cov)
    return float(total)


# ---------------------------------------------------------------------------
# non-Gaussian sources


@dataclass(frozen=True)
class NonGaussianSource:
    """Heralded Fock-space source: TMSV(r) followed by an optional herald operation."""

    r: float
    operation: str | None = None
    sides: str = "both"
    bs_tau: float = 0.95
    k: int = 1
    detector: str = "pnr"
    ideal: bool = False
    cutoff: int = fk.DEFAULT_CUTOFF
    source_efficiency: float = 1.0

    def __call__(self) -> fk.HeraldResult:
        base = fk.tmsv_fock(self.r, self.cutoff)
        if self.operation is None:
            return fk.HeraldResult(base, 1.0, 1.0)
        return fk.nongaussian_op(
            base,
            self.operation,
            self.sides,
            self.bs_tau,
            self.k,
            detector=self.detector,
            ideal=self.ideal,
            source_efficiency=self.source_efficiency,
        )


def nongauss_keyrate(
    source: Callable[[], fk.HeraldResult],
    dist: FadingDistribution,
    omega: float,
    protocol: ProtocolConfig,
    n_bins: int = DEFAULT_BINS,
) -> RateResult:
    """Lower bound on the key rate of a heralded state over a fading pure-loss channel.

    Each bin's rate is computed from the covariance of the lossy heralded
    state, which Gaussian extremality turns into a lower bound; the total is
    scaled by the heralding probability.
    """
    if omega != 1.0:
        raise UnsupportedConfigurationError("the Fock loss channel models pure loss only (omega = 1)")
    herald = source()
    state = herald.state

    def rate(e: float) -> RateResult:
        lossy = fk.apply_loss_kraus(state, 1, e * e)
        return keyrate_collective(fk.covariance_of_fock(lossy), protocol)

    br = _bin_rates(None, dist, omega, protocol, n_bins, rate_fn=rate)
    r = _aggregate(br, 0, protocol, "per_eta", signed=False)
    p = herald.creation_probability
    return RateResult(
        r.key_rate * p,
        r.key_rate_raw * p,
        r.mutual_info * p,
        r.holevo * p,
        1.0,
        "nongaussian",
        True,
        r.per_eta_curve,
    )
