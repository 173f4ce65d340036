"""Turbulence-induced fading for free-space links.

Beam wandering moves the beam centre around the receiver aperture; the
resulting transmission coefficient eta (amplitude, so transmissivity is
eta**2) follows a log-negative Weibull law on [0, eta0].
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import constants, integrate, stats
from scipy.special import i0e, i1e

from .errors import DomainError, UnsupportedConfigurationError, ValidationError

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-6
DEFAULT_BINS = 200
NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True)
class BeamWanderParams:
    sigma_b: float
    aperture_radius: float
    beam_spot: float
    offset_d: float = 0.0

    def __post_init__(self):
        if not self.sigma_b > 0:
            raise DomainError(f"sigma_b must be > 0, got {self.sigma_b}")
        if not self.aperture_radius > 0:
            raise DomainError(f"aperture radius beta must be > 0, got {self.aperture_radius}")
        if not self.beam_spot > 0:
            raise DomainError(f"beam-spot radius W must be > 0, got {self.beam_spot}")
        if not self.offset_d >= 0:
            raise DomainError(f"offset d must be >= 0, got {self.offset_d}")


@dataclass(frozen=True)
class WeibullFadingParams:
    gamma: float
    scale_s: float
    eta0: float

    def __post_init__(self):
        if not self.gamma > 0 or not self.scale_s > 0:
            raise DomainError("Weibull shape and scale must be positive")
        if not 0 < self.eta0 <= 1:
            raise DomainError(f"eta0 must lie in (0, 1], got {self.eta0}")


@dataclass(frozen=True)
class BeamSpreadParams:
    mean_theta: float
    sigma_theta: float
    w0: float

    def __post_init__(self):
        if not self.sigma_theta > 0:
            raise DomainError(f"sigma_theta must be > 0, got {self.sigma_theta}")
        if not self.w0 > 0:
            raise DomainError(f"w0 must be > 0, got {self.w0}")


@dataclass(frozen=True)
class DownlinkParams:
    wavelength: float
    telescope_diameter: float
    range: float
    receiver_aperture: float

    def __post_init__(self):
        for name in ("wavelength", "telescope_diameter", "range", "receiver_aperture"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


def derive_fading_params(wander: BeamWanderParams) -> WeibullFadingParams:
    """Shape, scale and maximum transmission of the beam-wandering law."""
    beta = wander.aperture_radius
    h = (beta / wander.beam_spot) ** 2
    # 1 - exp(-4h) I0(4h) loses all precision below this
    if h < 1e-7:
        raise DomainError(
            f"aperture-to-beam ratio (beta/W)^2 = {h:.3g} is too small; use a larger beta/W"
        )
    eta0_sq = -np.expm1(-2.0 * h)
    den = 1.0 - i0e(4.0 * h)
    log_term = np.log(2.0 * eta0_sq / den)
    gamma = 8.0 * h * i1e(4.0 * h) / den / log_term
    scale = beta * log_term ** (-1.0 / gamma)
    return WeibullFadingParams(float(gamma), float(scale), float(np.sqrt(eta0_sq)))


def deflection_pdf(l, sigma_b: float, d: float = 0.0):
    """Ricean density of the beam-centre distance from the aperture centre."""
    l = np.asarray(l, dtype=float)
    s2 = sigma_b * sigma_b
    z = l * d / s2
    # I0(z) exp(-(l^2+d^2)/2s2) == i0e(z) exp(-(l-d)^2/2s2)
    out = np.where(l >= 0, l / s2 * i0e(z) * np.exp(-((l - d) ** 2) / (2 * s2)), 0.0)
    return out if out.ndim else float(out)


def transmission_of_deflection(l, params: WeibullFadingParams):
    l = np.asarray(l, dtype=float)
    out = params.eta0 * np.exp(-0.5 * (np.maximum(l, 0.0) / params.scale_s) ** params.gamma)
    return out if out.ndim else float(out)


def deflection_of_transmission(eta, params: WeibullFadingParams):
    """Inverse of :func:`transmission_of_deflection` on (0, eta0]."""
    eta = np.asarray(eta, dtype=float)
    with np.errstate(divide="ignore"):
        x = 2.0 * np.log(params.eta0 / eta)
    return params.scale_s * np.maximum(x, 0.0) ** (1.0 / params.gamma)


def _density_in_u(u, wander: BeamWanderParams, fp: WeibullFadingParams):
    # density of u = ln(eta0 / eta), i.e. p(eta) * eta
    u = np.asarray(u, dtype=float)
    x = 2.0 * u
    s2 = wander.sigma_b**2
    g = fp.gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        l = fp.scale_s * x ** (1.0 / g)
        z = l * wander.offset_d / s2
        val = (
            2.0 * fp.scale_s**2 / (s2 * g)
            * x ** (2.0 / g - 1.0)
            * i0e(z)
            * np.exp(-((l - wander.offset_d) ** 2) / (2 * s2))
        )
    return np.where(u > 0, val, 0.0)


def fading_pdf(eta, wander: BeamWanderParams, params: WeibullFadingParams | None = None):
    """Log-negative Weibull density of the transmission coefficient."""
    fp = params or derive_fading_params(wander)
    eta = np.asarray(eta, dtype=float)
    inside = (eta > 0) & (eta < fp.eta0)
    safe = np.where(inside, eta, fp.eta0 * 0.5)
    val = _density_in_u(np.log(fp.eta0 / safe), wander, fp) / safe
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)


def fading_cdf(eta, wander: BeamWanderParams, params: WeibullFadingParams | None = None):
    """P(eta' <= eta), from the Rice survival function of the deflection."""
    fp = params or derive_fading_params(wander)
    eta = np.asarray(eta, dtype=float)
    inside = (eta > 0) & (eta < fp.eta0)
    l = deflection_of_transmission(np.where(inside, eta, fp.eta0), fp)
    sf = stats.rice.sf(l, wander.offset_d / wander.sigma_b, scale=wander.sigma_b)
    out = np.where(eta >= fp.eta0, 1.0, np.where(eta <= 0, 0.0, sf))
    return out if out.ndim else float(out)


class FadingDistribution:
    """Distribution p(eta) on [0, eta0], either parametric or tabulated.

    Tabulated distributions are midpoint bins with explicit widths; the mass
    of bin i is ``pdf[i] * width[i]`` and the masses must sum to one.
    """

    def __init__(
        self,
        eta0: float,
        wander: BeamWanderParams | None = None,
        eta: np.ndarray | None = None,
        pdf: np.ndarray | None = None,
        width: np.ndarray | None = None,
    ):
        self.eta0 = float(eta0)
        self.wander = wander
        self.params = derive_fading_params(wander) if wander is not None else None
        if wander is None:
            eta = np.asarray(eta, dtype=float).reshape(-1)
            pdf = np.asarray(pdf, dtype=float).reshape(-1)
            width = np.asarray(width, dtype=float).reshape(-1)
            if not (eta.shape == pdf.shape == width.shape) or eta.size == 0:
                raise ValidationError("tabulated eta, pdf and width must be non-empty and equally long")
            if np.any(np.diff(eta) <= 0):
                raise ValidationError("tabulated eta grid must be strictly increasing")
            if np.any(pdf < 0) or np.any(width <= 0):
                raise ValidationError("tabulated pdf must be >= 0 and widths > 0")
            if eta[0] < 0 or eta[-1] > self.eta0 + 1e-12:
                raise ValidationError("tabulated eta must lie in [0, eta0]")
            total = float(np.sum(pdf * width))
            if abs(total - 1.0) > NORMALIZATION_TOL:
                raise ValidationError(f"tabulated distribution integrates to {total:.9g}, not 1")
            self._eta, self._pdf, self._width = eta, pdf, width

    # constructors -----------------------------------------------------------

    @classmethod
    def from_beam_wander(cls, wander: BeamWanderParams) -> "FadingDistribution":
        return cls(derive_fading_params(wander).eta0, wander=wander)

    @classmethod
    def tabulated(cls, eta, pdf, width, eta0: float | None = None) -> "FadingDistribution":
        eta = np.asarray(eta, dtype=float)
        if eta0 is None:
            eta0 = float(min(1.0, eta[-1] + 0.5 * np.asarray(width, dtype=float)[-1]))
            eta0 = max(eta0, float(eta[-1]))
        return cls(eta0, eta=eta, pdf=pdf, width=width)

    @classmethod
    def point_mass(cls, eta: float, width: float = 1e-9) -> "FadingDistribution":
        if not 0 < eta <= 1:
            raise DomainError(f"point-mass eta must lie in (0, 1], got {eta}")
        return cls(eta, eta=[eta], pdf=[1.0 / width], width=[width])

    # queries ----------------------------------------------------------------

    @property
    def is_parametric(self) -> bool:
        return self.wander is not None

    def pdf(self, eta):
        if self.is_parametric:
            return fading_pdf(eta, self.wander, self.params)
        eta = np.asarray(eta, dtype=float)
        lo = self._eta - 0.5 * self._width
        hi = self._eta + 0.5 * self._width
        out = np.zeros_like(eta)
        for c, a, b in zip(self._pdf, lo, hi):
            out = np.where((eta >= a) & (eta < b), c, out)
        return out if out.ndim else float(out)

    def bins(self, n_bins: int = DEFAULT_BINS) -> tuple[np.ndarray, np.ndarray]:
        """Bin midpoints and probability masses.

        Parametric laws use ``n_bins`` equal-width bins over [0, eta0] with
        exact masses from the CDF; tabulated laws return their own grid.
        """
        if not self.is_parametric:
            return self._eta.copy(), self._pdf * self._width
        edges = np.linspace(0.0, self.eta0, n_bins + 1)
        mass = np.diff(fading_cdf(edges, self.wander, self.params))
        return 0.5 * (edges[1:] + edges[:-1]), mass

    def edges(self, n_bins: int = DEFAULT_BINS) -> np.ndarray:
        if self.is_parametric:
            return np.linspace(0.0, self.eta0, n_bins + 1)
        lo = self._eta - 0.5 * self._width
        return np.append(lo, self._eta[-1] + 0.5 * self._width[-1])

    def expect(self, func: Callable[[np.ndarray], np.ndarray]) -> float:
        """E[func(eta)] by adaptive quadrature (parametric) or bin sum (tabulated)."""
        if not self.is_parametric:
            return float(np.sum(func(self._eta) * self._pdf * self._width))
        fp = self.params
        integrand = lambda u: func(fp.eta0 * np.exp(-u)) * _density_in_u(u, self.wander, fp)
        val, _ = integrate.quad(integrand, 0.0, np.inf, limit=500, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL * 1e-2)
        return float(val)

    def total_probability(self) -> float:
        return self.expect(lambda e: np.ones_like(e))

    # CSV ------------------------------------------------------------------

    def to_csv(self, path: str | Path | None = None, n_bins: int = DEFAULT_BINS) -> str:
        """Write ``eta,pdf`` rows (bin midpoints and bin-averaged densities)."""
        eta, mass = self.bins(n_bins)
        edges = self.edges(n_bins)
        width = np.diff(edges) if self.is_parametric else self._width
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eta", "pdf"])
        for e, m, dw in zip(eta, mass, width):
            w.writerow([repr(float(e)), repr(float(m / dw))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path, eta0: float | None = None) -> "FadingDistribution":
        return cls.from_csv_text(Path(path).read_text(), eta0=eta0)

    @classmethod
    def from_csv_text(cls, text: str, eta0: float | None = None) -> "FadingDistribution":
        """Parse ``eta,pdf`` rows; widths are reconstructed from the midpoints."""
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if not rows or [c.strip() for c in rows[0]] != ["eta", "pdf"]:
            raise ValidationError("CSV header must be 'eta,pdf'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:] if a.strip()], dtype=float)
        if data.size == 0:
            raise ValidationError("CSV contains no rows")
        eta, pdf = data[:, 0], data[:, 1]
        if eta.size == 1:
            width = np.array([1.0 / pdf[0]])
        else:
            inner = 0.5 * (eta[1:] + eta[:-1])
            edges = np.concatenate([[eta[0] - (inner[0] - eta[0])], inner, [eta[-1] + (eta[-1] - inner[-1])]])
            width = np.diff(edges)
        return cls.tabulated(eta, pdf, width, eta0=eta0)


def sample_log_transmission(seed: int, n: int, wander: BeamWanderParams, stream: int = 0) -> np.ndarray:
    """Draw ``n`` values of u = ln(eta0 / eta) by sampling the beam-centre position.

    Deep in the tail eta itself underflows to 0 while u stays finite, so
    statistics on extreme fades should use this form.  A ``(seed, stream)``
    pair fully determines the output, so independent streams can be drawn
    in parallel reproducibly.
    """
    if n < 1:
        raise DomainError("sample count must be >= 1")
    fp = derive_fading_params(wander)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))
    xy = rng.normal(0.0, wander.sigma_b, size=(n, 2))
    xy[:, 0] += wander.offset_d
    l = np.hypot(xy[:, 0], xy[:, 1])
    return 0.5 * (l / fp.scale_s) ** fp.gamma


def sample_transmission(seed: int, n: int, wander: BeamWanderParams, stream: int = 0) -> np.ndarray:
    """Transmission coefficients for the same draws as :func:`sample_log_transmission`."""
    eta0 = derive_fading_params(wander).eta0
    return eta0 * np.exp(-sample_log_transmission(seed, n, wander, stream))


def mean_fading_loss_db(dist: FadingDistribution | BeamWanderParams) -> float:
    """-10 log10 E[eta^2]."""
    if isinstance(dist, BeamWanderParams):
        dist = FadingDistribution.from_beam_wander(dist)
    if not dist.is_parametric:
        eta, mass = dist.bins()
        if abs(mass.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValidationError("distribution is not normalised")
    mean_t = dist.expect(lambda e: e * e)
    return float(-10.0 * np.log10(mean_t))


def _mean_transmissivity_fixed_w(sigma_b: float, beta: float, w: float) -> float:
    fp = derive_fading_params(BeamWanderParams(sigma_b, beta, w))
    f = lambda l: deflection_pdf(l, sigma_b) * np.exp(-((l / fp.scale_s) ** fp.gamma))
    val, _ = integrate.quad(f, 0.0, np.inf, limit=300, epsabs=QUAD_EPSABS, epsrel=1e-9)
    return fp.eta0**2 * val


def mean_loss_with_spread_db(wander: BeamWanderParams, spread: BeamSpreadParams) -> float:
    """Mean loss when the beam width also fluctuates (log-normal W).

    ``wander.beam_spot`` is ignored: W = w0 exp(theta / 2) with theta normal.
    """
    if wander.offset_d != 0:
        raise UnsupportedConfigurationError("beam-spread model requires offset d = 0")
    mu, sd = spread.mean_theta, spread.sigma_theta
    pdf_theta = stats.norm(mu, sd).pdf
    f = lambda th: pdf_theta(th) * _mean_transmissivity_fixed_w(
        wander.sigma_b, wander.aperture_radius, spread.w0 * np.exp(0.5 * th)
    )
    val, _ = integrate.quad(f, mu - 6 * sd, mu + 6 * sd, limit=200, epsabs=QUAD_EPSABS, epsrel=1e-8)
    # renormalise the +-6 sigma truncation
    val /= stats.norm.cdf(6.0) - stats.norm.cdf(-6.0)
    return float(-10.0 * np.log10(val))


def downlink_transmissivity(params: DownlinkParams) -> float:
    """Fixed transmission coefficient of a diffraction-limited downlink."""
    w_l = params.range * params.wavelength / params.telescope_diameter
    h = (params.receiver_aperture / w_l) ** 2
    return float(np.sqrt(-np.expm1(-2.0 * h)))


@dataclass(frozen=True)
class ThermalOccupation:
    n_bar: float
    v_n: float


def thermal_occupation(frequency_hz: float, temperature_k: float) -> ThermalOccupation:
    """Bose-Einstein occupation of a mode and the matching noise variance 2n+1."""
    if not frequency_hz > 0 or not temperature_k > 0:
        raise DomainError("frequency and temperature must be positive")
    x = constants.h * frequency_hz / (constants.k * temperature_k)
    n_bar = 0.0 if x > 700 else float(1.0 / np.expm1(x))
    return ThermalOccupation(n_bar, 2.0 * n_bar + 1.0)
