"""Closed-form time evolution of the transmitted cutoff Gaussian packet.

The transmitted amplitude factorizes as ``psi(x, t) = psi_free(x, t) * B(x, t)``
where the bracket

    B = C + sqrt(pi) sigma sqrt(1 + i t / tau)
          * sum_n r_n kappa_n exp(-i kappa_n L) w(i y'_n)

runs over the catalog poles and their third-quadrant mirrors in (n, -n)
pairs.  Both factors are carried in exponent space: in transient regimes the
bracket grows exactly where the free envelope underflows, and only the
product is guaranteed representable.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .specfun import faddeeva_log_scaled
from .potential import UnitSystem

__all__ = [
    "EvolutionResult",
    "FreeDensityUnderflowError",
    "GaussianPacket",
    "NonAsymptoticError",
    "PacketValidityWarning",
    "TruncationWarning",
    "UnreliableRegimeError",
    "asymptotic_cancellation",
    "cutoff_error_estimate",
    "eta",
    "fit_loglog_slope",
    "free_packet",
    "free_packet_log",
    "longtime_exponent",
    "tau_system",
    "transmitted_packet",
    "transmitted_packet_log",
    "zeta",
]

_QUARTER_LOG_2PI = 0.25 * math.log(2.0 * math.pi)


class UnreliableRegimeError(ValueError):
    """Packet too close to the interaction region for the analytic path."""


class PacketValidityWarning(UserWarning):
    """Analytic path valid but below acceptance-grade cutoff separation."""


class TruncationWarning(UserWarning):
    """The last pole pair still contributes noticeably to the bracket."""


class FreeDensityUnderflowError(FloatingPointError):
    """Free density below the representable floor at the requested point."""


class NonAsymptoticError(RuntimeError):
    """Requested window is not in the power-law regime."""


@dataclass(frozen=True)
class GaussianPacket:
    """Initial cutoff Gaussian: center x_c < 0, width sigma, wavenumber k0."""

    x_c: float
    sigma: float
    k0: float
    units: UnitSystem

    def __post_init__(self):
        if not self.x_c < 0.0:
            raise ValueError("x_c must be negative")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        if not self.k0 > 0.0:
            raise ValueError("k0 must be positive")

    @property
    def tau(self):
        """Spreading time 2 m sigma^2 / hbar (fs)."""
        return self.units.hbar * self.sigma**2 / self.units.inv_mass_coeff

    @property
    def validity_ratio(self):
        """|x_c| / (2 sigma); >= 3 for the analytic path, >= 5 acceptance grade."""
        return abs(self.x_c) / (2.0 * self.sigma)

    @property
    def energy(self):
        """Nominal incidence energy (eV)."""
        return self.units.energy_of_wavenumber(self.k0)

    @property
    def velocity(self):
        """Nominal group velocity hbar k0 / m (nm/fs)."""
        return self.units.velocity(self.k0)


@dataclass(frozen=True)
class EvolutionResult:
    """Sampled amplitude and dimensionless density sigma |psi|^2 on a grid."""

    xs: np.ndarray
    ts: np.ndarray
    amplitude: np.ndarray
    density: np.ndarray
    method: str

    @classmethod
    def from_amplitudes(cls, xs, ts, amplitude, sigma, method):
        amplitude = np.asarray(amplitude, dtype=complex)
        return cls(
            xs=np.asarray(xs, dtype=float),
            ts=np.asarray(ts, dtype=float),
            amplitude=amplitude,
            density=sigma * np.abs(amplitude) ** 2,
            method=method,
        )


def free_packet_log(packet, x, t):
    """Complex log of the freely evolving packet (principal branches)."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("free packet requires t >= 0")
    tau = packet.tau
    spread = 1.0 + 1j * t / tau
    xp = x - packet.x_c - packet.velocity * t
    rate = packet.energy / packet.units.hbar
    return (
        -_QUARTER_LOG_2PI
        - 0.5 * math.log(packet.sigma)
        - 0.5 * np.log(spread)
        + 1j * (packet.k0 * x - rate * t)
        - xp * xp / (4.0 * packet.sigma**2 * spread)
    )


def free_packet(packet, x, t):
    """Freely evolving cutoff-Gaussian amplitude (extended-Gaussian form)."""
    with np.errstate(under="ignore"):
        out = np.exp(free_packet_log(packet, x, t))
    if np.ndim(x) == 0 and np.ndim(t) == 0:
        return complex(out)
    return out


def cutoff_error_estimate(packet, term_magnitude):
    """Neglected-tail scale exp(-x_c^2 / 4 sigma^2) * term_magnitude."""
    arg = -packet.validity_ratio**2
    return math.exp(max(arg, -745.0)) * term_magnitude if arg > -745.0 else 0.0


def tau_system(profile, catalog):
    """Longest lifetime hbar / Gamma_min over poles below the barrier top.

    Falls back to the first (lowest) pole when no pole sits below the top.
    """
    units = profile.units
    widths = catalog.widths(units)
    positions = catalog.positions(units)
    below = widths[positions < profile.barrier_height]
    gamma = float(np.min(below)) if below.size else float(widths[0])
    return units.hbar / gamma


# ---------------------------------------------------------------------------
# bracket evaluation (scaled pair sum over the pole catalog)
# ---------------------------------------------------------------------------


class _BracketEvaluator:
    """Precomputed pole/coefficient arrays for repeated bracket evaluation."""

    def __init__(self, packet, profile, catalog, residue_set, n_poles=None):
        from .resonances import _pair_arrays, coefficient_C  # local import, no cycle

        if packet.validity_ratio < 3.0:
            raise UnreliableRegimeError(
                f"validity ratio {packet.validity_ratio:.2f} < 3; "
                "the analytic path needs the packet far from the origin"
            )
        if packet.validity_ratio < 5.0:
            warnings.warn(
                f"validity ratio {packet.validity_ratio:.2f} < 5: below "
                "acceptance grade, cutoff corrections may be visible",
                PacketValidityWarning,
                stacklevel=3,
            )
        kap, z = _pair_arrays(profile, catalog, residue_set, n_poles)
        self.packet = packet
        self.length = profile.length
        self.c_const = coefficient_C(profile, catalog, residue_set, n_poles)
        # coefficient of w(i y'_n); the mirror partner carries the conjugate
        self.coef = z * kap
        self.log_coef = np.log(self.coef)
        self.log_c_const = np.log(complex(self.c_const))
        self.kappa = kap
        self.hbar = packet.units.hbar
        self.mass = packet.units.mass

    def _y_args(self, xp, tp):
        """y' arguments for the (+n, -n) pole sets at one space-time point."""
        root = cmath.exp(-0.25j * math.pi) * cmath.sqrt(
            self.mass / (2.0 * self.hbar * tp)
        )
        vel = self.hbar * tp / self.mass
        kp_pos = self.kappa - self.packet.k0
        kp_neg = -np.conj(self.kappa) - self.packet.k0
        y_pos = root * (xp - vel * kp_pos)
        y_neg = root * (xp - vel * kp_neg)
        return y_pos, y_neg

    def log_bracket(self, x, t):
        """Complex log of the bracket at scalar (x, t), overflow-safe."""
        packet = self.packet
        tau = packet.tau
        tp = t - 1j * tau
        xp = x - packet.x_c - packet.velocity * t
        y_pos, y_neg = self._y_args(xp, tp)
        lw_pos = _logw(1j * y_pos)
        lw_neg = _logw(1j * y_neg)
        prefac = (
            0.5 * math.log(math.pi)
            + math.log(packet.sigma)
            + 0.5 * cmath.log(1.0 + 1j * t / tau)
        )
        terms = np.concatenate(
            [prefac + self.log_coef + lw_pos, prefac + np.conj(self.log_coef) + lw_neg]
        )
        contributions = np.concatenate(([self.log_c_const], terms))
        scale = float(np.max(contributions.real))
        with np.errstate(under="ignore"):
            mantissas = np.exp(contributions - scale)
        total = complex(np.sum(mantissas))
        if total == 0:
            return complex(-math.inf, 0.0)
        tail = abs(mantissas[len(mantissas) // 2]) + abs(mantissas[-1])
        if tail > 1e-8 * abs(total):
            warnings.warn(
                "last pole pair contributes more than 1e-8 of the bracket; "
                "the catalog may be too short for this point",
                TruncationWarning,
                stacklevel=3,
            )
        return scale + cmath.log(total)


def _logw(z):
    log_mag, phase = faddeeva_log_scaled(z)
    return log_mag + 1j * phase


def _evaluate_log(packet, profile, catalog, residue_set, xs, ts, n_poles):
    ev = _BracketEvaluator(packet, profile, catalog, residue_set, n_poles)
    xs_b, ts_b = np.broadcast_arrays(np.asarray(xs, float), np.asarray(ts, float))
    flat_x = np.atleast_1d(xs_b).ravel()
    flat_t = np.atleast_1d(ts_b).ravel()
    out = np.empty(flat_x.shape, dtype=complex)
    for i, (x, t) in enumerate(zip(flat_x, flat_t)):
        out[i] = ev.log_bracket(float(x), float(t)) + complex(
            free_packet_log(packet, float(x), float(t))
        )
    return out.reshape(xs_b.shape) if xs_b.ndim else complex(out[0]), ev


def transmitted_packet_log(packet, profile, catalog, residue_set, x, t, n_poles=None):
    """Complex log of the transmitted amplitude; never overflows."""
    _check_transmitted_domain(packet, profile, x, t)
    out, _ = _evaluate_log(packet, profile, catalog, residue_set, x, t, n_poles)
    return out


def transmitted_packet(packet, profile, catalog, residue_set, x, t, n_poles=None):
    """Transmitted amplitude psi(x, t) for x >= L, t > 0.

    Underflows to 0 where the true amplitude is below the double range.
    """
    logs = transmitted_packet_log(packet, profile, catalog, residue_set, x, t, n_poles)
    with np.errstate(under="ignore"):
        out = np.exp(logs)
    return out


def _check_transmitted_domain(packet, profile, x, t):
    if np.any(np.asarray(x, float) < profile.length):
        raise ValueError("transmitted amplitude is defined for x >= L only")
    if np.any(np.asarray(t, float) <= 0.0):
        raise ValueError("transmitted amplitude requires t > 0")
    if packet.validity_ratio < 3.0:
        raise UnreliableRegimeError(
            f"validity ratio {packet.validity_ratio:.2f} < 3"
        )


def zeta(packet, profile, catalog, residue_set, x, t0, n_poles=None):
    """Density ratio |psi|^2 / |psi_free|^2 at fixed time t0.

    Equals |bracket|^2 identically, so it stays finite deep in the packet
    tails; an underflowing free density still raises, per contract.
    """
    if np.any(np.asarray(x, float) <= profile.length):
        raise ValueError("zeta requires x > L")
    if t0 <= 0.0:
        raise ValueError("zeta requires t0 > 0")
    free_log = free_packet_log(packet, x, t0)
    if np.any(2.0 * np.asarray(free_log).real < math.log(1e-300)):
        raise FreeDensityUnderflowError("free density below 1e-300")
    ev = _BracketEvaluator(packet, profile, catalog, residue_set, n_poles)
    flat = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(flat.shape, dtype=float)
    for i, xi in enumerate(flat):
        out[i] = math.exp(2.0 * ev.log_bracket(float(xi), float(t0)).real)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def eta(x, x0, length):
    """Squared free-flight distance ratio mapping position to energy units."""
    if x <= length or x0 <= length:
        raise ValueError("eta requires x > L and x0 > L")
    return ((x - length) / (x0 - length)) ** 2


def fit_loglog_slope(ts, rhos):
    """Least-squares slope of log(rho) against log(t)."""
    lt = np.log(np.asarray(ts, dtype=float))
    lr = np.log(np.asarray(rhos, dtype=float))
    design = np.stack([lt, np.ones_like(lt)], axis=1)
    (slope, _), *_ = np.linalg.lstsq(design, lr, rcond=None)
    return float(slope)


def longtime_exponent(
    packet, profile, catalog, residue_set, x_d, t_range, samples=40, n_poles=None
):
    """Fitted power of the density decay at fixed x_d over a log-uniform grid.

    Raises :class:`NonAsymptoticError` when the local slope still varies by
    more than 0.5 across the window.
    """
    t_min, t_max = t_range
    floor = 50.0 * tau_system(profile, catalog)
    if t_min < floor * (1.0 - 1e-9):
        raise ValueError(
            f"t_min = {t_min:.3g} fs is below the asymptotic floor {floor:.3g} fs"
        )
    ts = np.geomspace(t_min, t_max, samples)
    logs = transmitted_packet_log(
        packet, profile, catalog, residue_set, x_d, ts, n_poles
    )
    log_rho = np.log(packet.sigma) + 2.0 * np.asarray(logs).real
    half = samples // 2
    lt = np.log(ts)
    slope_lo = _plain_slope(lt[:half], log_rho[:half])
    slope_hi = _plain_slope(lt[half:], log_rho[half:])
    if abs(slope_lo - slope_hi) > 0.5:
        raise NonAsymptoticError(
            f"local slope drifts from {slope_lo:.2f} to {slope_hi:.2f}"
        )
    return _plain_slope(lt, log_rho)


def _plain_slope(lx, ly):
    design = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, _), *_ = np.linalg.lstsq(design, ly, rcond=None)
    return float(slope)


def asymptotic_cancellation(packet, profile, catalog, residue_set, x_d, t, n_poles=None):
    """Residual of C against the leading-asymptotic bracket sum.

    Evaluates the bracket with the Faddeeva factors replaced by their leading
    large-argument form (the 1/y' term, plus the exponential branch where the
    argument sits in the lower half-plane) and returns ``(residual, scale)``
    where ``scale`` is the magnitude sum of the next-order 1/y'^3 terms.  At
    long times the leading sum cancels C up to that scale.
    """
    ev = _BracketEvaluator(packet, profile, catalog, residue_set, n_poles)
    tau = packet.tau
    tp = t - 1j * tau
    xp = x_d - packet.x_c - packet.velocity * t
    y_pos, y_neg = ev._y_args(xp, tp)
    prefac = math.sqrt(math.pi) * packet.sigma * cmath.sqrt(1.0 + 1j * t / tau)
    total = 0j
    scale = 0.0
    for coefs, ys in ((ev.coef, y_pos), (np.conj(ev.coef), y_neg)):
        lead = 1.0 / (math.sqrt(math.pi) * ys)
        exp_part = np.zeros_like(ys)
        lhp = ys.real < 0.0
        if lhp.any():
            args = ys[lhp] ** 2
            safe = args.real < 700.0
            vals = np.zeros_like(args)
            with np.errstate(under="ignore"):
                vals[safe] = 2.0 * np.exp(args[safe])
            if np.any(~safe):
                raise OverflowError("exponential branch overflows at this point")
            exp_part[lhp] = vals
        total += np.sum(coefs * (lead + exp_part))
        scale += float(
            np.sum(np.abs(coefs) * 0.5 / (math.sqrt(math.pi) * np.abs(ys) ** 3))
        )
    residual = abs(ev.c_const + prefac * total)
    return residual, abs(prefac) * scale
