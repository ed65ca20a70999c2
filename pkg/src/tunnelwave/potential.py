"""Piecewise-constant 1-D potentials and their transfer matrices.

The profile lives on [0, L] as an ordered stack of constant layers.  The
transfer matrix relates plane-wave coefficients ``(A, B)`` of
``A exp(ikx) + B exp(-ikx)`` on the left to ``(F, G)`` on the right, in the
global phase convention, so the transmission amplitude is ``t(k) = 1/t22``.

Internally the matrix is composed from interface and in-layer propagation
factors in the local plane-wave basis, ``diag(exp(iqw), exp(-iqw))``.  That
keeps the growing and decaying exponentials separated, so ``t22`` stays
relatively accurate deep in the lower half k-plane where the resonance poles
sit (the (u, u') similarity-transform construction loses exp(2|Im k|L) digits
there).  The composed ``t22`` is independent of the branch chosen for each
layer wavevector; the principal branch is used throughout.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "HBAR_EV_FS",
    "HBAR2_OVER_2ME_EV_NM2",
    "BranchPointProximityError",
    "NegativeEnergyError",
    "PoleProximityError",
    "PotentialProfile",
    "TransferMatrix",
    "UnitSystem",
    "ZeroWavenumberError",
    "t22",
    "t22_prime",
    "t22_with_prime",
    "transfer_matrix",
    "transmission_amplitude",
    "transmission_coefficient",
]

HBAR_EV_FS = 0.6582119569
HBAR2_OVER_2ME_EV_NM2 = 0.0380998

_Q_MIN = 1e-7  # nm^-1; smaller layer wavevectors make interface ratios ill-conditioned
_K_MIN = 1e-12
_EXP_MAX = 700.0


class NegativeEnergyError(ValueError):
    """Energy argument outside the E >= 0 domain."""


class ZeroWavenumberError(ValueError):
    """Transfer matrices are singular at k = 0."""


class BranchPointProximityError(ArithmeticError):
    """Some layer wavevector is numerically at its branch point (E ~ V_j).

    Signals the caller to perturb the evaluation point slightly.
    """


class PoleProximityError(ArithmeticError):
    """Evaluation point is too close to a transmission pole."""


@dataclass(frozen=True)
class UnitSystem:
    """nm / fs / eV unit bundle for a fixed effective-mass ratio."""

    mass_ratio: float
    hbar: float = HBAR_EV_FS

    def __post_init__(self):
        if self.mass_ratio <= 0.0:
            raise ValueError("mass_ratio must be positive")

    @property
    def inv_mass_coeff(self):
        """hbar^2 / 2m in eV nm^2."""
        return HBAR2_OVER_2ME_EV_NM2 / self.mass_ratio

    @property
    def mass(self):
        """Effective mass in eV fs^2 / nm^2."""
        return self.hbar * self.hbar / (2.0 * self.inv_mass_coeff)

    def wavenumber_of_energy(self, energy):
        """k = sqrt(E / (hbar^2/2m)) for real E >= 0."""
        if energy < 0.0:
            raise NegativeEnergyError(f"energy must be >= 0, got {energy!r}")
        return math.sqrt(energy / self.inv_mass_coeff)

    def energy_of_wavenumber(self, k):
        """E = (hbar^2/2m) k^2; accepts real or complex k."""
        return self.inv_mass_coeff * k * k

    def velocity(self, k):
        """Group velocity hbar k / m in nm/fs."""
        return 2.0 * self.inv_mass_coeff * k / self.hbar


@dataclass(frozen=True)
class PotentialProfile:
    """Ordered stack of (width_nm, height_eV) layers on [0, L]."""

    layers: tuple
    mass_ratio: float = 0.067

    def __post_init__(self):
        layers = tuple((float(w), float(h)) for (w, h) in self.layers)
        if not layers:
            raise ValueError("profile needs at least one layer")
        for w, h in layers:
            if not w > 0.0:
                raise ValueError(f"layer width must be > 0, got {w!r}")
            if h < 0.0:
                raise ValueError(f"layer height must be >= 0, got {h!r}")
        object.__setattr__(self, "layers", layers)
        if self.mass_ratio <= 0.0:
            raise ValueError("mass_ratio must be positive")

    @cached_property
    def units(self):
        return UnitSystem(self.mass_ratio)

    @property
    def length(self):
        return sum(w for w, _ in self.layers)

    @property
    def barrier_height(self):
        return max(h for _, h in self.layers)

    @property
    def has_barrier(self):
        return any(h > 0.0 for _, h in self.layers)

    def fingerprint_key(self):
        """Canonical string identifying the physical system."""
        parts = [f"{w!r}:{h!r}" for w, h in self.layers]
        return f"layers={','.join(parts)};mass_ratio={self.mass_ratio!r}"


@dataclass(frozen=True)
class TransferMatrix:
    t11: complex
    t12: complex
    t21: complex
    t22: complex

    @property
    def determinant(self):
        return self.t11 * self.t22 - self.t12 * self.t21


# ---------------------------------------------------------------------------
# scalar path (cmath): used by the Newton iteration, returns the derivative too
# ---------------------------------------------------------------------------


def _compose_scalar(profile, k, with_prime):
    """Local-basis transfer matrix (and d/dk) as tuples of four entries."""
    c = profile.units.inv_mass_coeff
    k2 = k * k
    qs = [k]
    for _, h in profile.layers:
        q = cmath.sqrt(k2 - h / c)
        if abs(q) < _Q_MIN:
            raise BranchPointProximityError(
                f"layer wavevector ~ 0 at k={k!r}; perturb the evaluation point"
            )
        qs.append(q)
    qs.append(k)

    m11, m12, m21, m22 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    d11 = d12 = d21 = d22 = 0j

    def apply(f11, f12, f21, f22, g11, g12, g21, g22):
        nonlocal m11, m12, m21, m22, d11, d12, d21, d22
        if with_prime:
            d11, d12, d21, d22 = (
                g11 * m11 + g12 * m21 + f11 * d11 + f12 * d21,
                g11 * m12 + g12 * m22 + f11 * d12 + f12 * d22,
                g21 * m11 + g22 * m21 + f21 * d11 + f22 * d21,
                g21 * m12 + g22 * m22 + f21 * d12 + f22 * d22,
            )
        m11, m12, m21, m22 = (
            f11 * m11 + f12 * m21,
            f11 * m12 + f12 * m22,
            f21 * m11 + f22 * m21,
            f21 * m12 + f22 * m22,
        )

    n_layers = len(profile.layers)
    for j in range(n_layers + 1):
        qa, qb = qs[j], qs[j + 1]
        r = qa / qb
        jp = 0j
        if with_prime:
            qa_p = 1.0 if j == 0 else k / qa
            qb_p = 1.0 if j == n_layers else k / qb
            jp = 0.5 * (qa_p * qb - qa * qb_p) / (qb * qb)
        h = 0.5 * (1.0 + r)
        g = 0.5 * (1.0 - r)
        apply(h, g, g, h, jp, -jp, -jp, jp)
        if j < n_layers:
            w = profile.layers[j][0]
            arg = 1j * qb * w
            if abs(arg.real) > _EXP_MAX:
                raise OverflowError("propagation factor exceeds the floating range")
            ep = cmath.exp(arg)
            em = 1.0 / ep
            dp = dm = 0j
            if with_prime:
                qb_p = k / qb
                dp = 1j * w * qb_p * ep
                dm = -1j * w * qb_p * em
            apply(ep, 0j, 0j, em, dp, 0j, 0j, dm)

    return (m11, m12, m21, m22), (d11, d12, d21, d22)


def t22_with_prime(profile, k):
    """(t22, dt22/dk) at scalar complex k, analytic derivative."""
    kc = complex(k)
    if abs(kc) < _K_MIN:
        raise ZeroWavenumberError("transfer matrix undefined at k = 0")
    (m11, m12, m21, m22), (d11, d12, d21, d22) = _compose_scalar(profile, kc, True)
    length = profile.length
    arg = 1j * kc * length
    if abs(arg.real) > _EXP_MAX:
        raise OverflowError("exp(ikL) exceeds the floating range")
    phase = cmath.exp(arg)
    t = phase * m22
    tp = 1j * length * phase * m22 + phase * d22
    return t, tp


def transfer_matrix(profile, k):
    """Full global-basis transfer matrix at scalar complex k."""
    kc = complex(k)
    if abs(kc) < _K_MIN:
        raise ZeroWavenumberError("transfer matrix undefined at k = 0")
    (m11, m12, m21, m22), _ = _compose_scalar(profile, kc, False)
    length = profile.length
    phase = cmath.exp(1j * kc * length)
    return TransferMatrix(m11 / phase, m12 / phase, m21 * phase, m22 * phase)


# ---------------------------------------------------------------------------
# vectorized path (numpy arrays of k)
# ---------------------------------------------------------------------------


def _t22_vector(profile, k):
    c = profile.units.inv_mass_coeff
    k = np.asarray(k, dtype=complex)
    if np.any(np.abs(k) < _K_MIN):
        raise ZeroWavenumberError("transfer matrix undefined at k = 0")
    k2 = k * k
    qs = [k]
    for _, h in profile.layers:
        q = np.sqrt(k2 - h / c)
        if np.any(np.abs(q) < _Q_MIN):
            raise BranchPointProximityError(
                "layer wavevector ~ 0 somewhere on the grid; perturb those points"
            )
        qs.append(q)
    qs.append(k)

    m11 = np.ones_like(k)
    m12 = np.zeros_like(k)
    m21 = np.zeros_like(k)
    m22 = np.ones_like(k)
    n_layers = len(profile.layers)
    for j in range(n_layers + 1):
        r = qs[j] / qs[j + 1]
        h = 0.5 * (1.0 + r)
        g = 0.5 * (1.0 - r)
        m11, m12, m21, m22 = (
            h * m11 + g * m21,
            h * m12 + g * m22,
            g * m11 + h * m21,
            g * m12 + h * m22,
        )
        if j < n_layers:
            w = profile.layers[j][0]
            arg = 1j * qs[j + 1] * w
            if np.any(np.abs(arg.real) > _EXP_MAX):
                raise OverflowError("propagation factor exceeds the floating range")
            ep = np.exp(arg)
            em = 1.0 / ep
            m11, m12 = ep * m11, ep * m12
            m21, m22 = em * m21, em * m22
    return np.exp(1j * k * profile.length) * m22


def t22(profile, k):
    """Denominator element of the transmission amplitude, t(k) = 1/t22(k)."""
    if np.ndim(k) == 0:
        return t22_with_prime(profile, k)[0]
    return _t22_vector(profile, k)


def t22_prime(profile, k):
    """Analytic dt22/dk at scalar complex k."""
    return t22_with_prime(profile, k)[1]


def transmission_amplitude(profile, k):
    """t(k) = 1/t22(k); scalar or array k away from poles."""
    den = t22(profile, k)
    if np.ndim(den) == 0:
        if abs(den) < 1e-13:
            raise PoleProximityError(f"|t22| = {abs(den):.3e} at k = {k!r}")
        return 1.0 / den
    if np.any(np.abs(den) < 1e-13):
        raise PoleProximityError("grid point falls on a transmission pole")
    return 1.0 / den


def transmission_coefficient(profile, energy):
    """T(E) = |t(k(E))|^2 for real E > 0; clipped into [0, 1].

    Points that land numerically on a layer branch point are perturbed by one
    part in 1e9 and re-evaluated.
    """
    e_arr = np.asarray(energy, dtype=float)
    if np.any(e_arr <= 0.0):
        raise NegativeEnergyError("transmission coefficient requires E > 0")
    c = profile.units.inv_mass_coeff
    k = np.sqrt(e_arr / c)
    try:
        den = t22(profile, k)
    except BranchPointProximityError:
        den = t22(profile, np.sqrt(e_arr * (1.0 + 1e-9) / c))
    t_co = 1.0 / np.abs(den) ** 2
    return np.minimum(t_co, 1.0) if e_arr.ndim else min(float(t_co), 1.0)
