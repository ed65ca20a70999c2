"""Resonance (outgoing-wave) states, residues, and the pole expansion of t(k).

A state at pole kappa is grown from u(0)=1, u'(0)=-i kappa through the layer
stack, checked against the outgoing condition at x=L, then rescaled by the
square root of the non-Hermitian norm

    integral_0^L u^2 dx + i (u(0)^2 + u(L)^2) / (2 kappa) = 1.

The layer integrals of u^2 are evaluated in closed form through functions that
are entire in q^2, so layers at their branch point cost no accuracy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .poles import residual_gate
from .potential import PoleProximityError, t22

__all__ = [
    "NormalizationDegenerateError",
    "NotAPoleError",
    "ResidueSet",
    "ResonanceState",
    "coefficient_C",
    "expansion_t",
    "residues",
    "resonance_state",
]

_BC_RTOL = 1e-8
_NORM_MIN = 1e-14
_EPS = np.finfo(float).eps


class NotAPoleError(ValueError):
    """The supplied wavenumber does not satisfy the outgoing conditions."""


class NormalizationDegenerateError(ArithmeticError):
    """The non-Hermitian norm is numerically zero; state cannot be scaled."""


def _sinc_c(z):
    """sin(z)/z, entire, complex argument."""
    if abs(z) < 1e-8:
        z2 = z * z
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0
    return cmath.sin(z) / z


def _one_minus_sinc_over_sq(z):
    """(1 - sin(z)/z)/z^2, entire; series used where the subtraction cancels."""
    if abs(z) < 0.1:
        z2 = z * z
        return 1.0 / 6.0 - z2 / 120.0 + z2 * z2 / 5040.0 - z2 * z2 * z2 / 362880.0
    return (1.0 - _sinc_c(z)) / (z * z)


@dataclass(frozen=True)
class ResonanceState:
    """Normalized outgoing state: boundary values and per-layer coefficients."""

    kappa: complex
    u0: complex
    u_l: complex
    coefficients: tuple  # (A_j, B_j) for u = A e^{i q xi} + B e^{-i q xi} per layer
    norm_residual: float


def resonance_state(profile, kappa, residual_tol=1e-10, initial_scale=1.0):
    """Construct the normalized resonance state at a validated pole.

    The state is grown in the local plane-wave basis, ``u = a e^{iq xi} +
    b e^{-i q xi}`` per layer, which keeps the growing and decaying
    components separated for arbitrarily deep poles; the (u, u') form loses
    exp(2 |Im kappa| L) digits there.  Layer integrals of u^2 use only the
    bounded entry/exit amplitudes.

    Raises :class:`NotAPoleError` when ``|t22(kappa)|`` exceeds the (depth
    aware) gate or the right boundary fails the outgoing condition, and
    :class:`NormalizationDegenerateError` when the norm integral vanishes.
    """
    kap = complex(kappa)
    if initial_scale == 0:
        raise ValueError("initial_scale must be nonzero")
    gate = residual_gate(_GateCfg(residual_tol), profile.length, kap)
    t_val = abs(t22(profile, kap))
    if t_val > gate:
        raise NotAPoleError(f"|t22| = {t_val:.3e} exceeds gate {gate:.3e} at {kap!r}")

    c = profile.units.inv_mass_coeff
    k2 = kap * kap
    qs = [kap] + [cmath.sqrt(k2 - h / c) for _, h in profile.layers] + [kap]
    # purely left-outgoing start: u(0) = scale, u'(0) = -i kappa scale
    a, b = 0j, complex(initial_scale)
    u_start = a + b
    coeffs = []
    norm_int = 0j
    for j, (width, _) in enumerate(profile.layers):
        r = qs[j] / qs[j + 1]
        a, b = 0.5 * ((1.0 + r) * a + (1.0 - r) * b), 0.5 * ((1.0 - r) * a + (1.0 + r) * b)
        coeffs.append((a, b))
        q = qs[j + 1]
        arg = 1j * q * width
        if abs(arg.real) > 700.0:
            raise OverflowError("propagation factor exceeds the floating range")
        ep = cmath.exp(arg)
        a_out, b_out = a * ep, b / ep
        norm_int += (
            (a_out * a_out - a * a) / (2j * q)
            + 2.0 * a * b * width
            + (b * b - b_out * b_out) / (2j * q)
        )
        a, b = a_out, b_out
    r = qs[-2] / qs[-1]
    a, b = 0.5 * ((1.0 + r) * a + (1.0 - r) * b), 0.5 * ((1.0 - r) * a + (1.0 + r) * b)
    u_end = a + b
    # u'(L) - i kappa u(L) = -2 i kappa b, so b is the incoming contamination
    bc_gate = max(_BC_RTOL, 32.0 * _EPS * math.exp(min(-kap.imag * profile.length, 690.0)))
    if 2.0 * abs(b) > bc_gate * abs(u_end):
        raise NotAPoleError(
            f"right-boundary incoming amplitude {abs(b):.3e} vs |u(L)| "
            f"{abs(u_end):.3e} at {kap!r}"
        )
    norm = norm_int + 1j * (u_start * u_start + u_end * u_end) / (2.0 * kap)
    if abs(norm) < _NORM_MIN:
        raise NormalizationDegenerateError(f"|norm| = {abs(norm):.3e} at {kap!r}")
    scale = 1.0 / cmath.sqrt(norm)
    norm_residual = abs(norm * scale * scale - 1.0)
    return ResonanceState(
        kappa=kap,
        u0=u_start * scale,
        u_l=u_end * scale,
        coefficients=tuple((ai * scale, bi * scale) for ai, bi in coeffs),
        norm_residual=norm_residual,
    )


class _GateCfg:
    # minimal stand-in with the single attribute residual_gate() reads
    def __init__(self, residual_tol):
        self.residual_tol = residual_tol


@dataclass(frozen=True)
class ResidueSet:
    """Residues r_n = u_n(0) u_n(L) / kappa_n aligned with a PoleCatalog."""

    residues: np.ndarray
    u0: np.ndarray
    u_l: np.ndarray

    def __post_init__(self):
        for name in ("residues", "u0", "u_l"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.residues)


def residues(profile, catalog):
    """Residue set for every catalog pole, from normalized resonance states."""
    r_list, u0_list, ul_list = [], [], []
    tol = catalog.config.residual_tol
    for kap in catalog.poles:
        st = resonance_state(profile, kap, residual_tol=tol)
        r_list.append(st.u0 * st.u_l / st.kappa)
        u0_list.append(st.u0)
        ul_list.append(st.u_l)
    return ResidueSet(
        residues=np.array(r_list), u0=np.array(u0_list), u_l=np.array(ul_list)
    )


def _pair_arrays(profile, catalog, residue_set, n_poles):
    """Poles and z_n = r_n exp(-i kappa_n L), ascending |kappa|, first n_poles."""
    n_cat = len(catalog)
    if n_poles is None:
        n_poles = n_cat
    if not 0 <= n_poles <= n_cat:
        raise ValueError(f"n_poles must lie in 0..{n_cat}")
    order = np.argsort(np.abs(catalog.poles))[:n_poles]
    kap = catalog.poles[order]
    z = residue_set.residues[order] * np.exp(-1j * kap * profile.length)
    return kap, z


def expansion_t(profile, k, catalog, residue_set, n_poles=None):
    """Pole expansion of the transmission amplitude, paired over (n, -n).

    ``t(k) = i k sum_n r_n exp(-i kappa_n L) / (k - kappa_n)`` with the mirror
    poles entering as ``kappa_{-n} = -conj(kappa_n)``, ``r_{-n} exp(...) =
    -conj(r_n exp(...))``; each (n, -n) pair is accumulated together in
    ascending |kappa| order, which keeps every truncation time-reversal clean.
    """
    kap, z = _pair_arrays(profile, catalog, residue_set, n_poles)
    k_arr = np.asarray(k, dtype=complex)
    flat = np.atleast_1d(k_arr).ravel()
    out = np.empty_like(flat)
    tol = catalog.config.dedup_tol
    chunk = max(1, int(2e6 // max(len(kap), 1)))
    for i in range(0, len(flat), chunk):
        kk = flat[i : i + chunk, None]
        d_pos = kk - kap[None, :]
        d_neg = kk + np.conj(kap)[None, :]
        if len(kap) and (np.min(np.abs(d_pos)) < tol or np.min(np.abs(d_neg)) < tol):
            raise PoleProximityError("k is within dedup_tol of a pole")
        pair = z[None, :] / d_pos - np.conj(z)[None, :] / d_neg
        out[i : i + chunk] = 1j * kk[:, 0] * np.sum(pair, axis=1)
    if k_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(k_arr.shape)


def coefficient_C(profile, catalog, residue_set, n_poles=None):
    """Potential-only constant C = i sum_n r_n exp(-i kappa_n L) over +-n.

    Each (n, -n) pair contributes ``-2 Im z_n`` exactly, so C is real.
    """
    _, z = _pair_arrays(profile, catalog, residue_set, n_poles)
    return complex(-2.0 * float(np.sum(z.imag)), 0.0)
