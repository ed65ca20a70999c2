"""Catalog of fourth-quadrant transmission poles of a layered potential.

The sweep anchors on the large-index asymptotic seed, Newton-converges it,
then walks inward one pole spacing (pi/L) at a time.  When a walk step fails,
gated random restarts are drawn inside a confinement rectangle around the
predicted location; after ``max_random_attempts`` consecutive failures the
walk switches permanently to thin rectangles (pi / (subdivision L) wide, twice
as tall) that are allowed to be empty, which is what resolves sharp and
overlapping resonances near and below the barrier top.
"""

from __future__ import annotations

import cmath
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .potential import t22, t22_with_prime, transmission_coefficient

__all__ = [
    "AnchorFailureError",
    "DivergenceError",
    "IndexTooSmallError",
    "PoleCatalog",
    "PoleSearchConfig",
    "asymptotic_seed",
    "breit_wigner_seeds",
    "catalog_fingerprint",
    "load_catalog",
    "mirror_poles",
    "newton_step_sequence",
    "residual_gate",
    "save_catalog",
    "sweep_poles",
]


class DivergenceError(RuntimeError):
    """Newton iteration failed; signals the restart machinery."""


class AnchorFailureError(RuntimeError):
    """The asymptotic anchor itself did not converge."""


class IndexTooSmallError(ValueError):
    """Asymptotic seed formula needs n >= 2."""


_EPS = np.finfo(float).eps


def residual_gate(config, length, kappa):
    """Depth-aware acceptance threshold on |t22| at a candidate pole.

    Near a zero at depth beta = -Im(kappa), the evaluated |t22| cannot drop
    below ~eps * exp(beta L) in double precision (the value is a cancellation
    of O(1) contributions scaled back by exp(ikL)).  For shallow poles the
    gate is exactly ``config.residual_tol``.
    """
    growth = math.exp(min(-kappa.imag * length, 690.0)) if kappa.imag < 0.0 else 1.0
    return max(config.residual_tol, 64.0 * _EPS * growth)


@dataclass(frozen=True)
class PoleSearchConfig:
    n_seed: int = 4000
    newton_tol: float = 1e-12
    residual_tol: float = 1e-10
    max_newton_iters: int = 100
    max_random_attempts: int = 1000
    regime2_subdivision: int = 20
    dedup_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_seed < 2:
            raise ValueError("n_seed must be >= 2")
        for name in ("newton_tol", "residual_tol", "dedup_tol"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_newton_iters < 1 or self.max_random_attempts < 1:
            raise ValueError("iteration budgets must be >= 1")
        if self.regime2_subdivision < 2:
            raise ValueError("regime2_subdivision must be >= 2")

    def fingerprint_key(self):
        return (
            f"n_seed={self.n_seed};newton_tol={self.newton_tol!r};"
            f"residual_tol={self.residual_tol!r};max_newton_iters={self.max_newton_iters};"
            f"max_random_attempts={self.max_random_attempts};"
            f"regime2_subdivision={self.regime2_subdivision};"
            f"dedup_tol={self.dedup_tol!r};seed={self.seed}"
        )


def catalog_fingerprint(profile, config):
    """Hash identifying (profile, search config) for cache lookups."""
    key = profile.fingerprint_key() + "|" + config.fingerprint_key()
    return hashlib.sha256(key.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class PoleCatalog:
    """Validated, ordered fourth-quadrant poles with per-pole |t22| residuals."""

    poles: np.ndarray
    residuals: np.ndarray
    profile_fingerprint: str
    length: float
    config: PoleSearchConfig

    def __post_init__(self):
        poles = np.asarray(self.poles, dtype=complex)
        residuals = np.asarray(self.residuals, dtype=float)
        poles.setflags(write=False)
        residuals.setflags(write=False)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residuals", residuals)

    def __len__(self):
        return len(self.poles)

    def energies(self, units):
        """Complex pole energies E_n = (hbar^2/2m) kappa_n^2."""
        return units.energy_of_wavenumber(self.poles)

    def widths(self, units):
        """Resonance widths Gamma_n = -2 Im E_n (eV)."""
        return -2.0 * np.imag(self.energies(units))

    def positions(self, units):
        """Resonance positions Re E_n (eV)."""
        return np.real(self.energies(units))


def asymptotic_seed(n, length):
    """High-index pole estimate n*pi/L - i (2/L) ln n."""
    if n < 2:
        raise IndexTooSmallError("asymptotic seed requires n >= 2")
    return n * math.pi / length - 2j * math.log(n) / length


def newton_step_sequence(seed, profile, config=PoleSearchConfig()):
    """Newton-Raphson iteration on t22 from a single seed.

    Returns the converged pole, or raises :class:`DivergenceError` when the
    iterate leaves the lower half-plane, stops being finite, or the budget is
    exhausted.
    """
    k = complex(seed)
    if k == 0:
        raise ValueError("seed must be nonzero")
    length = profile.length
    for _ in range(config.max_newton_iters):
        try:
            val, der = t22_with_prime(profile, k)
        except (ArithmeticError, OverflowError, ValueError):
            raise DivergenceError(f"t22 not evaluable at {k!r}")
        if der == 0 or not (cmath.isfinite(val) and cmath.isfinite(der)):
            raise DivergenceError("degenerate derivative")
        # The residual cannot fall below its depth-aware floor, and once it is
        # there the Newton step just jitters; accept at a quarter of the gate.
        if abs(val) <= 0.25 * residual_gate(config, length, k):
            return k
        step = val / der
        k = k - step
        if not cmath.isfinite(k) or k.imag > 0.0:
            raise DivergenceError("iterate left the fourth-quadrant search domain")
        if abs(step) < config.newton_tol:
            try:
                if abs(t22(profile, k)) < residual_gate(config, length, k):
                    return k
            except (ArithmeticError, OverflowError, ValueError):
                raise DivergenceError(f"t22 not evaluable at {k!r}")
    raise DivergenceError("newton iteration budget exhausted")


def _try_rectangle(profile, config, rng, re_c, half_re, im_c, half_im, first_seed):
    """Deterministic seed, then gated random restarts; None when empty."""

    def inside(k):
        return (
            abs(k.real - re_c) <= half_re * (1.0 + 1e-9)
            and abs(k.imag - im_c) <= half_im * (1.0 + 1e-9)
        )

    try:
        k = newton_step_sequence(first_seed, profile, config)
        if inside(k):
            return k
    except DivergenceError:
        pass
    for _ in range(config.max_random_attempts):
        gr = rng.uniform(-0.5, 0.5)
        gi = rng.uniform(-0.5, 0.5)
        s = complex(re_c + 2.0 * gr * half_re, im_c + 2.0 * gi * half_im)
        try:
            if abs(t22(profile, s)) >= 1.0:
                continue
            k = newton_step_sequence(s, profile, config)
        except (DivergenceError, ArithmeticError, OverflowError, ValueError):
            continue
        if inside(k):
            return k
    return None


def sweep_poles(profile, config=PoleSearchConfig(), n_above=0):
    """Full inward pole sweep; returns a validated :class:`PoleCatalog`.

    ``n_above`` optionally extends the walk outward past the anchor index.
    """
    if not profile.has_barrier:
        raise ValueError("profile has no barrier; t22 has no zeros")
    rng = np.random.default_rng(config.seed)
    length = profile.length
    dr = math.pi / length
    dr_thin = dr / config.regime2_subdivision

    try:
        anchor = newton_step_sequence(
            asymptotic_seed(config.n_seed, length), profile, config
        )
    except DivergenceError as exc:
        raise AnchorFailureError(f"asymptotic anchor did not converge: {exc}")
    if not (anchor.real > 0.0 and anchor.imag < 0.0):
        raise AnchorFailureError("anchor converged outside the fourth quadrant")

    found = [anchor]
    ref = anchor
    regime2 = False
    re_next = anchor.real - dr
    while True:
        width = dr_thin if regime2 else dr
        if re_next <= 0.5 * width:
            break
        beta = -ref.imag
        height = 2.0 * beta if regime2 else beta
        im_c = ref.imag
        pole = _try_rectangle(
            profile,
            config,
            rng,
            re_c=re_next,
            half_re=0.5 * width,
            im_c=im_c,
            half_im=0.5 * height,
            first_seed=complex(re_next, im_c),
        )
        if pole is not None and pole.real > 0.0 and pole.imag < 0.0:
            found.append(pole)
            ref = pole
            re_next = pole.real - (dr_thin if regime2 else dr)
        elif not regime2:
            regime2 = True
            re_next = ref.real - dr_thin
        else:
            re_next -= dr_thin

    ref = anchor
    for _ in range(n_above):
        beta = -ref.imag
        pole = _try_rectangle(
            profile,
            config,
            rng,
            re_c=ref.real + dr,
            half_re=0.5 * dr,
            im_c=ref.imag,
            half_im=0.5 * beta,
            first_seed=ref + dr,
        )
        if pole is None:
            break
        found.append(pole)
        ref = pole

    return _build_catalog(profile, config, found)


def _build_catalog(profile, config, found):
    poles = sorted((k for k in found if k.real > 0.0 and k.imag < 0.0), key=lambda k: k.real)
    kept = []
    length = profile.length
    for k in poles:
        res = abs(t22(profile, k))
        if res > residual_gate(config, length, k):
            continue
        if kept and abs(k - kept[-1][0]) < config.dedup_tol:
            if res < kept[-1][1]:
                kept[-1] = (k, res)
            continue
        kept.append((k, res))
    return PoleCatalog(
        poles=np.array([k for k, _ in kept], dtype=complex),
        residuals=np.array([r for _, r in kept], dtype=float),
        profile_fingerprint=catalog_fingerprint(profile, config),
        length=profile.length,
        config=config,
    )


def mirror_poles(catalog):
    """Third-quadrant partners -conj(kappa_n); derived, never stored."""
    return -np.conj(catalog.poles)


def breit_wigner_seeds(profile, e_max, grid_points=2000, prominence=0.05):
    """Half-width-at-half-maximum seeds from peaks of T(E).

    Independent regime-I cross-check of the sweep: each returned seed is
    ``k(E_peak) - i * (k-space half-width)`` for a transmission peak whose
    prominence exceeds ``prominence * max(T)``.
    """
    if e_max <= 0.0:
        raise ValueError("e_max must be positive")
    energies = np.linspace(e_max / grid_points, e_max, grid_points)
    t_co = transmission_coefficient(profile, energies)
    c = profile.units.inv_mass_coeff
    seeds = []
    t_scale = float(np.max(t_co))
    if t_scale <= 0.0:
        return seeds
    for i in range(1, grid_points - 1):
        if not (t_co[i] > t_co[i - 1] and t_co[i] >= t_co[i + 1]):
            continue
        j = i
        while j > 0 and t_co[j - 1] < t_co[j]:
            j -= 1
        left_min = t_co[j]
        j = i
        while j < grid_points - 1 and t_co[j + 1] < t_co[j]:
            j += 1
        right_min = t_co[j]
        prom = t_co[i] - max(left_min, right_min)
        if prom < prominence * t_scale:
            continue
        level = t_co[i] - 0.5 * prom
        e_lo = _cross(energies, t_co, i, level, -1)
        e_hi = _cross(energies, t_co, i, level, +1)
        k_half = 0.5 * (math.sqrt(e_hi / c) - math.sqrt(e_lo / c))
        seeds.append(complex(math.sqrt(energies[i] / c), -k_half))
    return seeds


def _cross(energies, t_co, i_peak, level, direction):
    """Energy where T first crosses ``level`` moving away from the peak."""
    i = i_peak
    n = len(t_co)
    while 0 < i < n - 1:
        j = i + direction
        if t_co[j] <= level:
            frac = (t_co[i] - level) / (t_co[i] - t_co[j])
            return energies[i] + frac * (energies[j] - energies[i])
        if t_co[j] > t_co[i]:
            break
        i = j
    return energies[i]


# ---------------------------------------------------------------------------
# serialization: versioned columnar text, bit-exact round trip
# ---------------------------------------------------------------------------

_FORMAT_TAG = "polecatalog v1"


def save_catalog(catalog, path, *, residues=None, u0=None, u_l=None):
    """Write the catalog (and optional residue columns) as '#'-headed CSV."""
    cols = ["n", "re_kappa", "im_kappa", "residual"]
    extras = []
    if residues is not None:
        cols += ["re_r", "im_r", "re_u0", "im_u0", "re_uL", "im_uL"]
        extras = [residues, u0, u_l]
        if any(x is None for x in extras):
            raise ValueError("residues, u0 and u_l must be given together")
    cfg = catalog.config
    lines = [
        f"# {_FORMAT_TAG}",
        f"# fingerprint: {catalog.profile_fingerprint}",
        "# units: nm fs eV",
        f"# length_nm: {catalog.length!r}",
        f"# config: {cfg.fingerprint_key()}",
        f"# columns: {','.join(cols)}",
    ]
    for i, (kappa, res) in enumerate(zip(catalog.poles, catalog.residuals), start=1):
        row = [str(i), _fmt(kappa.real), _fmt(kappa.imag), _fmt(res)]
        if extras:
            r_i, u0_i, ul_i = (np.asarray(x)[i - 1] for x in extras)
            row += [
                _fmt(r_i.real), _fmt(r_i.imag),
                _fmt(u0_i.real), _fmt(u0_i.imag),
                _fmt(ul_i.real), _fmt(ul_i.imag),
            ]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _fmt(x):
    return format(float(x), ".17e")


def _parse_config(text):
    kwargs = {}
    for item in text.split(";"):
        key, val = item.split("=", 1)
        if key in ("n_seed", "max_newton_iters", "max_random_attempts",
                   "regime2_subdivision", "seed"):
            kwargs[key] = int(val)
        else:
            kwargs[key] = float(val)
    return PoleSearchConfig(**kwargs)


def load_catalog(path):
    """Read a catalog written by :func:`save_catalog`.

    Returns ``(catalog, extras)`` where ``extras`` is None or a dict with
    ``residues``, ``u0`` and ``u_l`` complex arrays.
    """
    header = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != f"# {_FORMAT_TAG}":
            raise ValueError(f"{path}: not a {_FORMAT_TAG} file")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                header[key.strip()] = val.strip()
            else:
                rows.append([float(x) for x in line.split(",")])
    cols = header["columns"].split(",")
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(cols))
    poles = data[:, 1] + 1j * data[:, 2]
    catalog = PoleCatalog(
        poles=poles,
        residuals=data[:, 3],
        profile_fingerprint=header["fingerprint"],
        length=float(header["length_nm"]),
        config=_parse_config(header["config"]),
    )
    extras = None
    if "re_r" in cols:
        extras = {
            "residues": data[:, 4] + 1j * data[:, 5],
            "u0": data[:, 6] + 1j * data[:, 7],
            "u_l": data[:, 8] + 1j * data[:, 9],
        }
    return catalog, extras
