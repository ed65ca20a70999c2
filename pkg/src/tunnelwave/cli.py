"""Command-line front end: pole tables, spectra, transients, reconstruction.

Every command writes '#'-headed CSV with full-precision values and a header
block (tool version, profile fingerprint, units, config echo) so runs are
reproducible byte for byte.  Pole catalogs are cached under the output
directory keyed by a fingerprint of (layers, mass ratio, search config) and
rebuilt whenever the fingerprint does not match.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .evolution import (
    GaussianPacket,
    free_packet_log,
    tau_system,
    transmitted_packet_log,
    zeta,
)
from .oracle import NodeBudgetExceededError, psi_quadrature
from .poles import (
    AnchorFailureError,
    PoleSearchConfig,
    catalog_fingerprint,
    load_catalog,
    save_catalog,
    sweep_poles,
)
from .potential import PotentialProfile, transmission_coefficient
from .presets import PRESET_NAMES, default_n_seed, default_packet_energy, preset_profile
from .resonances import ResidueSet, expansion_t, residues

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


@dataclass(frozen=True)
class RunConfig:
    """Resolved run parameters shared by all subcommands."""

    profile: PotentialProfile
    preset: str | None
    out_dir: Path
    search: PoleSearchConfig
    x_c: float = -5.0
    sigma: float = 0.5
    energy: float | None = None  # None: preset rule / V/2 fallback


class ConfigError(ValueError):
    pass


def parse_profile_file(path):
    """Flat key-value config: repeated ``layer = width height`` lines plus
    ``mass_ratio``; optional ``x_c``, ``sigma``, ``e0`` packet overrides."""
    layers = []
    values = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: cannot parse line {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key == "layer":
            parts = val.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}: layer needs 'width height', got {val!r}")
            layers.append((float(parts[0]), float(parts[1])))
        else:
            values[key] = float(val)
    if not layers:
        raise ConfigError(f"{path}: no layer lines found")
    profile = PotentialProfile(
        layers=tuple(layers), mass_ratio=values.pop("mass_ratio", 0.067)
    )
    return profile, values


def parse_distance(text, length):
    """Distance in nm, or a multiple of the system length like '2L', '2e5L'."""
    text = text.strip()
    if text.lower().endswith("l"):
        return float(text[:-1]) * length
    return float(text)


def _resolve_config(args):
    if getattr(args, "preset", None) and getattr(args, "config", None):
        raise ConfigError("give either --preset or --config, not both")
    if getattr(args, "preset", None):
        if args.preset not in PRESET_NAMES:
            raise ConfigError(
                f"unknown preset {args.preset!r}; choose from {PRESET_NAMES}"
            )
        profile = preset_profile(args.preset)
        preset = args.preset
        extras = {}
    elif getattr(args, "config", None):
        profile, extras = parse_profile_file(args.config)
        preset = None
    else:
        raise ConfigError("a system is required: --preset NAME or --config FILE")
    n_seed = args.nseed if args.nseed else (
        default_n_seed(preset) if preset else 1000
    )
    search = PoleSearchConfig(n_seed=n_seed, seed=args.seed)
    return RunConfig(
        profile=profile,
        preset=preset,
        out_dir=Path(args.out),
        search=search,
        x_c=extras.get("x_c", -5.0),
        sigma=extras.get("sigma", 0.5),
        energy=extras.get("e0"),
    )


def _catalog_cache_path(cfg):
    fp = catalog_fingerprint(cfg.profile, cfg.search)
    return cfg.out_dir / "cache" / f"poles_{fp}.csv", fp


def obtain_catalog(cfg, quiet=False):
    """Load the cached catalog when the fingerprint matches, else sweep."""
    path, fp = _catalog_cache_path(cfg)
    if path.exists():
        catalog, extras = load_catalog(path)
        if catalog.profile_fingerprint == fp and extras is not None:
            rset = ResidueSet(
                residues=extras["residues"], u0=extras["u0"], u_l=extras["u_l"]
            )
            return catalog, rset
    catalog = sweep_poles(cfg.profile, cfg.search)
    rset = residues(cfg.profile, catalog)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_catalog(catalog, path, residues=rset.residues, u0=rset.u0, u_l=rset.u_l)
    if not quiet:
        print(f"catalog: {len(catalog)} poles -> {path}")
    return catalog, rset


def _packet(cfg, catalog):
    units = cfg.profile.units
    if cfg.energy is not None:
        e0 = cfg.energy
    elif cfg.preset is not None:
        e0 = default_packet_energy(cfg.preset, cfg.profile, catalog)
    else:
        e0 = 0.5 * cfg.profile.barrier_height
    return GaussianPacket(
        x_c=cfg.x_c, sigma=cfg.sigma, k0=units.wavenumber_of_energy(e0), units=units
    )


def _csv_header(cfg, columns, extra=None):
    lines = [
        f"# tunnelwave {__version__}",
        f"# fingerprint: {catalog_fingerprint(cfg.profile, cfg.search)}",
        "# units: nm fs eV",
        f"# system: {cfg.profile.fingerprint_key()}",
        f"# search: {cfg.search.fingerprint_key()}",
    ]
    for key, val in (extra or {}).items():
        lines.append(f"# {key}: {val}")
    lines.append("# columns: " + ",".join(columns))
    return lines


def _write_csv(path, header_lines, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    body = [",".join(format(v, ".17e") for v in row) for row in rows]
    path.write_text("\n".join(header_lines + body) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_poles(args):
    cfg = _resolve_config(args)
    catalog, _ = obtain_catalog(cfg)
    units = cfg.profile.units
    pos = catalog.positions(units)
    wid = catalog.widths(units)
    name = cfg.preset or "custom"
    out = cfg.out_dir / f"poles_{name}.csv"
    rows = [
        (float(n + 1), catalog.poles[n].real, catalog.poles[n].imag,
         pos[n], wid[n], catalog.residuals[n])
        for n in range(len(catalog))
    ]
    _write_csv(out, _csv_header(cfg, ["n", "re_kappa", "im_kappa",
                                      "position_eV", "width_eV", "residual"]), rows)
    print(f"wrote {out}")
    print("  n      E_n (eV)    Gamma_n (eV)")
    for n in range(min(10, len(catalog))):
        print(f"{n + 1:3d}  {pos[n]:.6f}  {wid[n]:.6e}")
    return 0


def cmd_spectrum(args):
    cfg = _resolve_config(args)
    catalog, rset = obtain_catalog(cfg)
    profile = cfg.profile
    n_list = _parse_pole_counts(args.poles, len(catalog))
    v_top = profile.barrier_height
    energies = np.linspace(5.0 * v_top / args.points, 5.0 * v_top, args.points)
    k = np.sqrt(energies / profile.units.inv_mass_coeff)
    t_exact = transmission_coefficient(profile, energies)
    amp_exact = 1.0 / np.array(
        [complex(x) for x in np.atleast_1d(_t22_grid(profile, k))]
    )
    columns = ["E_over_V", "E_eV", "T_exact", "re_t_exact", "im_t_exact"]
    data = [energies / v_top, energies, t_exact, amp_exact.real, amp_exact.imag]
    for n in n_list:
        amp = expansion_t(profile, k, catalog, rset, n)
        columns += [f"T_expansion_N{n}", f"re_t_N{n}", f"im_t_N{n}"]
        data += [np.abs(amp) ** 2, amp.real, amp.imag]
    name = cfg.preset or "custom"
    out = cfg.out_dir / f"spectrum_{name}.csv"
    _write_csv(out, _csv_header(cfg, columns, {"pole_counts": args.poles}),
               zip(*data))
    for n in n_list:
        amp = expansion_t(profile, k, catalog, rset, n)
        dev = np.max(np.abs(np.abs(amp) ** 2 - t_exact))
        print(f"N={n:5d}: max |T_expansion - T_exact| = {dev:.3e}")
    print(f"wrote {out}")
    return 0


def _t22_grid(profile, k):
    from .potential import BranchPointProximityError, t22

    try:
        return t22(profile, k)
    except BranchPointProximityError:
        return t22(profile, k * (1.0 + 1e-9))


def _parse_pole_counts(text, n_max):
    if not text:
        return [n_max]
    out = []
    for item in text.split(","):
        n = int(item)
        if not 1 <= n <= n_max:
            raise ConfigError(f"pole count {n} outside 1..{n_max}")
        out.append(n)
    return out


def cmd_evolve(args):
    cfg = _resolve_config(args)
    catalog, rset = obtain_catalog(cfg)
    profile = cfg.profile
    packet = _packet(cfg, catalog)
    tau_sys = tau_system(profile, catalog)
    x_d = parse_distance(args.xd, profile.length)
    n_poles = max(_parse_pole_counts(args.poles, len(catalog)))
    ts = np.linspace(1e-3 * tau_sys, args.tmax * tau_sys, args.tpoints)
    logs = transmitted_packet_log(
        packet, profile, catalog, rset, x_d, ts, n_poles=n_poles
    )
    with np.errstate(under="ignore"):
        rho = packet.sigma * np.exp(2.0 * np.asarray(logs).real)
        rho_free = packet.sigma * np.exp(
            2.0 * np.asarray(free_packet_log(packet, x_d, ts)).real
        )
    columns = ["t_over_tau", "t_fs", "rho_analytic", "rho_free"]
    data = [ts / tau_sys, ts, rho, rho_free]
    if args.oracle:
        rho_oracle = np.full_like(ts, np.nan)
        budget_hit = False
        for i, t in enumerate(ts):
            try:
                rho_oracle[i] = packet.sigma * abs(
                    psi_quadrature(packet, profile, x_d, t)
                ) ** 2
            except NodeBudgetExceededError:
                budget_hit = True
                break
        if budget_hit:
            print("warning: oracle node budget exceeded; oracle column left blank",
                  file=sys.stderr)
        columns.append("rho_oracle")
        data.append(rho_oracle)
    name = cfg.preset or "custom"
    out = cfg.out_dir / f"evolve_{name}.csv"
    _write_csv(
        out,
        _csv_header(cfg, columns, {
            "x_d_nm": repr(x_d),
            "tau_sys_fs": repr(tau_sys),
            "packet": f"x_c={packet.x_c!r} sigma={packet.sigma!r} k0={packet.k0!r}",
        }),
        zip(*data),
    )
    print(f"wrote {out}")
    return 0


def cmd_reconstruct(args):
    cfg = _resolve_config(args)
    catalog, rset = obtain_catalog(cfg)
    profile = cfg.profile
    packet = _packet(cfg, catalog)
    length = profile.length
    x_d = parse_distance(args.xd, length)
    scales = [float(s) for s in args.t0_scales.split(",")]
    if sorted(scales) != scales or len(scales) < 1:
        raise ConfigError("--t0-scales must be increasing")
    n_poles = max(_parse_pole_counts(args.poles, len(catalog)))
    t_flight = (x_d - length) / packet.velocity
    etas = np.linspace(args.eta_min, args.eta_max, args.eta_points)
    e0 = packet.energy
    t_ref = transmission_coefficient(profile, etas * e0)
    columns = ["eta", "E_eV", "T_exact"]
    data = [etas, etas * e0, t_ref]
    for scale in scales:
        t0 = scale * t_flight
        xs = length + np.sqrt(etas) * packet.velocity * t0
        columns.append(f"zeta_t0_{scale:g}")
        data.append(zeta(packet, profile, catalog, rset, xs, t0, n_poles=n_poles))
    name = cfg.preset or "custom"
    out = cfg.out_dir / f"reconstruct_{name}.csv"
    _write_csv(
        out,
        _csv_header(cfg, columns, {
            "x_d_nm": repr(x_d),
            "t0_fs": ",".join(repr(s * t_flight) for s in scales),
        }),
        zip(*data),
    )
    for scale, col in zip(scales, data[3:]):
        print(f"t0 scale {scale:g}: max |zeta - T| = {np.max(np.abs(col - t_ref)):.4f}")
    print(f"wrote {out}")
    return 0


def cmd_validate(args):
    import time

    from .poles import sweep_poles as _sweep
    from .resonances import residues as _residues
    from .validation import run_validation

    cfg = _resolve_config(args)

    def provider():
        path, fp = _catalog_cache_path(cfg)
        if path.exists():
            catalog, extras = load_catalog(path)
            if catalog.profile_fingerprint == fp and extras is not None:
                rset = ResidueSet(
                    residues=extras["residues"], u0=extras["u0"], u_l=extras["u_l"]
                )
                return catalog, rset, None
        t0 = time.time()
        catalog = _sweep(cfg.profile, cfg.search)
        elapsed = time.time() - t0
        rset = _residues(cfg.profile, catalog)
        path.parent.mkdir(parents=True, exist_ok=True)
        save_catalog(catalog, path, residues=rset.residues, u0=rset.u0, u_l=rset.u_l)
        return catalog, rset, elapsed

    records = run_validation(cfg, oracle=not args.skip_oracle, provider=provider)
    n_fail = 0
    for rec in records:
        status = "PASS" if rec.passed else "FAIL"
        print(f"{status} {rec.name}: {rec.detail}")
        n_fail += 0 if rec.passed else 1
    print(f"{len(records) - n_fail}/{len(records)} criteria passed")
    return 0 if n_fail == 0 else NUMERICAL_ERROR


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--preset", help=f"built-in system: {', '.join(PRESET_NAMES)}")
    sub.add_argument("--config", help="system config file (layer/mass_ratio lines)")
    sub.add_argument("--out", default="out", help="output directory (default: out)")
    sub.add_argument("--seed", type=int, default=0, help="random seed for the sweep")
    sub.add_argument("--nseed", type=int, default=0,
                     help="anchor index for the pole sweep (default: per preset)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tunnelwave",
        description="Resonance poles and transmitted wave-packet transients "
        "for layered 1-D potentials",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("poles", help="compute and cache the pole catalog")
    _add_common(p)
    p.set_defaults(func=cmd_poles)

    p = subs.add_parser("spectrum", help="transmission spectrum, exact vs expansion")
    _add_common(p)
    p.add_argument("--poles", default="", help="comma list of expansion sizes")
    p.add_argument("--points", type=int, default=2000, help="energy grid points")
    p.set_defaults(func=cmd_spectrum)

    p = subs.add_parser("evolve", help="transmitted density over time at fixed x")
    _add_common(p)
    p.add_argument("--xd", required=True, help="detector position, e.g. '2L' or nm")
    p.add_argument("--tmax", type=float, default=20.0, help="end time in tau_sys units")
    p.add_argument("--tpoints", type=int, default=400)
    p.add_argument("--poles", default="", help="truncation of the pole sum")
    p.add_argument("--oracle", action="store_true",
                   help="add the quadrature-oracle column when affordable")
    p.set_defaults(func=cmd_evolve)

    p = subs.add_parser("reconstruct", help="spectral reconstruction zeta(eta)")
    _add_common(p)
    p.add_argument("--poles", default="", help="truncation of the pole sum")
    p.add_argument("--xd", required=True, help="free-flight anchor, e.g. '2e5L'")
    p.add_argument("--t0-scales", default="0.25,0.5,1.0",
                   help="increasing fractions of the flight time")
    p.add_argument("--eta-min", type=float, default=0.2)
    p.add_argument("--eta-max", type=float, default=3.0)
    p.add_argument("--eta-points", type=int, default=481)
    p.set_defaults(func=cmd_reconstruct)

    p = subs.add_parser("validate", help="run the acceptance checks for a system")
    _add_common(p)
    p.add_argument("--skip-oracle", action="store_true",
                   help="skip the slow quadrature-oracle comparison")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (AnchorFailureError, ArithmeticError, NodeBudgetExceededError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
