"""Command-line front end: serialize walk computations to CSV or JSONL.

Every subcommand emits a fixed-header table whose rows carry enough columns
(inputs, outputs, residuals) to re-verify each numeric claim offline.  All
floats are printed with 17 significant digits so files round-trip losslessly;
identical configurations (including the seed) produce byte-identical output.

Exit codes: 0 success, 2 bad configuration, 3 numerical failure,
4 strict-mode property violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import numpy as np

from . import brillouin, dirac, lorentz, wavepacket
from .deformation import InversionError, deform, invert_deform, onshell_point, sample_onshell
from .walk_core import SQRT3, walk_scalar, walk_vector

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_STRICT = 4


class StrictViolation(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


class Writer:
    """Single-writer table output with a pinned header."""

    def __init__(self, path: str | None, fmt: str, header: list[str]):
        self.fmt = fmt
        self.header = header
        self.stream = open(path, "w") if path else sys.stdout
        self._owned = path is not None
        if fmt == "csv":
            self.stream.write(",".join(header) + "\n")

    def row(self, values):
        if self.fmt == "csv":
            self.stream.write(",".join(_fmt(v) for v in values) + "\n")
        else:
            obj = {
                h: (int(v) if isinstance(v, (int, np.integer)) else v if isinstance(v, str) else float(v))
                for h, v in zip(self.header, values)
            }
            self.stream.write(json.dumps(obj) + "\n")

    def close(self):
        if self._owned:
            self.stream.close()


def _parse_vector(text: str) -> np.ndarray:
    parts = [float(p) for p in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return np.array(parts)


def _parse_chirality(text: str) -> int:
    if text in ("+", "+1", "1"):
        return 1
    if text in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError("chirality must be + or -")


_UNIT_SCALE = {"rescaled": 1.0, "maintext": 1.0 / SQRT3}


def _k_in(k, args):
    """Convert an input wave-vector from the configured units to rescaled ones."""
    return np.asarray(k, dtype=float) * _UNIT_SCALE[args.units]


def _k_out(k, args):
    return np.asarray(k, dtype=float) / _UNIT_SCALE[args.units]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_dispersion(args) -> int:
    n = args.grid
    axis = np.linspace(-np.pi, np.pi, n)
    name, _, value = args.slice.partition("=")
    fixed = {"kx": 0, "ky": 1, "kz": 2}.get(name.strip())
    if fixed is None:
        raise ValueError(f"bad slice {args.slice!r}; expected e.g. kz=0")
    fixed_val = float(value)
    header = ["kx", "ky", "kz", "omega_plus", "omega_minus", "n_norm", "lambda", "cone", "region"]
    out = Writer(args.out, args.format, header)
    violations = 0
    try:
        for a in axis:
            for b in axis:
                k = [a, b]
                k.insert(fixed, fixed_val)
                k = _k_in(np.array(k), args)
                lam = float(walk_scalar(k, args.chirality))
                nv = walk_vector(k, args.chirality)
                nn = float(np.linalg.norm(nv))
                omega = math.acos(max(-1.0, min(1.0, lam)))
                if abs(math.sin(omega) ** 2 - nn * nn) > 1e-12:
                    violations += 1
                region = brillouin.classify_region(brillouin.wrap_to_zone(k), args.chirality)
                kout = _k_out(k, args)
                out.row([kout[0], kout[1], kout[2], omega, -omega, nn, lam,
                         float(np.linalg.norm(k)), int(region)])
    finally:
        out.close()
    if args.strict and violations:
        raise StrictViolation
    return EXIT_OK


_ORBIT_HEADER = ["trace", "step", "parameter", "kx", "ky", "kz", "omega", "region",
                 "onshell_residual", "status"]


def _emit_trace(out: Writer, label: str, trace, args) -> bool:
    for i, (pt, par, res) in enumerate(zip(trace.points, trace.params, trace.residuals)):
        kout = _k_out(pt.k, args)
        out.row([label, i, par, kout[0], kout[1], kout[2], pt.omega, pt.region, res, "ok"])
    if trace.failed_at is not None:
        out.row([label, trace.failed_at, float(trace.failed_at), 0.0, 0.0, 0.0, 0.0, -1, 1.0,
                 "inversion-failure"])
        return False
    return True


def _orbit_traces(args):
    """(label, trace) pairs for the requested preset or custom generator."""
    branch = args.branch
    if args.preset == "fig2-left":
        for kx in (0.05, 0.2, 0.5, 1.0, 1.7):
            x0 = onshell_point([kx, 0.0, 0.0], branch, args.chirality)
            # 100 samples over a full turn; spacing avoids the exact y-axis
            yield f"rot-kx={kx}", lorentz.trace_orbit(x0, "rotation", [0, 0, 1], 100, 2 * np.pi)
    elif args.preset == "fig2-right":
        for i in range(12):
            ang = 2.0 * np.pi * (i + 0.5) / 12
            direction = np.array([np.cos(ang), np.sin(ang), 0.0])
            x0 = onshell_point(0.01 * direction, branch, args.chirality)
            yield f"boost-dir={i}", lorentz.trace_orbit(x0, "boost", -direction, 33, 4.0)
    elif args.preset == "fig3":
        x0 = onshell_point([0.3, 0.0, 0.0], branch, args.chirality)
        idx = 0
        for pol in np.linspace(0.0, np.pi, 9):
            for azim in np.linspace(0.0, 2 * np.pi, 17)[:-1]:
                axis = np.array([-np.sin(azim), np.cos(azim), 0.0])
                T = lorentz.rotation_matrix(np.array([0.0, 0.0, 1.0]), azim) @ lorentz.rotation_matrix(
                    np.array([0.0, 1.0, 0.0]), pol
                )
                p = T @ deform(x0)
                try:
                    y = invert_deform(p, x0.region, x0.chirality)
                except InversionError:
                    yield f"so3-{idx}", lorentz.OrbitTrace(
                        start=x0, kind="rotation", direction=axis, params=np.array([pol]),
                        points=[], residuals=np.array([]), failed_at=0)
                    idx += 1
                    continue
                res = float(np.max(np.abs(deform(y) - p))) / max(1.0, float(np.max(np.abs(p))))
                yield f"so3-{idx}", lorentz.OrbitTrace(
                    start=x0, kind="rotation", direction=axis, params=np.array([pol]),
                    points=[y], residuals=np.array([res]))
                idx += 1
    else:
        x0 = onshell_point(_k_in(args.k, args), branch, args.chirality)
        if args.axis is not None:
            axis = args.axis / np.linalg.norm(args.axis)
            yield "rotation", lorentz.trace_orbit(x0, "rotation", axis, args.steps, args.angle)
        else:
            direction = args.beta / np.linalg.norm(args.beta)
            yield "boost", lorentz.trace_orbit(x0, "boost", direction, args.steps, args.max_rapidity)


def cmd_orbit(args) -> int:
    if args.preset is None and args.axis is None and args.beta is None:
        print("orbit: need --preset, --axis or --beta", file=sys.stderr)
        return EXIT_CONFIG
    out = Writer(args.out, args.format, _ORBIT_HEADER)
    ok = True
    strict_fail = False
    try:
        for label, trace in _orbit_traces(args):
            if not _emit_trace(out, label, trace, args):
                ok = False
            if args.strict and trace.complete and len(trace.residuals) and np.max(trace.residuals) > 1e-9:
                strict_fail = True
    finally:
        out.close()
    if not ok:
        return EXIT_NUMERICAL
    if strict_fail:
        raise StrictViolation
    return EXIT_OK


def cmd_covariance(args) -> int:
    rng = np.random.default_rng(args.seed)
    header = ["case", "chirality", "region", "kx", "ky", "kz", "rapidity", "swapped",
              "residual", "result"]
    out = Writer(args.out, args.format, header)
    failures = 0
    try:
        for i in range(args.samples):
            chi = args.chirality
            region = args.region if args.region is not None else int(rng.integers(0, 4))
            eta = rng.uniform(0.05, 2.0)
            x = sample_onshell(region, 1, rng, chi=chi, max_p=8.0 * math.exp(-eta))[0]
            u = rng.normal(size=3)
            u /= np.linalg.norm(u)
            T = lorentz.boost_matrix(math.tanh(eta) * u)
            for swapped in (False, True):
                rep = lorentz.covariance_check(x, T, swap_pair=swapped)
                want_pass = not swapped
                good = rep.passed == want_pass
                if not good:
                    failures += 1
                kout = _k_out(x.k, args)
                out.row([i, chi, region, kout[0], kout[1], kout[2], eta, int(swapped),
                         rep.residual, "ok" if good else "FAIL"])
    finally:
        out.close()
    if args.strict and failures:
        raise StrictViolation
    return EXIT_OK


def cmd_regions(args) -> int:
    n = args.grid
    u = (np.arange(n) + 0.5) / n - 0.5
    frac = np.stack(np.meshgrid(u, u, u, indexing="ij"), axis=-1).reshape(-1, 3)
    ks = brillouin.wrap_to_zone(frac @ brillouin.RECIP_BASIS.T)
    regs = brillouin.classify_region(ks, args.chirality)
    ns = walk_vector(ks, args.chirality)
    header = ["region", "count", "fraction", "min_n_norm", "max_n_norm"]
    out = Writer(args.out, args.format, header)
    empty = 0
    try:
        for region in range(4):
            mask = regs == region
            count = int(np.sum(mask))
            if count == 0:
                empty += 1
                out.row([region, 0, 0.0, 0.0, 0.0])
                continue
            norms = np.linalg.norm(ns[mask], axis=1)
            out.row([region, count, count / len(ks), float(norms.min()), float(norms.max())])
        out.row([brillouin.BOUNDARY, int(np.sum(regs == brillouin.BOUNDARY)),
                 float(np.mean(regs == brillouin.BOUNDARY)), 0.0, 0.0])
    finally:
        out.close()
    if args.strict and empty:
        raise StrictViolation
    return EXIT_OK


def cmd_evolve(args) -> int:
    grid = wavepacket.KGrid((args.grid,) * 3)
    pkt = wavepacket.gaussian_packet(grid, _k_in(args.center, args), args.sigma,
                                     chi=args.chirality, branch=args.branch)
    header = ["steps", "norm", "norm_drift", "vx", "vy", "vz", "speed_inf", "gv_x", "gv_y", "gv_z"]
    out = Writer(args.out, args.format, header)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v = wavepacket.measure_packet_velocity(pkt, max(args.steps, 1))
        gv = wavepacket.group_velocity(_k_in(args.center, args), args.chirality, args.branch)
        for t in sorted({0, args.steps // 10, args.steps}):
            evolved = wavepacket.evolve(pkt, t)
            nrm = evolved.norm()
            out.row([t, nrm, abs(nrm - 1.0), v[0], v[1], v[2],
                     float(np.max(np.abs(v))), gv[0], gv[1], gv[2]])
    finally:
        out.close()
    return EXIT_OK


def cmd_dirac(args) -> int:
    params = dirac.DiracParams.from_mass(args.mass)
    n = args.grid
    axis = np.linspace(-np.pi, np.pi, n)
    header = ["kx", "ky", "kz", "omega_1", "omega_2", "omega_3", "omega_4", "max_shell_residual"]
    out = Writer(args.out, args.format, header)
    worst = 0.0
    try:
        for a in axis:
            for b in axis:
                k = _k_in(np.array([a, b, 0.0]), args)
                phases = dirac.dirac_dispersion(k, params, args.chirality)
                res = float(np.max(np.abs(dirac.mass_shell_residual(phases, k, args.mass,
                                                                    args.chirality))))
                worst = max(worst, res)
                kout = _k_out(k, args)
                out.row([kout[0], kout[1], kout[2], *phases, res])
    finally:
        out.close()
    if args.strict and worst > 1e-10:
        raise StrictViolation
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--out", default=None, help="output file (default: stdout)")
    sub.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    sub.add_argument("--units", choices=("rescaled", "maintext"), default="rescaled",
                     help="unit convention for wave-vector I/O")
    sub.add_argument("--chirality", type=_parse_chirality, default=1)
    sub.add_argument("--strict", action="store_true",
                     help="exit 4 when a verifiable property fails")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--config", default=None, help="key=value file of defaults")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="planck-walk",
        description="Dispersion surfaces, wave-vector orbits and covariance checks "
                    "of the BCC lattice walks.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    sub_map = {}

    p = subs.add_parser("dispersion", help="dispersion surface on a plane slice")
    p.add_argument("--grid", type=int, default=65)
    p.add_argument("--slice", default="kz=0", help="fixed axis, e.g. kz=0")
    _add_common(p)
    p.set_defaults(func=cmd_dispersion)
    sub_map["dispersion"] = p

    p = subs.add_parser("orbit", help="one-parameter subgroup orbits of on-shell points")
    p.add_argument("--preset", choices=("fig2-left", "fig2-right", "fig3"), default=None)
    p.add_argument("--k", type=_parse_vector, default=np.array([0.3, 0.0, 0.0]))
    p.add_argument("--axis", type=_parse_vector, default=None,
                   help="rotation axis (angle sweep around it)")
    p.add_argument("--beta", type=_parse_vector, default=None,
                   help="boost direction (rapidity sweep along it)")
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--angle", type=float, default=2 * np.pi,
                   help="largest rotation angle of the sweep")
    p.add_argument("--max-rapidity", type=float, default=4.0)
    p.add_argument("--branch", type=int, choices=(1, -1), default=1)
    _add_common(p)
    p.set_defaults(func=cmd_orbit)
    sub_map["orbit"] = p

    p = subs.add_parser("covariance", help="observer-change residuals with negative controls")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--region", type=int, choices=(0, 1, 2, 3), default=None,
                   help="restrict sampling to one zone region")
    _add_common(p)
    p.set_defaults(func=cmd_covariance)
    sub_map["covariance"] = p

    p = subs.add_parser("regions", help="zone decomposition census")
    p.add_argument("--grid", type=int, default=32)
    _add_common(p)
    p.set_defaults(func=cmd_regions)
    sub_map["regions"] = p

    p = subs.add_parser("evolve", help="wave-packet norm conservation and transport")
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--center", type=_parse_vector, default=np.array([0.1, 0.0, 0.0]))
    p.add_argument("--branch", type=int, choices=(1, -1), default=1)
    _add_common(p)
    p.set_defaults(func=cmd_evolve)
    sub_map["evolve"] = p

    p = subs.add_parser("dirac", help="massive-walk eigenphases on a plane slice")
    p.add_argument("--grid", type=int, default=33)
    p.add_argument("--mass", type=float, default=0.5)
    _add_common(p)
    p.set_defaults(func=cmd_dirac)
    sub_map["dirac"] = p

    return parser, sub_map


def _load_config(path: str) -> dict:
    """Read key=value lines; booleans are converted, the rest stay strings
    so argparse applies the option's own type converter to them."""
    overrides = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"bad config line {line!r}")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if key == "strict":
                overrides[key] = value.lower() in ("1", "true", "yes")
            else:
                overrides[key] = value
    return overrides


def main(argv=None) -> int:
    parser, sub_map = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.config:
        try:
            overrides = _load_config(args.config)
        except (OSError, ValueError) as exc:
            print(f"planck-walk: bad config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        sub = sub_map[args.command]
        valid = {action.dest for action in sub._actions}
        unknown = sorted(set(overrides) - valid)
        if unknown:
            print(f"planck-walk: unknown config keys {unknown}", file=sys.stderr)
            return EXIT_CONFIG
        # config provides defaults; flags given on the command line still win
        sub.set_defaults(**overrides)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except StrictViolation:
        return EXIT_STRICT
    except InversionError as exc:
        print(f"planck-walk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"planck-walk: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
