"""
Command-line front end.

    fermicoh verify   --modes 3 [--format text|json] [--seed 0]
    fermicoh spectrum --rho 1 --a 0.01 --kmin 0 --kmax 2 --points 5 [--format csv|json|text]
    fermicoh coherent --modes 2 [--theta 1.57] [--occupancy 50,50] [--phase-variance]

Exit codes: 0 success, 1 failed identity, 2 configuration error.
Options may also come from ``--config FILE`` (``key = value`` lines);
command-line flags take precedence over the file, the file over defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

from fermicoh import physics
from fermicoh.errors import FermicohError
from fermicoh.fock import DEFAULT_MODE_CAP, CoherentLabel, FockSpace, ModeSystem, phase_variance, u1_rotate
from fermicoh.grassmann import ZERO_THRESHOLD, substitute_bilinears
from fermicoh.verification import run_suite

log = logging.getLogger("fermicoh")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "modes": 2,
    "seed": 0,
    "cap": DEFAULT_MODE_CAP,
    "hbar": 1.0,
    "m": 1.0,
    "a": 0.0,
    "rho": 1.0,
    "g": None,
    "units": "dimensionless",
    "kmin": 0.0,
    "kmax": 2.0,
    "points": 5,
    "tolerance": physics.GAPLESS_TOLERANCE,
    "theta": None,
    "occupancy": None,
    "phase_variance": False,
    "output": None,
    "verbose": 0,
}
FORMAT_DEFAULTS = {"verify": "text", "spectrum": "csv", "coherent": "text"}
FORMATS = ("json", "csv", "text")
CONVERTERS = {
    "modes": int, "seed": int, "cap": int, "points": int, "verbose": int,
    "hbar": float, "m": float, "a": float, "rho": float, "g": float,
    "kmin": float, "kmax": float, "tolerance": float, "theta": float,
    "units": str, "occupancy": str, "output": str, "format": str,
    "phase_variance": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


class ConfigError(Exception):
    pass


def load_config(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONVERTERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = CONVERTERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return out


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file with option defaults")
    common.add_argument("--format", choices=FORMATS, default=None)
    common.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    common.add_argument("--verbose", "-v", action="count", default=None)

    parser = argparse.ArgumentParser(prog="fermicoh", description=__doc__.split("\n")[1])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the identity suite")
    p.add_argument("--modes", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cap", type=int, default=None)

    p = sub.add_parser("spectrum", parents=[common], help="quasi-particle dispersion on a momentum grid")
    for name in ("hbar", "m", "a", "rho", "g", "kmin", "kmax", "tolerance"):
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--units", choices=physics.UNIT_SYSTEMS, default=None)

    p = sub.add_parser("coherent", parents=[common], help="coherent-state report")
    p.add_argument("--modes", type=int, default=None)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--occupancy", default=None, help="comma-separated occupancies, one per mode")
    p.add_argument("--phase-variance", action="store_true", default=None)
    return parser


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge flags over the config file over defaults."""
    file_values = load_config(args.config) if args.config else {}
    merged = dict(DEFAULTS)
    merged["format"] = FORMAT_DEFAULTS[args.command]
    merged.update(file_values)
    for key, value in vars(args).items():
        if value is not None and key != "config":
            merged[key] = value
    merged["command"] = args.command
    if merged["format"] not in FORMATS:
        raise ConfigError(f"unknown format {merged['format']!r}")
    return argparse.Namespace(**merged)


def _emit(text: str, cfg: argparse.Namespace) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_verify(cfg: argparse.Namespace) -> int:
    ModeSystem(cfg.modes, cap=cfg.cap)
    results = run_suite(cfg.modes, seed=cfg.seed, cap=cfg.cap)
    if cfg.format == "json":
        text = json.dumps([r.to_dict() for r in results], indent=2, ensure_ascii=False) + "\n"
    elif cfg.format == "csv":
        lines = ["identity,eq,modes,pass,max_residual"]
        lines += [f'{r.identity},"{r.eq}",{r.modes},{str(r.passed).lower()},{r.max_residual:.3e}' for r in results]
        text = "\n".join(lines) + "\n"
    else:
        passed = sum(r.passed for r in results)
        text = "\n".join(r.line() for r in results) + f"\n{passed}/{len(results)} identities passed\n"
    _emit(text, cfg)
    for r in results:
        if not r.passed:
            print(f"FAILED: {r.identity} [{r.eq}] residual {r.max_residual:.3e}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_spectrum(cfg: argparse.Namespace) -> int:
    params = physics.PhysicalParams(hbar=cfg.hbar, m=cfg.m, a=cfg.a, rho=cfg.rho, units=cfg.units)
    g = physics.coupling(params) if cfg.g is None else cfg.g
    grid = physics.momentum_grid(cfg.kmin, cfg.kmax, cfg.points)
    disp = physics.dispersion(params, g, grid, tolerance=cfg.tolerance)
    if cfg.format == "json":
        text = disp.to_json()
    elif cfg.format == "csv":
        text = disp.to_csv()
    else:
        rows = [f"{'k':>12} {'E_k':>14} {'eps_k':>14}  gapless"]
        rows += [f"{k:12.6g} {e:14.9g} {q:14.9g}  {f}" for k, e, q, f in
                 zip(disp.k, disp.E_k, disp.eps_k, disp.gapless)]
        text = "\n".join(rows) + "\n"
    _emit(text, cfg)
    print(f"g = {disp.g:.9g}, gap 2*rho*g = {disp.gap:.9g}", file=sys.stderr)
    regime = physics.regime_check(params)
    if not regime.dilute:
        print(f"warning: |a| rho^(1/3) = {regime.diluteness:.3g} is not small", file=sys.stderr)
    for k in disp.gapless_points():
        print(f"gapless point at k = {k:.9g}", file=sys.stderr)
    return EXIT_OK


def _parse_occupancy(text: str, n: int) -> dict[int, float]:
    vals = [float(x) for x in text.split(",") if x.strip()]
    if len(vals) != n:
        raise ConfigError(f"--occupancy needs {n} values, got {len(vals)}")
    if any(v < 0 for v in vals):
        raise ConfigError("occupancies must be non-negative")
    return dict(enumerate(vals))


def cmd_coherent(cfg: argparse.Namespace) -> int:
    modes = ModeSystem(cfg.modes, cap=cfg.cap)
    if cfg.phase_variance and not cfg.occupancy:
        raise ConfigError("--phase-variance needs --occupancy")
    occ = _parse_occupancy(cfg.occupancy, modes.n_modes) if cfg.occupancy else None

    space = FockSpace(modes)
    label = CoherentLabel.standard(modes.n_modes)
    psi = space.coherent_state(label)
    eig = {k: (space.annihilation(k) @ psi).max_residual(space.eigenvalue(label, k) * psi)
           for k in range(modes.n_modes)}
    mean, var = space.number_moments(label)
    fluct = (var - mean).max_abs()
    report = {
        "modes": modes.n_modes,
        "state": {format(i, f"0{modes.n_modes}b")[::-1]: str(x) for i, x in psi.items()},
        "eigenvalue_residuals": {str(k): r for k, r in eig.items()},
        "mean_number": str(mean),
        "number_variance": str(var),
        "variance_equals_mean": fluct < ZERO_THRESHOLD,
    }
    ok = all(r < ZERO_THRESHOLD for r in eig.values()) and fluct < ZERO_THRESHOLD

    if cfg.theta is not None:
        rotated = label.rotated(cfg.theta)
        rot_resid = u1_rotate(psi, cfg.theta).max_residual(space.coherent_state(rotated))
        inv_resid = (space.overlap(rotated, rotated) - space.overlap(label, label)).max_abs()
        report["rotation"] = {
            "theta": cfg.theta,
            "state": {format(i, f"0{modes.n_modes}b")[::-1]: str(x)
                      for i, x in space.coherent_state(rotated).items()},
            "rotation_residual": rot_resid,
            "overlap_invariance_residual": inv_resid,
            "overlap_invariant": inv_resid < ZERO_THRESHOLD,
        }
        ok = ok and rot_resid < ZERO_THRESHOLD and inv_resid < ZERO_THRESHOLD

    if occ is not None:
        n_total = substitute_bilinears(mean, occ).real
        try:
            pv = phase_variance(occ)
        except FermicohError as exc:
            raise ConfigError(str(exc)) from None
        report["occupancy"] = {str(k): v for k, v in occ.items()}
        report["mean_number_value"] = n_total
        report["number_variance_value"] = substitute_bilinears(var, occ).real
        report["phase_variance"] = pv
        report["uncertainty_product"] = pv * report["number_variance_value"]

    if cfg.format == "json":
        text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    else:
        text = _coherent_text(report)
    _emit(text, cfg)
    return EXIT_OK if ok else EXIT_FAIL


def _coherent_text(r: dict) -> str:
    lines = [f"coherent state over {r['modes']} mode(s), amplitudes by occupation (mode 1 first):"]
    lines += [f"  |{occ}>: {amp}" for occ, amp in r["state"].items()]
    lines.append("eigenvalue residuals: " + ", ".join(f"a_{int(k) + 1}: {v:.3e}" for k, v in r["eigenvalue_residuals"].items()))
    lines.append(f"<N>      = {r['mean_number']}")
    lines.append(f"<dN^2>   = {r['number_variance']}")
    lines.append(f"<dN^2> == <N>: {r['variance_equals_mean']}")
    if "rotation" in r:
        rot = r["rotation"]
        lines.append(f"rotated by theta = {rot['theta']}:")
        lines += [f"  |{occ}>: {amp}" for occ, amp in rot["state"].items()]
        lines.append(f"  exp(i theta N)|y> vs |e^(i theta) y> residual: {rot['rotation_residual']:.3e}")
        lines.append(f"  overlap invariant: {rot['overlap_invariant']}")
    if "phase_variance" in r:
        occ = ", ".join(f"{int(k) + 1}={v:g}" for k, v in r["occupancy"].items())
        lines.append(f"occupancies: {occ}")
        lines.append(f"<N> = {r['mean_number_value']:.9g}, <dN^2> = {r['number_variance_value']:.9g}")
        lines.append(f"phase variance 1/(4<N>) = {r['phase_variance']:.9g}")
        lines.append(f"<dN^2><dtheta^2> = {r['uncertainty_product']:.9g}")
    return "\n".join(lines) + "\n"


COMMANDS = {"verify": cmd_verify, "spectrum": cmd_spectrum, "coherent": cmd_coherent}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        logging.basicConfig(level=logging.DEBUG if cfg.verbose > 1 else logging.INFO if cfg.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s", stream=sys.stderr)
        log.debug("resolved configuration: %s", vars(cfg))
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, FermicohError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
