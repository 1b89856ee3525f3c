"""Command-line interface.

Subcommands: ``dispersion``, ``simulate-lagrangian``, ``simulate-eulerian``
and ``verify``. Exit codes: 0 ok, 1 configuration error, 2 domain or
positive-definiteness error, 3 simulation blow-up, 4 a verify check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, eulerian1d, lagrangian1d
from .config import RunConfig, load_config
from .conjugate import PhysicalState, to_conjugate
from .errors import CapillaryError, ConfigError, SimulationBlowUp
from .finite_difference import AuditLog
from .presets import choose_dt, eulerian_initial, lagrangian_functional, lagrangian_initial
from .spectral import dispersion_eigs
from .verify import run_verify

log = logging.getLogger("capillary")

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_BLOWUP, EXIT_VERIFY_FAILED = 0, 1, 2, 3, 4


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# dispersion


DISPERSION_HEADER = ["k1", "k2", "k3", "k_norm"] + [f"lambda_{i}" for i in range(1, 9)] + [
    "max_imag",
    "max_residual",
]


def dispersion_table(cfg: RunConfig) -> list[list[float]]:
    eos = cfg.build_eos()
    eq = cfg.equilibrium
    state = PhysicalState.at_rest(eq.rho_e, eq.eta_e, cfg.c, eq.u_e)
    v = to_conjugate(state, eos)
    rows = []
    for k in cfg.dispersion.wave_vectors():
        res = dispersion_eigs(v, k, eos, state.thermo)
        rows.append([*k, np.linalg.norm(k), *res.lambdas, res.max_imag, res.max_residual])
    return rows


def cmd_dispersion(cfg: RunConfig) -> int:
    rows = dispersion_table(cfg)
    if cfg.output.format == "csv":
        text = _csv_text(DISPERSION_HEADER, rows)
    else:
        text = json.dumps([dict(zip(DISPERSION_HEADER, map(float, r))) for r in rows], indent=2) + "\n"
    _emit(text, cfg.output.path)
    return EXIT_OK


# simulations


def _snapshot_path(path: str) -> str:
    return f"{path}.snapshots.csv"


def _coord_name(field) -> str:
    return "x" if isinstance(field, eulerian1d.EulerianField) else "z"


def _write_run(cfg: RunConfig, audit_log: AuditLog, snapshot_columns) -> None:
    names = list(audit_log.columns)
    snaps = audit_log.snapshots
    coord = _coord_name(snaps[0]) if snaps else None
    if cfg.output.format == "json":
        doc = {"audit": audit_log.columns}
        if snaps:
            doc[coord] = getattr(snaps[0], coord).tolist()
            doc["snapshots"] = [
                {"t": s.t, **{name: getattr(s, name).tolist() for name in snapshot_columns}} for s in snaps
            ]
        _emit(json.dumps(doc, indent=2) + "\n", cfg.output.path)
        return

    _emit(_csv_text(names, zip(*(audit_log.columns[n] for n in names))), cfg.output.path)
    if not snaps:
        return
    if cfg.output.path is None:
        log.warning("snapshots requested but no output path given; snapshots not written")
        return
    rows = []
    for idx, s in enumerate(snaps):
        xs = getattr(s, coord)
        cols = [getattr(s, name) for name in snapshot_columns]
        rows.extend([idx, s.t, xs[i], *(col[i] for col in cols)] for i in range(s.n))
    Path(_snapshot_path(cfg.output.path)).write_text(_csv_text(["snapshot", "t", coord, *snapshot_columns], rows))


def _simulate(cfg, field, model, step_bound, run, snapshot_columns) -> int:
    dt = choose_dt(cfg, step_bound(field, model, 0.4), step_bound(field, model, 1.0))
    try:
        _, audit_log = run(
            field,
            model,
            dt,
            cfg.time.T,
            audit_every=cfg.time.audit_every,
            snapshot_every=cfg.output.snapshot_every,
        )
    except SimulationBlowUp as exc:
        log.error("%s", exc)
        if exc.log is not None:
            _write_run(cfg, exc.log, snapshot_columns)
        return EXIT_BLOWUP
    _write_run(cfg, audit_log, snapshot_columns)
    return EXIT_OK


def cmd_simulate_lagrangian(cfg: RunConfig) -> int:
    efun = lagrangian_functional(cfg)
    field = lagrangian_initial(cfg, efun)
    return _simulate(
        cfg,
        field,
        efun,
        lambda f, m, cfl: lagrangian1d.stable_dt(f, m, cfl),
        lagrangian1d.run,
        ("v", "w", "u"),
    )


def cmd_simulate_eulerian(cfg: RunConfig) -> int:
    eos = cfg.build_eos()
    field = eulerian_initial(cfg, eos)
    return _simulate(
        cfg,
        field,
        eos,
        lambda f, m, cfl: eulerian1d.stable_dt(f, m, cfl),
        eulerian1d.run,
        ("rho", "eta", "j", "w"),
    )


def cmd_verify(cfg: RunConfig) -> int:
    report = run_verify(cfg)
    _emit(report.to_json(), cfg.output.path)
    for check in report.checks:
        if check.status != "pass":
            log.error("check failed: %s (worst %r, tolerance %r) %s", check.name, check.worst_value,
                      check.tolerance, check.detail)
    return EXIT_OK if report.status == "pass" else EXIT_VERIFY_FAILED


COMMANDS = {
    "dispersion": cmd_dispersion,
    "simulate-lagrangian": cmd_simulate_lagrangian,
    "simulate-eulerian": cmd_simulate_eulerian,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capillary", description="Dispersion analysis and 1-D simulation of capillary (Korteweg) fluids."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file (defaults apply if omitted)")
    common.add_argument("--output", help="output path; stdout if omitted")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--seed", type=int, help="seed for randomised suites")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "dispersion": "frequencies of the symmetric form along a wave-vector ray",
        "simulate-lagrangian": "nonlinear 1-D run in mass-Lagrangian coordinates",
        "simulate-eulerian": "nonlinear 1-D run of the augmented Eulerian system",
        "verify": "run the invariant suite and write a JSON report",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    out = cfg.output
    if args.output is not None:
        out = replace(out, path=args.output)
    if args.format is not None:
        out = replace(out, format=args.format)
    cfg = replace(cfg, output=out)
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = replace(cfg, seed=args.seed)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="capillary: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    logging.captureWarnings(True)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except CapillaryError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
