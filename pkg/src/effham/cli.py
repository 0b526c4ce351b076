"""Command-line front end: ``effham [command] --config run.json --output outdir``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .bath import Drude, OhmicExp, QuadratureError
from .config import COMMANDS, ConfigError, RunConfig, load_config
from .oracle import (
    DimensionCapError,
    DiscreteBathSim,
    MapSingularityError,
    TruncationError,
    generator_from_map,
    oracle_compare,
    simulate_map,
)
from .perturbation import Expansion, observables_to_csv, report_observables
from .quadrature import QuadratureScheme
from .splitting import NotHTPError, haar_mc_effective_hamiltonian, split
from .superop import (
    check_htp,
    lindblad_generator,
    operator_from_json,
    operator_to_json,
    superop_dim,
    superop_from_json,
)

EXIT_OK, EXIT_USAGE, EXIT_GENERATOR, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("effham")


class GeneratorError(ValueError):
    """Malformed or non-HTP generator input."""


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _generator_from_config(cfg: RunConfig) -> tuple[np.ndarray, list]:
    gen = cfg.raw.get("generator")
    if gen is None:
        raise ConfigError("command 'split' needs a 'generator' section")
    notes = []
    try:
        if "superoperator" in gen:
            L = superop_from_json(gen["superoperator"])
            superop_dim(L)
        else:
            lb = gen["lindblad"]
            h = operator_from_json(lb.get("hamiltonian", {"dim": 2, "re": [0] * 4, "im": [0] * 4}))
            jumps = [(float(j["rate"]), operator_from_json(j["op"])) for j in lb.get("jumps", [])]
            L = lindblad_generator(h, jumps)
            for n, (rate, op) in enumerate(jumps):
                tr = np.trace(op) / op.shape[0]
                if abs(tr) > 0:
                    notes.append(
                        f"jump {n}: trace part {tr.real:.6g}{tr.imag:+.6g}j removed; "
                        "its cross terms with the traceless part move into K"
                    )
            if abs(np.trace(h)) > 0:
                notes.append("Hamiltonian trace removed (K is traceless)")
    except (KeyError, TypeError, ValueError) as exc:
        raise GeneratorError(f"malformed generator: {exc}") from exc
    return L, notes


def cmd_split(cfg: RunConfig, out: Path) -> None:
    L, notes = _generator_from_config(cfg)
    chk = check_htp(L)
    if not chk:
        raise NotHTPError(chk)
    result = split(L)
    doc = result.to_json()
    doc["htp_residuals"] = {"hermiticity": chk.hermiticity_residual, "trace": chk.trace_residual}
    if notes:
        doc["notes"] = notes
    _write_json(out / "split.json", doc)
    log.info("K = %s", np.array2string(result.k, precision=6))
    mc = cfg.raw.get("mc")
    if mc:
        est, err = haar_mc_effective_hamiltonian(L, samples=mc["samples"], seed=mc.get("seed", 0))
        ratio = np.abs(est - result.k) / np.maximum(err, 1e-12)
        _write_json(out / "mc_check.json", {
            "samples": mc["samples"],
            "seed": mc.get("seed", 0),
            "estimate": operator_to_json(est),
            "stderr": {"dim": int(err.shape[0]), "re": err.reshape(-1).tolist()},
            "max_stderr_multiple": float(ratio.max()),
        })


def _expansion(cfg: RunConfig, model=None, bath=None) -> tuple[Expansion, np.ndarray]:
    model = model or cfg.model()
    bath = bath or cfg.bath()
    T, h, times = cfg.time_grid()
    log.info("tabulating the bath correlation on %d steps", int(round(T / h)))
    engine = Expansion(model, bath, T, QuadratureScheme(h))
    return engine, times


def _run_expand(cfg: RunConfig, out: Path, model=None, bath=None) -> dict:
    engine, times = _expansion(cfg, model, bath)
    series = engine.series(times, cfg.max_order)
    series.to_csv(out / "kseries.csv")
    obs = report_observables(series)
    observables_to_csv(obs, out / "observables.csv")
    return obs


def cmd_expand(cfg: RunConfig, out: Path) -> None:
    _run_expand(cfg, out)


def cmd_oracle(cfg: RunConfig, out: Path) -> None:
    model = cfg.model()
    bath = cfg.bath()
    cutoff = cfg.raw.get("oracle", {}).get("fock_cutoff", 8)
    try:
        sim = DiscreteBathSim.from_bath(bath, cutoff)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    T, h, times = cfg.time_grid()
    quad = QuadratureScheme(h)
    runs = []
    for m in (model, model.with_lambda(model.lam / 2)):
        maps = simulate_map(sim, m, times)
        generator_from_map(maps)
        ks = Expansion(m, bath, T, quad).series(times, cfg.max_order)
        runs.append((maps, ks))
    half = runs[1] if model.lam != 0 else (None, None)
    report = oracle_compare(runs[0][0], runs[0][1], *half)
    report.meta = {
        "fock_cutoff": cutoff,
        "total_dim": sim.total_dim,
        "truncation_change": runs[0][0].truncation_change,
        "h": h,
        "max_order": cfg.max_order,
    }
    if report.exponents is None:
        report.meta["scaling_exponents"] = None
    report.to_json(out / "oracle_report.json")
    report.to_csv(out / "oracle_scaling.csv")


def _swept(cfg: RunConfig, parameter: str, value: float):
    model, bath = cfg.model(), cfg.bath()
    if parameter == "lambda":
        return model.with_lambda(value), bath
    if parameter == "beta":
        return model, dataclasses.replace(bath, beta=value if value > 0 else math.inf)
    j = bath.j
    if isinstance(j, OhmicExp):
        return model, dataclasses.replace(bath, j=OhmicExp(j.alpha, value))
    if isinstance(j, Drude):
        return model, dataclasses.replace(bath, j=Drude(j.reorganization, value))
    raise ConfigError("omega_c sweeps need an ohmic_exp or drude bath")


def cmd_sweep(cfg: RunConfig, out: Path) -> None:
    sw = cfg.raw.get("sweep")
    if not sw or not sw["values"]:
        raise ConfigError("sweep needs a non-empty 'sweep.values' axis")
    rows = []
    for i, value in enumerate(sw["values"]):
        sub = out / f"{sw['parameter']}_{i:03d}"
        sub.mkdir(parents=True, exist_ok=True)
        model, bath = _swept(cfg, sw["parameter"], float(value))
        obs = _run_expand(cfg, sub, model, bath)
        rows.append([float(value), obs["t"][-1], obs["omega_r"][-1], obs["kx"][-1], obs["ky"][-1],
                     obs["rotation_angle"][-1]])
    with open(out / "sweep_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([sw["parameter"], "t_final", "omega_r", "kx", "ky", "rotation_angle"])
        for r in rows:
            w.writerow([f"{x:.17g}" for x in r])


COMMAND_TABLE = {"split": cmd_split, "expand": cmd_expand, "oracle": cmd_oracle, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="effham", description="Minimal-dissipation effective Hamiltonians.")
    p.add_argument("command", nargs="?", choices=COMMANDS, help="overrides/must match the config command")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--output", help="output directory (default: config 'output' or '.')")
    p.add_argument("--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command and args.command != cfg.command:
            raise ConfigError(f"command {args.command!r} does not match config command {cfg.command!r}")
        out = Path(args.output or cfg.output or ".")
        out.mkdir(parents=True, exist_ok=True)
        log.info("running %s into %s", cfg.command, out)
        COMMAND_TABLE[cfg.command](cfg, out)
    except ConfigError as exc:
        print(f"effham: usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except NotHTPError as exc:
        print(f"effham: invalid generator: {exc}", file=sys.stderr)
        return EXIT_GENERATOR
    except GeneratorError as exc:
        print(f"effham: invalid generator: {exc}", file=sys.stderr)
        return EXIT_GENERATOR
    except (TruncationError, MapSingularityError, DimensionCapError, QuadratureError, MemoryError, np.linalg.LinAlgError) as exc:
        print(f"effham: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"effham: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
