"""Command-line front end for brittlehom experiments."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .brittle_ms import DEFAULT_SEED, MinimizeOptions, brute_force_min
from .cell_tensor import cell_lattice, effective_tensor
from .errors import BrittlehomError, ConfigError, ResolutionTooCoarse, SolverError
from .fixtures import (
    Fixture,
    read_geometry,
    regen_oracle,
    shipped_fixtures,
    verify_fixture,
)
from .geometry import Geometry
from .homogenize import (
    RegimeSchedule,
    appendix_verify,
    estimate_fhom,
    homogeneity_probe,
    regime_sweep,
    small_load_ratio,
)
from .output import dumps, write_csv, write_json, write_trace
from .solver import ConductanceField, solve_corrector

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s :: %(levelname)s :: %(name)s :: %(message)s"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INVALID = 2
EXIT_SOLVER = 3


def parse_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"Expected comma-separated numbers, got {text!r}") from e


def parse_ints(text: str) -> list[int]:
    values = parse_floats(text)
    if any(v != int(v) for v in values):
        raise ConfigError(f"Expected comma-separated integers, got {text!r}")
    return [int(v) for v in values]


def parse_xi(text: str) -> np.ndarray:
    values = parse_floats(text)
    if len(values) != 2:
        raise ConfigError(f"xi must be two comma-separated decimals, got {text!r}")
    return np.array(values)


def _increasing(values: Sequence[float]) -> bool:
    return all(b > a for a, b in zip(values, values[1:]))


@dataclass
class RunConfig:
    """Validated arguments of one CLI invocation."""

    command: str
    geom_path: Path | None = None
    fixture_paths: list[Path] = field(default_factory=list)
    xi: np.ndarray | None = None
    m: int = 32
    t_list: list[int] = field(default_factory=list)
    eps_list: list[float] = field(default_factory=list)
    lambdas: list[float] = field(default_factory=list)
    beta_list: list[float] = field(default_factory=list)
    small_loads: list[float] = field(default_factory=list)
    p: float = 1.0
    c: float = 1.0
    beta: float = 1.0
    t: int = 1
    exact: bool = False
    out: Path | None = None
    trace_csv: Path | None = None
    residual_csv: Path | None = None
    regen_oracle: bool = False
    options: MinimizeOptions = field(default_factory=MinimizeOptions)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        """
        Build and validate a configuration from parsed arguments.

        Raises:
            ConfigError: If any field violates the preconditions of its command.
        """

        def get(name: str, default: Any = None) -> Any:
            return getattr(args, name, default)

        def path(name: str) -> Path | None:
            return Path(get(name)) if get(name) else None

        config = cls(
            command=args.command,
            geom_path=path("geom"),
            fixture_paths=[Path(p) for p in (get("fixture") or [])],
            m=get("m", 32),
            p=get("p", 1.0),
            c=get("c", 1.0),
            beta=get("beta_cell", 1.0),
            t=get("t_cell", 1),
            exact=bool(get("exact", False)),
            out=path("out"),
            trace_csv=path("trace_csv"),
            residual_csv=path("residual_csv"),
            regen_oracle=bool(get("regen_oracle", False)),
            options=MinimizeOptions(
                starts=get("starts", 4),
                max_outer=get("max_outer", 50),
                seed=get("seed", DEFAULT_SEED),
            ),
        )
        if get("xi") is not None:
            config.xi = parse_xi(args.xi)
        if get("t") is not None:
            config.t_list = parse_ints(args.t)
        if get("eps") is not None:
            config.eps_list = parse_floats(args.eps)
        if get("lambdas") is not None:
            config.lambdas = parse_floats(args.lambdas)
        if get("betas") is not None:
            config.beta_list = parse_floats(args.betas)
        if get("small_loads") is not None:
            config.small_loads = parse_floats(args.small_loads)

        errors = config.validate()
        if errors:
            raise ConfigError("; ".join(errors))
        return config

    def validate(self) -> list[str]:
        """Check every field against the preconditions of the command."""
        errors = []
        if self.m < 4:
            errors.append(f"--m must be >= 4, got {self.m}")
        if self.command == "fhom":
            ts = self.t_list
            if len(ts) < 2 or ts[0] < 1 or not _increasing(ts):
                errors.append(f"--t must be increasing integers >= 1, got {ts}")
            loads = self.small_loads
            if loads and (loads[-1] <= 0 or not _increasing(loads[::-1])):
                errors.append(
                    f"--small-loads must be positive and decreasing, got {loads}"
                )
            if loads and not np.any(self.xi):
                errors.append("--small-loads needs a nonzero --xi direction")
        if self.command == "sweep":
            if not self.eps_list or any(e <= 0 or e > 1 for e in self.eps_list):
                errors.append(f"--eps must be 1/t in (0, 1], got {self.eps_list}")
            if self.p <= 0 or self.c <= 0:
                errors.append(f"--p and --c must be positive, got {self.p}, {self.c}")
            if self.beta <= 0:
                errors.append(f"--beta must be positive, got {self.beta}")
        if self.command == "probe-homogeneity":
            if not self.lambdas or any(lam <= 0 for lam in self.lambdas):
                errors.append(f"--lambdas must be positive, got {self.lambdas}")
        if self.command in ("probe-homogeneity", "appendix") and self.t < 1:
            errors.append(f"--t must be >= 1, got {self.t}")
        if self.command == "appendix":
            bs = self.beta_list
            if not bs or bs[-1] <= 0 or not _increasing(bs[::-1]):
                errors.append(f"--betas must be positive and decreasing, got {bs}")
        if self.command == "oracle" and not self.fixture_paths:
            errors.append("oracle needs at least one --fixture")
        return errors

    def geometry(self) -> Geometry:
        """Load the geometry and check the grid resolution against its margin."""
        geom = read_geometry(self.geom_path)
        if self.m * geom.delta < 2.0 - 1e-12:
            raise ResolutionTooCoarse(
                f"m * delta = {self.m * geom.delta:g} < 2 "
                f"for m={self.m}, delta={geom.delta}"
            )
        return geom


def _emit(config: RunConfig, data: dict[str, Any]) -> None:
    if config.out is not None:
        write_json(config.out, data)
        logger.info("Wrote %s", config.out)
    else:
        sys.stdout.write(dumps(data))


def run_cell_tensor(config: RunConfig) -> int:
    geom = config.geometry()
    tensor = effective_tensor(geom, config.m)
    _emit(config, tensor.to_dict())
    if config.residual_csv is not None:
        lat = cell_lattice(geom, config.m)
        cond = ConductanceField.subcritical(lat)
        w = solve_corrector(lat, cond, [1.0, 0.0], history=True)
        write_csv(
            config.residual_csv,
            ["iteration", "relative_residual"],
            enumerate(w.residuals),
        )
    return EXIT_OK


def run_fhom(config: RunConfig) -> int:
    geom = config.geometry()
    report = estimate_fhom(geom, config.xi, config.t_list, config.m, config.options)
    data = report.to_dict()
    if config.small_loads:
        data["small_load_ratio"] = small_load_ratio(
            geom,
            config.xi,
            config.small_loads,
            config.t_list[0],
            config.m,
            config.options,
        )
    _emit(config, data)
    if config.trace_csv is not None:
        write_trace(
            config.trace_csv,
            [r.trace_row() for r in report.records],
        )
    return EXIT_OK


def run_probe(config: RunConfig) -> int:
    report = homogeneity_probe(
        config.geometry(),
        config.xi,
        config.lambdas,
        config.t,
        config.m,
        config.options,
        exact=config.exact,
    )
    _emit(config, report.to_dict())
    return EXIT_OK


def run_sweep(config: RunConfig) -> int:
    schedule = RegimeSchedule(p=config.p, c=config.c)
    report = regime_sweep(
        config.geometry(),
        config.xi,
        schedule,
        config.eps_list,
        config.m,
        config.options,
        beta=config.beta,
    )
    _emit(config, report.to_dict())
    if config.trace_csv is not None:
        write_trace(
            config.trace_csv,
            [pt.trace_row() for pt in report.points],
        )
    return EXIT_OK


def run_appendix(config: RunConfig) -> int:
    report = appendix_verify(
        config.geometry(),
        config.xi,
        config.beta_list,
        config.m,
        config.options,
        t=config.t,
    )
    _emit(config, report.to_dict())
    return EXIT_OK


def run_oracle(config: RunConfig) -> int:
    results = {}
    for path in config.fixture_paths:
        fixture = Fixture.load(path)
        if config.regen_oracle:
            regen_oracle(fixture).save(path)
            logger.info("Regenerated oracle totals in %s", path)
            results[fixture.name] = fixture.expected
        else:
            results[fixture.name] = {
                repr(w): brute_force_min(fixture.ms_problem(w)).to_dict()
                for w in fixture.surface_weights
            }
    _emit(config, results)
    return EXIT_OK


def run_verify(config: RunConfig) -> int:
    paths = config.fixture_paths or shipped_fixtures()
    violations = {}
    for path in paths:
        fixture = Fixture.load(path)
        violations[fixture.name] = verify_fixture(fixture, config.options)
    _emit(config, {"violations": violations})
    failed = [msg for msgs in violations.values() for msg in msgs]
    for msg in failed:
        print(f"violation: {msg}", file=sys.stderr)
    return EXIT_VIOLATION if failed else EXIT_OK


HANDLERS = {
    "cell-tensor": run_cell_tensor,
    "fhom": run_fhom,
    "probe-homogeneity": run_probe,
    "sweep": run_sweep,
    "appendix": run_appendix,
    "oracle": run_oracle,
    "verify": run_verify,
}


def _common(p: argparse.ArgumentParser, geom: bool = True, xi: bool = True) -> None:
    if geom:
        p.add_argument("--geom", required=True, help="Geometry or fixture JSON")
        p.add_argument("--m", type=int, default=32, help="Grid nodes per cell axis")
    if xi:
        p.add_argument("--xi", required=True, help="Affine slope as 'x,y'")
    p.add_argument("--out", help="Output JSON path (stdout if omitted)")
    p.add_argument("--starts", type=int, default=4, help="Minimizer starts")
    p.add_argument("--max-outer", type=int, default=50, help="Outer iterations")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Random-start seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brittlehom",
        description="Homogenization experiments for media with brittle inclusions.",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity (default WARNING)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cell-tensor", help="Effective tensor A0 of the perforated cell")
    _common(p, xi=False)
    p.add_argument("--residual-csv", help="CG residual history of f0(e1)")

    p = sub.add_parser("fhom", help="Estimate f_hom(xi) with its bounds")
    _common(p)
    p.add_argument("--t", required=True, help="Cell sizes, e.g. '1,2,4'")
    p.add_argument("--trace-csv", help="Per-t trace CSV")
    p.add_argument(
        "--small-loads", help="Decreasing |xi| for the g/|xi|^2 table, e.g. '1,0.5'"
    )

    p = sub.add_parser("probe-homogeneity", help="E(lambda xi) against lambda^2 E(xi)")
    _common(p)
    p.add_argument("--lambdas", required=True, help="Scale factors, e.g. '0.5,2,4'")
    p.add_argument("--t", dest="t_cell", type=int, default=1, help="Cell size")
    p.add_argument("--exact", action="store_true", help="Use the exhaustive oracle")

    p = sub.add_parser("sweep", help="Toughness regime sweep over eps = 1/t")
    _common(p)
    p.add_argument("--eps", required=True, help="Values 1/t, e.g. '0.5,0.25'")
    p.add_argument("--p", type=float, required=True, help="Exponent of alpha(eps)")
    p.add_argument("--c", type=float, default=1.0, help="Prefactor of alpha(eps)")
    p.add_argument("--beta", dest="beta_cell", type=float, default=1.0)
    p.add_argument("--trace-csv", help="Per-eps trace CSV")

    p = sub.add_parser("appendix", help="Crack-budgeted minima vs the intact energy")
    _common(p)
    p.add_argument("--betas", required=True, help="Decreasing crack budgets")
    p.add_argument("--t", dest="t_cell", type=int, default=1, help="Cell size")

    p = sub.add_parser("oracle", help="Exhaustive minima of fixture problems")
    _common(p, geom=False, xi=False)
    p.add_argument("--fixture", action="append", required=True)
    p.add_argument("--regen-oracle", action="store_true", help="Rewrite totals")

    p = sub.add_parser("verify", help="Invariant suite on the shipped fixtures")
    _common(p, geom=False, xi=False)
    p.add_argument("--fixture", action="append", help="Fixture JSON (default: shipped)")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one command and map failures to exit statuses."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    try:
        config = RunConfig.from_args(args)
        return HANDLERS[config.command](config)
    except SolverError as e:
        print(f"error: solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except (BrittlehomError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
