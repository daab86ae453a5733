"""``starprod`` command line.

Every run command writes its artifacts plus ``<command>.manifest.json`` into
``--out`` and exits 0 when the largest residual is within tolerance, 2 on an
invalid configuration or missing input, and 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .artifacts import (
    build_manifest,
    load_tensor_json,
    manifest_rows,
    read_manifest,
    write_field_csv,
    write_field_json,
    write_manifest,
)
from .dynamics import heisenberg_evolve
from .errors import ConfigError, DomainError, NumericalCheckFailed, StarprodError, TruncationError
from .fock import FockSpace, Operator, StateSpec, build_ladder, make_state, number_operator
from .framework import (
    LabelGrid,
    QuantizerPair,
    SymbolField,
    intertwine,
    star_kernel,
    star_via_kernel,
    star_via_operators,
    symbol_field,
    trace_power,
)
from .maps import VALID_MAPS, pair_from_name
from .maps.phase_space import SOrderedPair, purity_via_kernel
from .maps.tomography import (
    TomographicPair,
    angle_frames,
    tomo_grid,
    tomo_star_via_kernel,
    tomogram_of_state,
)
from .settings import get_settings
from .structures import assoc_check, builtin_tensor, lie_jacobi_check, random_triple_check

logger = logging.getLogger(__name__)

COMMANDS = (
    "symbol",
    "tomogram",
    "star-check",
    "kernel-check",
    "evolve",
    "purity",
    "assoc-verify",
    "intertwine",
)
OBSERVABLES = ("q", "p", "state")
AxisRange = Tuple[float, float, int]


def parse_range(text: str) -> AxisRange:
    """``lo:hi:n`` -> (lo, hi, n)."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError("grid", f"expected lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError("grid", f"expected lo:hi:n with numbers, got {text!r}") from None
    if n < 1 or not hi > lo:
        raise ConfigError("grid", f"needs hi > lo and n >= 1, got {text!r}")
    return lo, hi, n


@dataclass(frozen=True)
class RunConfig:
    command: str
    dim: int
    map: str
    grid: Tuple[AxisRange, ...]
    state: StateSpec
    out: Path
    seed: Optional[int]
    samples: Optional[int]
    tolerance: float

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        if args.dim < 2:
            raise ConfigError("dim", f"must be an integer >= 2, got {args.dim}")
        kind = str(args.map).partition(":")[0].lower()
        if kind not in VALID_MAPS:
            raise ConfigError("map", f"must be one of {VALID_MAPS}, got {args.map!r}")
        try:
            state = StateSpec.parse(args.state)
        except DomainError as exc:
            raise ConfigError("state", str(exc)) from None
        if args.samples is not None and args.samples < 1:
            raise ConfigError("samples", f"must be >= 1, got {args.samples}")
        tolerance = args.tolerance
        if tolerance is None:
            check = "tomo-kernel-check" if args.command == "kernel-check" and kind == "tomographic" else args.command
            tolerance = get_settings().check_tolerance(check)
        if not tolerance > 0:
            raise ConfigError("tolerance", f"must be > 0, got {tolerance}")
        return cls(
            command=args.command,
            dim=int(args.dim),
            map=str(args.map),
            grid=tuple(parse_range(g) for g in (args.grid or [])),
            state=state,
            out=Path(args.out),
            seed=args.seed,
            samples=args.samples,
            tolerance=float(tolerance),
        )

    def space(self) -> FockSpace:
        return FockSpace(self.dim)

    def pair(self, name: Optional[str] = None) -> QuantizerPair:
        return pair_from_name(name or self.map, self.space())

    def rho(self) -> Operator:
        try:
            return make_state(self.space(), self.state)
        except (TruncationError, DomainError) as exc:
            raise ConfigError("state", str(exc)) from None

    def label_grid(self, pair: QuantizerPair, ranges: Optional[Sequence[AxisRange]] = None) -> LabelGrid:
        ranges = tuple(self.grid if ranges is None else ranges)
        if not ranges or pair.name == "matrix":
            return pair.default_grid()
        if isinstance(pair, TomographicPair):
            return tomo_grid(ranges[0], angle_frames(int(get_settings().grids.get("tomographic_angles", 8))))
        if len(ranges) == 1:
            ranges = ranges * pair.label_dim
        if len(ranges) != pair.label_dim:
            raise ConfigError("grid", f"{pair.name} needs {pair.label_dim} ranges, got {len(ranges)}")
        return LabelGrid.rectangular(ranges, pair.axes)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(0 if self.seed is None else self.seed)

    def parameters(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "map": self.map,
            "grid": [list(r) for r in self.grid],
            "state": str(self.state),
            "samples": self.samples,
        }


@dataclass
class Outcome:
    residuals: Dict[str, float]
    artifacts: List[Path] = field(default_factory=list)
    parameters: Dict[str, Any] = field(default_factory=dict)


def _artifact(config: RunConfig, suffix: str) -> Path:
    return config.out / f"{config.command}{suffix}"


# ----------------------------------------------------------------------------- commands


def _symbol(config: RunConfig, args: argparse.Namespace) -> Outcome:
    pair = config.pair()
    if isinstance(pair, TomographicPair):
        return _tomogram(config, args)
    rho = config.rho()
    field_ = symbol_field(rho, pair, config.label_grid(pair))
    csv = write_field_csv(field_, _artifact(config, ".csv"))
    meta = write_field_json(field_, _artifact(config, ".json"), {"map": pair.name, "state": str(config.state)})
    integral = pair.trace_from_symbol(field_)
    residual = abs(integral - rho.trace())
    return Outcome({"normalization": residual}, [csv, meta], {"integral": integral})


def _tomogram(config: RunConfig, args: argparse.Namespace) -> Outcome:
    pair = config.pair()
    if not isinstance(pair, TomographicPair):
        pair = config.pair("tomographic")
    rho = config.rho()
    tomogram = tomogram_of_state(rho, config.label_grid(pair), pair=pair)
    csv = write_field_csv(tomogram, _artifact(config, ".csv"))
    meta = write_field_json(tomogram, _artifact(config, ".json"))
    integrals = tomogram.x_integrals()["value"].to_numpy()
    residuals = {
        "normalization": float(np.max(np.abs(integrals - 1.0))),
        "negativity": float(max(0.0, -np.min(tomogram.values.real))),
    }
    return Outcome(residuals, [csv, meta], {"delta_width": pair.delta_width})


def _random_labels(pair: QuantizerPair, rng: np.random.Generator, count: int) -> np.ndarray:
    if pair.name == "matrix":
        return rng.integers(0, pair.space.dim, size=(count, 2)).astype(float)
    if isinstance(pair, SOrderedPair) and not pair.weyl_coordinates:
        radius = rng.uniform(0.0, 0.8, size=count)
        angle = rng.uniform(0.0, 2.0 * np.pi, size=count)
        return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
    return rng.uniform(-1.0, 1.0, size=(count, pair.label_dim))


def _star_check(config: RunConfig, args: argparse.Namespace) -> Outcome:
    pair = config.pair()
    if not pair.has_closed_kernel:
        raise ConfigError("map", f"{pair.name} has no closed-form two-symbol kernel; use kernel-check")
    rng = config.rng()
    count = config.samples or 20
    first, second, out = (_random_labels(pair, rng, count) for _ in range(3))
    closed = np.array([pair.two_symbol_kernel(a, b, c) for a, b, c in zip(first, second, out)], dtype=complex)
    rows = {"closed": closed}
    residuals: Dict[str, float] = {}
    if isinstance(pair, SOrderedPair):
        oracle = np.array([pair.gaussian_kernel([a, b], c) for a, b, c in zip(first, second, out)])
        rows["gaussian"] = oracle
        residuals["gaussian"] = float(np.max(np.abs(closed - oracle)))
    if not isinstance(pair, SOrderedPair) or pair.fock_trace_converges(2):
        trace = np.array([star_kernel(pair, [a, b], c) for a, b, c in zip(first, second, out)])
        rows["fock"] = trace
        residuals["fock"] = float(np.max(np.abs(closed - trace)))
    table = pd.DataFrame({"sample": np.arange(count)})
    for name, values in rows.items():
        table[f"{name}_re"] = values.real
        table[f"{name}_im"] = values.imag
    path = _artifact(config, ".csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format=get_settings().csv_float_format, lineterminator="\n")
    return Outcome(residuals, [path])


def _inner_nodes(grid: LabelGrid, rng: np.random.Generator, count: int) -> LabelGrid:
    extent = np.max(np.abs(grid.points), axis=0)
    inner = np.nonzero(np.all(np.abs(grid.points) <= 0.5 * extent, axis=1))[0]
    pick = np.sort(rng.choice(inner, size=min(count, len(inner)), replace=False))
    return LabelGrid.from_points(grid.points[pick], grid.weights[pick], grid.axes)


def _kernel_check(config: RunConfig, args: argparse.Namespace) -> Outcome:
    pair = config.pair()
    rho = config.rho()
    rng = config.rng()
    count = config.samples or 8
    if isinstance(pair, TomographicPair):
        lo, hi, n = config.grid[0] if config.grid else (-6.0, 6.0, 21)
        lattice = np.linspace(lo, hi, n)
        outs = np.array([[x, 0.7, 0.7] for x in np.linspace(-2.0, 2.0, count)])
        via_kernel = tomo_star_via_kernel([rho, rho], pair, outs, lattice)
        out_grid = LabelGrid.from_points(outs, axes=pair.axes)
        via_ops = star_via_operators(rho, rho, pair, out_grid)
        kernel_field = SymbolField(out_grid, via_kernel)
    else:
        grid = config.label_grid(pair)
        out_grid = grid if pair.name == "matrix" else _inner_nodes(grid, rng, count)
        f = symbol_field(rho, pair, grid)
        kernel_field = star_via_kernel(f, f, pair, out_grid)
        via_ops = star_via_operators(rho, rho, pair, out_grid)
    path = write_field_csv(kernel_field, _artifact(config, ".csv"))
    return Outcome({"kernel_vs_operator": kernel_field.sup_distance(via_ops)}, [path])


def _observable(config: RunConfig, name: str) -> Operator:
    ladder = build_ladder(config.space())
    if name == "q":
        return ladder.q
    if name == "p":
        return ladder.p
    return config.rho()


def _evolve(config: RunConfig, args: argparse.Namespace) -> Outcome:
    pair = config.pair()
    H = number_operator(config.space())
    A0 = _observable(config, args.observable)
    result = heisenberg_evolve(A0, H, pair, args.t_final, args.dt, config.label_grid(pair))
    path = _artifact(config, ".csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    result.to_frame().to_csv(path, index=False, float_format=get_settings().csv_float_format, lineterminator="\n")
    return Outcome(
        {"rk4_vs_exact": result.max_deviation()},
        [path],
        {"observable": args.observable, "t_final": args.t_final, "dt": args.dt},
    )


def _purity(config: RunConfig, args: argparse.Namespace) -> Outcome:
    pair = config.pair()
    rho = config.rho()
    order = args.order
    exact = np.trace(np.linalg.matrix_power(rho.entries, order))
    grid = config.label_grid(pair)
    if isinstance(pair, SOrderedPair) and not pair.weyl_coordinates and order == 2 and pair.order.s > 0:
        value, method = purity_via_kernel(rho, pair.order, grid), "purity-kernel"
    else:
        result = trace_power(rho, pair, order, grid, seed=config.seed, samples=config.samples)
        value, method = result.value, result.method
    return Outcome(
        {"trace_power": abs(value - exact)},
        [],
        {"order": order, "method": method, "value": complex(value), "exact": complex(exact)},
    )


def _assoc_verify(config: RunConfig, args: argparse.Namespace) -> Outcome:
    spec = args.tensor
    if spec.startswith("builtin:"):
        try:
            tensor = builtin_tensor(spec.partition(":")[2])
        except DomainError as exc:
            raise ConfigError("tensor", str(exc)) from None
    else:
        tensor = load_tensor_json(spec)
    if args.lie:
        jacobi = lie_jacobi_check(tensor, config.tolerance)
        return Outcome({"jacobi": jacobi.max_residual}, [], {"tensor": spec, "n": tensor.n, "lie": True})
    assoc = assoc_check(tensor, config.tolerance)
    triples = random_triple_check(tensor, config.samples or 100, 0 if config.seed is None else config.seed)
    return Outcome(
        {"assoc": assoc.max_residual, "random_triples": triples.max_residual},
        [],
        {"tensor": spec, "n": tensor.n, "lie": False},
    )


def _intertwine(config: RunConfig, args: argparse.Namespace) -> Outcome:
    source = config.pair()
    target = config.pair(args.target)
    rho = config.rho()
    f_source = symbol_field(rho, source, config.label_grid(source))
    target_ranges = [parse_range(g) for g in (args.target_grid or [])]
    target_grid = config.label_grid(target, target_ranges)
    result = intertwine(f_source, source, target, target_grid)
    direct = symbol_field(rho, target, target_grid)
    path = write_field_csv(result.field, _artifact(config, ".csv"))
    return Outcome(
        {"intertwined_vs_direct": result.field.sup_distance(direct)},
        [path],
        {"target": args.target, "reconstruction_residual": result.reconstruction_residual},
    )


HANDLERS: Dict[str, Callable[[RunConfig, argparse.Namespace], Outcome]] = {
    "symbol": _symbol,
    "tomogram": _tomogram,
    "star-check": _star_check,
    "kernel-check": _kernel_check,
    "evolve": _evolve,
    "purity": _purity,
    "assoc-verify": _assoc_verify,
    "intertwine": _intertwine,
}


# ----------------------------------------------------------------------------- report


def _report(args: argparse.Namespace) -> int:
    if not args.manifests:
        print("report: no manifests given", file=sys.stderr)
        return 2
    try:
        manifests = [read_manifest(p) for p in args.manifests]
    except FileNotFoundError as exc:
        print(f"report: missing manifest: {exc.filename}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"report: {exc}", file=sys.stderr)
        return 2
    table = manifest_rows(manifests)
    table["status"] = np.where(table["passed"], "PASS", "FAIL")
    table = table.sort_values(["command", "map", "check", "dim", "run"], kind="stable").reset_index(drop=True)
    # residual at the previous (smaller) dim over residual at this dim
    previous = table.groupby(["command", "map", "check"], dropna=False)["residual"].shift(1)
    table["convergence"] = previous / table["residual"].where(table["residual"] > 0)
    print(table.drop(columns=["passed"]).to_string(index=False))
    overall = bool(all(m["passed"] for m in manifests))
    print("PASS" if overall else "FAIL")
    if args.out is not None:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        table.to_json(out, orient="records", indent=2)
    return 0 if overall else 3


# ----------------------------------------------------------------------------- entry point


def _attach_values(argv: Sequence[str], options: Sequence[str]) -> List[str]:
    """Glue ``--grid -6:6:64`` into ``--grid=-6:6:64`` so negative ranges parse."""
    out: List[str] = []
    tokens = list(argv)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token in options and i + 1 < len(tokens):
            out.append(f"{token}={tokens[i + 1]}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def _parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=24, help="Fock truncation dimension")
    common.add_argument("--map", default="weyl", help="weyl | sordered:S | tomographic[:DELTA] | matrix")
    common.add_argument("--grid", action="append", help="label range lo:hi:n (repeat per axis)")
    common.add_argument("--state", default="coherent:0.5", help="fock:N | coherent:ALPHA | thermal:NBAR")
    common.add_argument("--out", type=Path, default=Path("starprod-out"), help="artifact directory")
    common.add_argument("--seed", type=int, help="seed for sampled checks and Monte-Carlo quadrature")
    common.add_argument("--samples", type=int, help="sample count for sampled checks")
    common.add_argument("--tolerance", type=float, help="override the command's default tolerance")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="starprod",
        description="Operator symbols, star-products and their numerical checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("symbol", "tomogram", "star-check", "kernel-check"):
        sub.add_parser(name, parents=[common])
    evolve = sub.add_parser("evolve", parents=[common])
    evolve.add_argument("--observable", choices=OBSERVABLES, default="q")
    evolve.add_argument("--t-final", dest="t_final", type=float, default=2.0 * np.pi)
    evolve.add_argument("--dt", type=float, default=1e-2)
    purity = sub.add_parser("purity", parents=[common])
    purity.add_argument("--order", type=int, default=2, help="N in Tr rho^N")
    assoc = sub.add_parser("assoc-verify", parents=[common])
    assoc.add_argument("--tensor", required=True, help="builtin:NAME or a tensor JSON path")
    assoc.add_argument("--lie", action="store_true", help="check the Jacobi identity instead")
    inter = sub.add_parser("intertwine", parents=[common])
    inter.add_argument("--target", default="tomographic", help="target map name")
    inter.add_argument("--target-grid", dest="target_grid", action="append")
    report = sub.add_parser("report")
    report.add_argument("manifests", nargs="*", type=Path)
    report.add_argument("--out", type=Path, help="write the table as JSON")
    report.add_argument("-v", "--verbose", action="store_true")
    report.add_argument("-q", "--quiet", action="store_true")

    argv = sys.argv[1:] if argv is None else argv
    return parser.parse_args(_attach_values(argv, ("--grid", "--target-grid")))


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parse_args(argv)
    _configure_logging(args)
    if args.command == "report":
        return _report(args)

    try:
        config = RunConfig.from_args(args)
        if config.command == "purity" and args.order < 2:
            raise ConfigError("order", f"must be >= 2, got {args.order}")
        outcome = HANDLERS[config.command](config, args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing input: {exc.filename or exc}", file=sys.stderr)
        return 2
    except StarprodError as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return 3

    check, worst = max(outcome.residuals.items(), key=lambda kv: kv[1], default=("none", 0.0))
    passed = bool(np.isfinite(worst) and worst <= config.tolerance)
    manifest = build_manifest(
        config.command,
        {**config.parameters(), **outcome.parameters},
        residuals=outcome.residuals,
        tolerance=config.tolerance,
        passed=passed,
        seed=config.seed,
        artifacts=[p.name for p in outcome.artifacts],
    )
    manifest_path = write_manifest(manifest, _artifact(config, ".manifest.json"))
    logger.info("manifest written to %s", manifest_path)
    if passed:
        print(f"{config.command}: PASS (max residual {worst:.3e}, tolerance {config.tolerance:.1e})")
        return 0
    print(str(NumericalCheckFailed(f"{config.command}/{check}", worst, config.tolerance)), file=sys.stderr)
    return 3


__all__ = ["COMMANDS", "RunConfig", "parse_range", "main"]
