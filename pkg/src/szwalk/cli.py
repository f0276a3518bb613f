"""Command-line front end: build walks from files, fixtures, or seeds, and
emit CSV/JSON artifacts.

Exit codes: 0 success, 1 failed validation, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields

import numpy as np

from .errors import ConsistencyError, DimensionError, DomainError, GraphStructureError
from .graphs import (complete, cycle, grover_weight, load_graph_file, path_with_loops,
                     single_edge, validate_structures)
from .linalg import hermitian_eig, operator_to_json
from .walk import (WalkInstance, dump_instance, random_instance, szegedy_walk,
                   validate_instance)
from .spectral import boundary_subspaces, mapped_spectrum, verify_spectral_mapping, atlas_report
from .generator import (build_generator, build_intertwiners, identity_report, kernels_of_u,
                        verify_generator)
from .dynamics import (Partition, evolve_and_measure, infer_graph, limit_distribution,
                       localization_report, measured_evolution, origin_order, permute_generator,
                       permute_state)

COMMANDS = ("validate", "spectrum", "generator", "simulate", "localize", "infer-graph", "fuzz")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    graph: str | None = None
    fixture: str | None = None
    random: str | None = None
    weight: str = "grover"
    one_form: str = "zero"
    steps: int = 100
    init: str = "arc:0"
    out: str | None = None
    tol_ker: float = 1e-9
    verify: bool = False
    cesaro: bool = False
    limit: bool = False
    window: str | None = None
    blocks: str | None = None
    seeds: str | None = None
    max_dim: int = 12
    dump_instance: str | None = None
    no_derived: bool = False

    def validate(self) -> None:
        sources = [s for s in (self.graph, self.fixture, self.random) if s is not None]
        if self.command == "fuzz":
            if sources:
                raise UsageError("fuzz takes a seed range, not an input source")
            if self.seeds is None:
                raise UsageError("fuzz requires --seeds a..b")
        elif len(sources) != 1:
            raise UsageError(f"exactly one input source required, got {len(sources)}")
        if self.steps < 0:
            raise UsageError("--steps must be >= 0")
        if self.tol_ker <= 0:
            raise UsageError("--tol-ker must be > 0")
        if self.weight not in ("grover", "explicit"):
            raise UsageError(f"unknown weight mode {self.weight!r}")
        if self.one_form not in ("zero", "explicit"):
            raise UsageError(f"unknown 1-form mode {self.one_form!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="szwalk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p: argparse.ArgumentParser) -> None:
        p.add_argument("--graph", help="path to a graph JSON file")
        p.add_argument("--fixture", help="builtin fixture: single-edge, cycle:N, complete:N, path-loops:N")
        p.add_argument("--random", metavar="H,K,SEED", help="random abstract instance")
        p.add_argument("--weight", choices=("grover", "explicit"), default=None)
        p.add_argument("--one-form", dest="one_form", choices=("zero", "explicit"), default=None)
        p.add_argument("--tol-ker", dest="tol_ker", type=float, default=None)
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--config", help="JSON file with default option values")

    p = sub.add_parser("validate", help="check structural and operator invariants")
    add_source(p)
    p.add_argument("--dump-instance", dest="dump_instance", help="write the instance JSON here")
    p.add_argument("--no-derived", dest="no_derived", action="store_true",
                   help="omit derived operators from the instance JSON")

    p = sub.add_parser("spectrum", help="predicted evolution spectrum as CSV")
    add_source(p)

    p = sub.add_parser("generator", help="Hermitian generator as JSON")
    add_source(p)
    p.add_argument("--verify", action="store_true", help="run and emit the verification report")

    p = sub.add_parser("simulate", help="site distributions over time as CSV")
    add_source(p)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--init", default=None, help="arc:ID | vertex-uniform:LABEL | random:SEED | file:PATH")
    p.add_argument("--cesaro", action="store_true", help="append time-averaged rows (tagged n=-2)")
    p.add_argument("--limit", action="store_true", help="append limit-distribution rows (tagged n=-1)")
    p.add_argument("--blocks", help="partition for abstract instances, e.g. 'a:2,b:3'")

    p = sub.add_parser("localize", help="localization diagnostics as JSON")
    add_source(p)
    p.add_argument("--init", default=None)
    p.add_argument("--window", help="observation window N0:N1 (default 0:steps)")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--blocks", help="partition for abstract instances")

    p = sub.add_parser("infer-graph", help="digraph induced by the evolution blocks, as JSON")
    add_source(p)
    p.add_argument("--blocks", help="partition for abstract instances")

    p = sub.add_parser("fuzz", help="run the invariant suite on random instances")
    p.add_argument("--seeds", help="seed range a..b (inclusive)")
    p.add_argument("--max-dim", dest="max_dim", type=int, default=None)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--config", help="JSON file with default option values")

    return parser


def parse_config(argv: list[str] | None = None) -> RunConfig:
    """Parse flags, then fill unset options from the --config file, then defaults."""
    args = _build_parser().parse_args(argv)
    provided = {k: v for k, v in vars(args).items()
                if k != "config" and v is not None and v is not False}

    file_values: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(file_values) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "command" in file_values and file_values["command"] != args.command:
            raise UsageError("config file cannot override the command")

    merged = {**file_values, **provided}
    cfg = RunConfig(**{**{"command": args.command}, **{k: v for k, v in merged.items() if k != "command"}})
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# instance construction

def _parse_fixture(name: str) -> WalkInstance:
    if name == "single-edge":
        return szegedy_walk(single_edge())
    kind, _, arg = name.partition(":")
    builders = {"cycle": cycle, "complete": complete, "path-loops": path_with_loops}
    if kind not in builders or not arg:
        raise UsageError(f"unknown fixture {name!r}")
    try:
        n = int(arg)
    except ValueError:
        raise UsageError(f"bad fixture size in {name!r}") from None
    return szegedy_walk(builders[kind](n))


def _parse_random(spec: str) -> WalkInstance:
    try:
        dim_h, dim_k, seed = (int(x) for x in spec.split(","))
    except ValueError:
        raise UsageError(f"--random expects H,K,SEED, got {spec!r}") from None
    return random_instance(dim_h, dim_k, seed)


def _load_instance(cfg: RunConfig) -> WalkInstance:
    if cfg.graph is not None:
        graph, weight, one_form = load_graph_file(cfg.graph)
        if cfg.weight == "explicit":
            if weight is None:
                raise DomainError("weight mode 'explicit' but the graph file carries no weights")
        else:
            weight = grover_weight(graph)
        if cfg.one_form == "explicit":
            if one_form is None:
                raise DomainError("1-form mode 'explicit' but the graph file carries none")
        else:
            one_form = None
        return szegedy_walk(graph, weight, one_form)
    if cfg.fixture is not None:
        if cfg.weight == "explicit":
            raise UsageError("fixtures define no explicit weights")
        return _parse_fixture(cfg.fixture)
    return _parse_random(cfg.random)


def _parse_blocks(spec: str) -> Partition:
    labels, sizes = [], []
    for item in spec.split(","):
        label, _, size = item.partition(":")
        try:
            sizes.append(int(size))
        except ValueError:
            raise UsageError(f"bad block spec {item!r}") from None
        labels.append(label)
    return Partition(tuple(labels), tuple(sizes))


def _measurement(inst: WalkInstance, cfg: RunConfig) -> tuple[np.ndarray, Partition, np.ndarray | None]:
    """Evolution + partition in the measurement basis; order is None for abstract walks."""
    if inst.graph is not None:
        return measured_evolution(inst)
    if cfg.blocks:
        part = _parse_blocks(cfg.blocks)
        if part.dim != inst.dim_h:
            raise UsageError(f"--blocks dimension {part.dim} != instance dimension {inst.dim_h}")
    else:
        part = Partition(tuple(str(i) for i in range(inst.dim_h)), (1,) * inst.dim_h)
    return inst.evolution, part, None


def _initial_state(spec: str, inst: WalkInstance, part: Partition,
                   order: np.ndarray | None) -> np.ndarray:
    dim = part.dim
    kind, _, arg = spec.partition(":")
    if kind == "arc":
        state = np.zeros(dim, dtype=np.complex128)
        state[int(arg)] = 1.0
        if order is not None:  # arc index refers to the canonical arc ordering
            state = permute_state(state, order)
        return state
    if kind == "vertex-uniform":
        state = np.zeros(dim, dtype=np.complex128)
        block = part.block(arg)
        state[block] = 1.0 / np.sqrt(block.stop - block.start)
        return state
    if kind == "random":
        rng = np.random.default_rng(int(arg))
        state = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        return state / np.linalg.norm(state)
    if kind == "file":
        with open(arg, "r", encoding="utf-8") as fh:
            pairs = json.load(fh)
        state = np.array([complex(re, im) for re, im in pairs])
        if state.shape != (dim,):
            raise DomainError(f"initial-state file has dimension {state.shape[0]}, expected {dim}")
        return state / np.linalg.norm(state)
    raise UsageError(f"unknown initial-state spec {spec!r}")


# ---------------------------------------------------------------------------
# output helpers

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_json(report) -> dict:
    return {
        "passed": report.passed,
        "violations": [{"rule": v.rule, "location": v.location, "magnitude": v.magnitude}
                       for v in report.violations],
    }


# ---------------------------------------------------------------------------
# commands

def _cmd_validate(cfg: RunConfig) -> int:
    inst = _load_instance(cfg)
    report = validate_instance(inst)
    if inst.graph is not None:
        report = report.merged(validate_structures(inst.graph))
    if cfg.dump_instance:
        dump_instance(inst, cfg.dump_instance, include_derived=not cfg.no_derived)
    _emit(cfg, json.dumps(_report_json(report), indent=2) + "\n")
    return 0 if report.passed else 1


def _pipeline(inst: WalkInstance, tol: float):
    tdec = hermitian_eig(inst.discriminant, tol)
    atlas = boundary_subspaces(inst, tol)
    chiral = build_intertwiners(inst, tdec, tol)
    kernels = kernels_of_u(inst, tdec, atlas)
    gen = build_generator(inst, chiral, kernels)
    return tdec, atlas, chiral, gen


def _cmd_spectrum(cfg: RunConfig) -> int:
    inst = _load_instance(cfg)
    tdec = hermitian_eig(inst.discriminant, cfg.tol_ker)
    atlas = boundary_subspaces(inst, cfg.tol_ker)
    pred = mapped_spectrum(tdec, atlas)
    lines = ["angle,re,im,multiplicity,provenance"]
    for line in pred.lines:
        lines.append(",".join([_fmt(line.angle), _fmt(np.cos(line.angle)), _fmt(np.sin(line.angle)),
                               str(line.multiplicity), line.provenance]))
    _emit(cfg, "\n".join(lines) + "\n")
    return 0


def _cmd_generator(cfg: RunConfig) -> int:
    inst = _load_instance(cfg)
    _, _, _, gen = _pipeline(inst, cfg.tol_ker)
    data = {
        "dim": gen.dim,
        "generator": operator_to_json(gen.matrix),
        "block_dims": gen.block_dims(),
        "block_spectra": {
            "rotating_plus": [float(x) for x in gen.spectrum_plus],
            "rotating_minus": [float(x) for x in gen.spectrum_minus],
            "fixed": [0.0] * gen.fixed.dim,
            "flipped": [float(np.pi)] * gen.flipped.dim,
        },
    }
    status = 0
    if cfg.verify:
        report = verify_generator(inst, gen)
        data["verification"] = _report_json(report)
        status = 0 if report.passed else 1
    _emit(cfg, json.dumps(data, indent=2) + "\n")
    return status


def _cmd_simulate(cfg: RunConfig) -> int:
    inst = _load_instance(cfg)
    evolution, part, order = _measurement(inst, cfg)
    psi0 = _initial_state(cfg.init, inst, part, order)
    trace = evolve_and_measure(evolution, part, psi0, cfg.steps)
    rows = ["n,label,probability"]
    for n in range(cfg.steps + 1):
        for i, label in enumerate(part.labels):
            rows.append(f"{n},{label},{_fmt(trace.distributions[n, i])}")
    if cfg.cesaro:
        for i, label in enumerate(part.labels):
            rows.append(f"-2,{label},{_fmt(trace.cesaro[i])}")
    if cfg.limit:
        _, _, _, gen = _pipeline(inst, cfg.tol_ker)
        if order is not None:
            gen = permute_generator(gen, order)
        limit = limit_distribution(gen, part, psi0)
        for label in part.labels:
            rows.append(f"-1,{label},{_fmt(limit[label])}")
    _emit(cfg, "\n".join(rows) + "\n")
    return 0


def _cmd_localize(cfg: RunConfig) -> int:
    inst = _load_instance(cfg)
    evolution, part, order = _measurement(inst, cfg)
    psi0 = _initial_state(cfg.init, inst, part, order)
    _, atlas, _, gen = _pipeline(inst, cfg.tol_ker)
    if order is not None:
        gen = permute_generator(gen, order)
    if cfg.window:
        n0, _, n1 = cfg.window.partition(":")
        window = (int(n0), int(n1))
    else:
        window = (0, cfg.steps)
    rep = localization_report(gen, part, psi0, window, atlas=atlas)
    data = {
        "limit": {k: v for k, v in rep.limit.items()},
        "certified_bound": rep.certified_bound,
        "overlap": rep.overlap,
        "point_spectrum_nonempty": rep.point_spectrum_nonempty,
        "has_correction_space": rep.has_correction_space,
        "empirical_max": {k: v for k, v in rep.empirical_max.items()},
        "window": list(rep.window),
        "localized": rep.localized,
    }
    _emit(cfg, json.dumps(data, indent=2) + "\n")
    return 0


def _cmd_infer_graph(cfg: RunConfig) -> int:
    inst = _load_instance(cfg)
    evolution, part, _ = _measurement(inst, cfg)
    digraph = infer_graph(evolution, part, tol_block=None)
    data = {"vertices": list(digraph.vertices), "arcs": [[t, h] for t, h in digraph.arcs]}
    _emit(cfg, json.dumps(data, indent=2) + "\n")
    return 0


def _fuzz_dims(seed: int, max_dim: int) -> tuple[int, int]:
    rng = np.random.default_rng(seed)
    dim_h = int(rng.integers(2, max_dim + 1))
    dim_k = int(rng.integers(1, dim_h + 1))
    return dim_h, dim_k


def _cmd_fuzz(cfg: RunConfig) -> int:
    try:
        a, _, b = cfg.seeds.partition("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise UsageError(f"--seeds expects a..b, got {cfg.seeds!r}") from None
    rows = ["seed dim_h dim_k instance atlas mapping identities generator"]
    failures = 0
    for seed in range(lo, hi + 1):
        dim_h, dim_k = _fuzz_dims(seed, cfg.max_dim)
        inst = random_instance(dim_h, dim_k, seed)
        tdec = hermitian_eig(inst.discriminant)
        atlas = boundary_subspaces(inst)
        chiral = build_intertwiners(inst, tdec)
        kernels = kernels_of_u(inst, tdec, atlas)
        gen = build_generator(inst, chiral, kernels)
        checks = {
            "instance": validate_instance(inst).passed,
            "atlas": atlas_report(inst, atlas).passed,
            "mapping": verify_spectral_mapping(inst, mapped_spectrum(tdec, atlas)).passed,
            "identities": identity_report(inst, tdec, chiral, atlas).passed,
            "generator": verify_generator(inst, gen).passed,
        }
        failures += 0 if all(checks.values()) else 1
        rows.append(f"{seed} {dim_h} {dim_k} " + " ".join("ok" if v else "FAIL" for v in checks.values()))
    rows.append(f"total {hi - lo + 1} failures {failures}")
    _emit(cfg, "\n".join(rows) + "\n")
    return 0 if failures == 0 else 1


_DISPATCH = {
    "validate": _cmd_validate,
    "spectrum": _cmd_spectrum,
    "generator": _cmd_generator,
    "simulate": _cmd_simulate,
    "localize": _cmd_localize,
    "infer-graph": _cmd_infer_graph,
    "fuzz": _cmd_fuzz,
}


def run_command(cfg: RunConfig) -> int:
    return _DISPATCH[cfg.command](cfg)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse reports its own usage errors
        return int(exc.code or 0)
    try:
        return run_command(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, DimensionError, GraphStructureError, ConsistencyError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
