"""
Command-line front end

Subcommands:
- solve      iterate a corpus map to its best proximity point and write the trace
- falsify    run a UC / UC* / BUC falsifier on a corpus pair
- modulus    sample a (directional) modulus of convexity into a CSV
- corpus     run every corpus entry against its expected value
- distances  estimate the corpus set distances and dump the region catalog
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from convexity import (
    check_uc_about_phi, estimate_modulus, example39_phi, is_uniformly_convex_in_direction, modulus_curve,
)
from errors import (
    BudgetError, CatalogError, DomainError, HarnessViolation, MapIntegrityError, NormMismatchError,
    PreconditionError, ProximityError, RegionError,
)
from geometry import L1, L2, LINF, PRODUCT, Norm, Planar, Point, encode_point, metric, norm_eval
from regions import Box, catalog_records, corpus_region, set_distance
from solver import (
    COUPLED_CATALOG, IterationTrace, Side, best_proximity_point, certify, corpus_coupled, corpus_map,
    coupled_solve, iterate, verify_contraction, verify_cyclic,
)
from ucprops import PAIR_CATALOG, PropertyKind, corpus_family, corpus_pair

# -------------------- CONFIG --------------------
SCHEMA_VERSION = 1
COMMANDS = ("solve", "falsify", "modulus", "corpus", "distances")
DISTANCE_TOL = 1e-6
MODULUS_TOL = 1e-5
FLAT_TOL = 1e-9
DISTANCE_PAIRS = ("ex15_ab", "ex16_ab", "ex16_bc", "ex43", "ex49", "unit_ball_l2", "unit_ball_linf")
SOLVER_TARGETS = {
    "example49": Planar(1.0, 1.0),
    "overlap_contraction": Planar(0.5, 0.0),
}
SOLVER_STARTS = {
    "example49": (2.0, 2.0),
    "overlap_contraction": (0.0, 3.0),
    "reflection_quarter": (2.0, 1.0, 1.0, -1.0),
}
START_BOXES = {
    "example49": Box(0.2, 5.0, 0.2, 5.0),
    "overlap_contraction": Box(0.0, 5.0, -5.0, 5.0),
}
EX49_BOX = Box(-20.0, 20.0, -20.0, 20.0)
UNIQUE_STARTS = 4
MAP_SAMPLES = 200
CONTRACTION_PAIRS = 2500
PHI_BOX = Box(0.2, 5.0, 0.2, 5.0)
PHI_PAIRS = 200
EX50_N_MAX = 200
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


@dataclass
class RunConfig:
    command: str = "corpus"
    map_name: str = "example49"
    pair_name: str = "ex43"
    property: str = "UC"
    norm: str = "l2"
    direction: Optional[List[float]] = None
    x0: Optional[List[float]] = None
    n_max: int = 200
    falsify_n_max: Optional[int] = None
    falsify_tol: Optional[float] = None
    budget: int = 256
    grid: int = 10
    tol: float = 1e-8
    tol_scale: float = 1.0
    output_path: Optional[str] = None
    resume_path: Optional[str] = None
    seed: int = 0
    log_path: Optional[str] = None
    verbose: bool = False

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path) as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise PreconditionError(f"config file {path} must hold a JSON object")
        unknown = sorted(set(data) - {f.name for f in fields(cls)})
        if unknown:
            raise PreconditionError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def default_output(self) -> str:
        names = {
            "solve": f"trace_{self.map_name}.jsonl",
            "falsify": f"verdict_{self.pair_name}_{PropertyKind.parse(self.property).name.lower()}.json",
            "modulus": f"modulus_{self.norm}.csv",
            "corpus": "corpus_summary.csv",
            "distances": "distances.json",
        }
        return self.output_path or names[self.command]


def parse_vector(text: str) -> List[float]:
    """Comma-separated floats, e.g. '2,2' or '2,1,1,-1'"""
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def write_json(path, payload: Dict) -> None:
    with open(path, "w") as f:
        f.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _banner(title: str) -> None:
    print("=" * 60)
    print(title)
    print("=" * 60)


# -------------------- COMMANDS --------------------

def _resume_point(config: RunConfig, name: str):
    """Latest start-side iterate of a saved trace of the same map"""
    trace = IterationTrace.read_jsonl(config.resume_path)
    expected = f"{name}_product" if name in COUPLED_CATALOG else name
    if trace.map_name != expected:
        raise PreconditionError(f"trace {config.resume_path} belongs to '{trace.map_name}', not '{expected}'")
    point = trace.last_even()
    logging.info(f"Resuming {name} from step {trace.steps - trace.steps % 2}: {encode_point(point)}")
    return point


def _start_point(config: RunConfig, name: str):
    if config.resume_path:
        return _resume_point(config, name)
    values = config.x0 or list(SOLVER_STARTS.get(name, (2.0, 2.0)))
    if name in COUPLED_CATALOG:
        # one planar start doubles as (x0, y0) = (p, p)
        if len(values) == 2:
            values = values * 2
        if len(values) != 4:
            raise PreconditionError(f"coupled start needs 2 or 4 coordinates, got {len(values)}")
        return Planar(values[0], values[1]), Planar(values[2], values[3])
    if len(values) != 2:
        raise PreconditionError(f"start point needs 2 coordinates, got {len(values)}")
    return Planar(values[0], values[1])


def solve_command(config: RunConfig) -> int:
    name = config.map_name
    tol = config.tol * config.tol_scale
    output = config.default_output()
    _banner(f"BEST PROXIMITY POINT: {name}")
    try:
        if name in COUPLED_CATALOG:
            x0, y0 = _start_point(config, name)
            solution = coupled_solve(corpus_coupled(name), x0, y0, tol, config.n_max)
            solution.trace.write_jsonl(output)
            print(f"Coupled pair (x, y): {encode_point(solution.xy)}")
            print(f"Coupled pair (u, v): {encode_point(solution.uv)}")
            print(f"Residual: {solution.residual:.3e}")
        else:
            cmap = corpus_map(name)
            trace = iterate(cmap, _start_point(config, name), config.n_max, tol)
            point, certificate = certify(cmap, trace, tol)
            trace.write_jsonl(output, certificate)
            print(f"Best proximity point: {encode_point(point)}")
            print(f"rho(x, Tx) = {certificate.proximity:.12g}, dist(A, B) = {certificate.dist_ab:.12g}")
            print(f"Residual: {certificate.residual:.3e} after {certificate.steps} steps")
    except BudgetError as e:
        # keep the partial trace so the run can be resumed
        if e.trace is not None:
            e.trace.write_jsonl(output)
        raise
    print(f"Trace written to {output}")
    return 0


def falsify_command(config: RunConfig) -> int:
    pair = corpus_pair(config.pair_name)
    prop = PropertyKind.parse(config.property)
    _banner(f"{prop.value} FALSIFICATION: {pair.name}")
    verdict = pair.falsify(prop, config.falsify_n_max, config.falsify_tol)
    expected = pair.expected[prop]
    record = verdict.to_record()
    record["expected"] = expected.value
    write_json(config.default_output(), record)
    print(verdict.describe())
    print(f"Expected: {expected.value.replace('_', ' ')}")
    if pair.source_claim:
        print(f"Note: recorded claim '{pair.source_claim}'; {pair.note}")
    return 0 if verdict.outcome == expected else 1


def modulus_epsilons(grid: int) -> np.ndarray:
    """grid equally spaced ε in (0, 2], ending at 2"""
    if grid < 1:
        raise PreconditionError(f"grid must be >= 1, got {grid}")
    return np.linspace(2.0 / grid, 2.0, grid)


def modulus_command(config: RunConfig) -> int:
    norm = Norm.parse(config.norm)
    direction = Planar(*config.direction) if config.direction else None
    epsilons = modulus_epsilons(config.grid)
    curve = modulus_curve(norm, epsilons, config.budget, direction)
    output = config.default_output()
    curve.to_csv(output)
    _banner(f"MODULUS OF CONVEXITY: {norm}" + (f" along {encode_point(direction)}" if direction else ""))
    print(curve.to_frame().to_string(index=False))
    if direction is not None:
        convex = is_uniformly_convex_in_direction(norm, direction, epsilons, config.budget)
        print(f"\nUniformly convex in direction {encode_point(direction)}: {'yes' if convex else 'no'}")
        logging.info(f"{norm} along {encode_point(direction)}: uniformly convex = {convex}")
    return 0


def _distance_rows(config: RunConfig) -> List[Dict]:
    rows = []
    tol = DISTANCE_TOL * config.tol_scale
    for name in DISTANCE_PAIRS:
        pair = PAIR_CATALOG[name]
        estimate = set_distance(pair.norm, pair.a, pair.b, config.budget)
        rows.append({
            "pair": name,
            "norm": str(pair.norm),
            "expected": pair.dist_ab,
            "estimate": estimate.value,
            "argmin": encode_point(estimate.argmin_pair),
            "passed": bool(abs(estimate.value - pair.dist_ab) < tol),
        })
    return rows


def distances_command(config: RunConfig) -> int:
    _banner("CORPUS SET DISTANCES")
    rows = _distance_rows(config)
    write_json(config.default_output(), {"schema": SCHEMA_VERSION, "distances": rows, "regions": catalog_records()})
    for row in rows:
        status = "PASS" if row["passed"] else "FAIL"
        print(f"  {row['pair']:<16} {row['norm']:<6} dist = {row['estimate']:.10f} (expected {row['expected']:g}) {status}")
    return 0 if all(row["passed"] for row in rows) else 1


# -------------------- CORPUS CHECKS --------------------

def sample_starts(name: str, count: int, seed: int) -> List[Point]:
    """Seeded starting points on the A side of a corpus map"""
    cmap = corpus_map(name)
    return cmap.region(Side.A).sample(count, START_BOXES.get(name), seed)


def example49_uniqueness(config: RunConfig) -> Tuple[str, bool]:
    """Seeded starts all reach one best proximity point"""
    cmap = corpus_map("example49")
    tol = config.tol * config.tol_scale
    starts = sample_starts("example49", UNIQUE_STARTS, config.seed)
    points = [best_proximity_point(cmap, start, tol, config.n_max)[0] for start in starts]
    spread = max(cmap.distance(p, q) for p in points for q in points)
    return f"spread {spread:.2e} over {len(points)} starts", spread < math.sqrt(tol)


def example49_cyclicity(config: RunConfig) -> Tuple[str, bool]:
    check = verify_cyclic(corpus_map("example49"), MAP_SAMPLES, EX49_BOX, config.seed)
    return f"{check.checked} samples", check.ok


def example49_contraction(config: RunConfig) -> Tuple[str, bool]:
    """Claimed Banach constant against seeded cross pairs"""
    cmap = corpus_map("example49")
    report = verify_contraction(cmap, cmap.claimed_class.k, CONTRACTION_PAIRS, box=EX49_BOX, seed=config.seed)
    return f"max violation {report.max_violation:.2e} over {report.pairs_checked} pairs", report.passed


def phi_ball_check(config: RunConfig) -> Tuple[str, bool]:
    """Hyperbola epigraph uniformly convex about its φ on seeded pairs"""
    result = check_uc_about_phi(LINF, corpus_region("ex43_A"), example39_phi(), PHI_PAIRS, box=PHI_BOX,
                                seed=config.seed)
    return f"{result.pairs_checked} pairs", result.passed


def example50_closed_form(config: RunConfig) -> Tuple[str, bool]:
    """‖x_n‖ = ‖z_n‖ = 1 and ρ(x_n, z_n) = 2·2^(−1/(n+1)) for every n ≤ EX50_N_MAX"""
    family = corpus_family("example50")
    worst = 0.0
    for n in range(1, EX50_N_MAX + 1):
        x, z = family.gen_x(n), family.gen_z(n)
        r = 2.0 ** (-1.0 / (n + 1))
        worst = max(worst, abs(norm_eval(PRODUCT, x) - 1.0), abs(norm_eval(PRODUCT, z) - 1.0),
                    abs(metric(PRODUCT, x, z) - 2.0 * r))
    return f"max deviation {worst:.2e}", worst < FLAT_TOL * config.tol_scale


# -------------------- CORPUS --------------------

def _entry(rows: List[Dict], entry: str, kind: str, expected, check):
    """Run one corpus check; errors mark the entry FAIL"""
    try:
        measured, passed = check()
    except ProximityError as e:
        logging.error(f"corpus entry {entry} failed: {e}")
        measured, passed = f"{type(e).__name__}: {e}", False
    rows.append({"entry": entry, "kind": kind, "expected": str(expected), "measured": str(measured),
                 "status": "PASS" if passed else "FAIL"})


def corpus_run(config: RunConfig) -> Tuple[pd.DataFrame, int]:
    """Every corpus entry against its expected verdict or value"""
    rows: List[Dict] = []
    dist_tol = DISTANCE_TOL * config.tol_scale
    solve_tol = config.tol * config.tol_scale

    for name in DISTANCE_PAIRS:
        pair = PAIR_CATALOG[name]

        def check(pair=pair):
            value = set_distance(pair.norm, pair.a, pair.b, config.budget).value
            return f"{value:.10g}", abs(value - pair.dist_ab) < dist_tol

        _entry(rows, f"distance/{name}", "distance", pair.dist_ab, check)

    # maps
    _entry(rows, "map/example49_cyclic", "map", "T(A) in B, T(B) in A", lambda: example49_cyclicity(config))
    _entry(rows, "map/example49_contraction", "map", "violation <= 1e-9", lambda: example49_contraction(config))

    for name, target in SOLVER_TARGETS.items():
        def check(name=name, target=target):
            cmap = corpus_map(name)
            point, certificate = best_proximity_point(cmap, Planar(*SOLVER_STARTS[name]), solve_tol, config.n_max)
            close = cmap.distance(point, target) < math.sqrt(solve_tol)
            return f"{encode_point(point)} residual={certificate.residual:.2e}", close

        _entry(rows, f"solve/{name}", "solver", encode_point(target), check)

    _entry(rows, "solve/example49_unique", "solver", f"spread < {math.sqrt(solve_tol):g}",
           lambda: example49_uniqueness(config))

    for name in COUPLED_CATALOG:
        def check(name=name):
            x0, y0 = _start_point(RunConfig(x0=list(SOLVER_STARTS[name])), name)
            solution = coupled_solve(corpus_coupled(name), x0, y0, solve_tol, config.n_max)
            return f"residual={solution.residual:.2e}", solution.residual < solve_tol

        _entry(rows, f"coupled/{name}", "solver", f"residual < {solve_tol:g}", check)

    for name, pair in PAIR_CATALOG.items():
        for prop in (PropertyKind.UC, PropertyKind.BUC, PropertyKind.UC_STAR):
            def check(pair=pair, prop=prop):
                verdict = pair.falsify(prop, config.falsify_n_max, config.falsify_tol)
                return verdict.outcome.value, verdict.outcome == pair.expected[prop]

            _entry(rows, f"{prop.value}/{name}", "falsification", pair.expected[prop].value, check)

    _entry(rows, "closed_form/example50", "closed_form", "norm 1, separation 2r", lambda: example50_closed_form(config))
    _entry(rows, "phi/ex43_A", "phi", "ball inclusion on every pair", lambda: phi_ball_check(config))

    epsilons = modulus_epsilons(config.grid)

    def l2_check():
        values = np.array([estimate_modulus(L2, e, config.budget).value for e in epsilons])
        error = float(np.max(np.abs(values - (1 - np.sqrt(1 - epsilons ** 2 / 4)))))
        return f"max error {error:.2e}", error < MODULUS_TOL

    _entry(rows, "modulus/l2", "modulus", "1 - sqrt(1 - eps^2/4)", l2_check)
    for norm in (L1, LINF):
        def check(norm=norm):
            worst = max(estimate_modulus(norm, e, config.budget).value for e in (0.5, 1.0, 1.5))
            return f"max {worst:.2e}", worst <= FLAT_TOL

        _entry(rows, f"modulus/{norm}", "modulus", 0.0, check)

    frame = pd.DataFrame(rows, columns=["entry", "kind", "expected", "measured", "status"])
    failed = int((frame["status"] != "PASS").sum())
    logging.info(f"Corpus run (seed {config.seed}): {len(frame) - failed} passed, {failed} failed")
    return frame, 0 if failed == 0 else 1


def corpus_command(config: RunConfig) -> int:
    frame, code = corpus_run(config)
    output = config.default_output()
    frame.to_csv(output, index=False)
    _banner("CORPUS RESULTS")
    print(frame.to_string(index=False))
    print(f"\nSummary saved to {output}")
    return code


HANDLERS = {
    "solve": solve_command,
    "falsify": falsify_command,
    "modulus": modulus_command,
    "corpus": corpus_command,
    "distances": distances_command,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit code"""
    if config.command not in HANDLERS:
        logging.error(f"unknown command '{config.command}'")
        return 2
    try:
        return HANDLERS[config.command](config)
    # bad input: unknown names, wrong norm for the point type, parameters out of range
    except (CatalogError, PreconditionError, DomainError, NormMismatchError, RegionError) as e:
        logging.error(str(e))
        return 2
    # a check ran and failed
    except (BudgetError, MapIntegrityError, HarnessViolation) as e:
        logging.error(str(e))
        return 1
    except OSError as e:
        logging.error(f"cannot read or write a file: {e}")
        return 2


# -------------------- ARGUMENTS --------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file of RunConfig fields")
    common.add_argument("--seed", type=int, help="seed of every sampled check")
    common.add_argument("--output", dest="output_path")
    common.add_argument("--log-file", dest="log_path")
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--budget", type=int)
    common.add_argument("--tol-scale", dest="tol_scale", type=float)

    parser = argparse.ArgumentParser(prog="proximity", description="Best proximity points and UC-type properties")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", parents=[common], argument_default=argparse.SUPPRESS)
    p_solve.add_argument("--map", dest="map_name")
    p_solve.add_argument("--x0", type=parse_vector)
    p_solve.add_argument("--resume", dest="resume_path", help="continue from the last iterate of a trace file")
    p_solve.add_argument("--tol", type=float)
    p_solve.add_argument("--nmax", dest="n_max", type=int)

    p_falsify = sub.add_parser("falsify", parents=[common], argument_default=argparse.SUPPRESS)
    p_falsify.add_argument("--property")
    p_falsify.add_argument("--pair", dest="pair_name")
    p_falsify.add_argument("--nmax", dest="falsify_n_max", type=int)
    p_falsify.add_argument("--tol", dest="falsify_tol", type=float)

    p_modulus = sub.add_parser("modulus", parents=[common], argument_default=argparse.SUPPRESS)
    p_modulus.add_argument("--norm")
    p_modulus.add_argument("--grid", type=int)
    p_modulus.add_argument("--direction", type=parse_vector)

    p_corpus = sub.add_parser("corpus", parents=[common], argument_default=argparse.SUPPRESS)
    p_corpus.add_argument("--nmax", dest="n_max", type=int)
    p_corpus.add_argument("--falsify-nmax", dest="falsify_n_max", type=int)
    p_corpus.add_argument("--grid", type=int)
    p_corpus.add_argument("--tol", type=float)

    sub.add_parser("distances", parents=[common], argument_default=argparse.SUPPRESS)
    return parser


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parsed flags override values loaded from --config"""
    args = vars(build_parser().parse_args(argv))
    path = args.pop("config", None)
    base = asdict(RunConfig.from_json(path)) if path else {}
    base.update(args)
    return RunConfig(**base)


def setup_logging(config: RunConfig) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if config.log_path:
        handlers.append(logging.FileHandler(config.log_path))
    logging.basicConfig(level=logging.DEBUG if config.verbose else logging.INFO, format=LOG_FORMAT,
                        handlers=handlers, force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = config_from_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except (PreconditionError, OSError, ValueError, TypeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    setup_logging(config)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
