"""Command-line front end: solve, verify, gen, reduce.

Exit codes: 0 solved-yes (or valid report), 2 solved-no, 3 monte-carlo-no, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Any, Dict, List, Mapping, Optional, Sequence

from .config import NO, UNKNOWN, YES, SolutionReport, SolverConfig
from .formats import (
    Instance,
    InstanceFormatError,
    format_instance,
    normalize,
    problem_of,
    read_instance,
)
from .graph import GraphInputError, connected_components
from .harness import (
    MccInstance,
    gen_mcc,
    gen_mcc_to_eulc,
    gen_planted_steiner,
    gen_random,
    gen_restrict_ulc,
)
from .instances import MwcuInstance, SteinerInstance, UlcInstance, terminal_components, ulc_violations
from .mwcu import solve_mwcu, subdivide_for_nodes
from .oracles import OracleGuardError, oracle_mwcu_edge, oracle_mwcu_node, oracle_steiner, oracle_ulc_edge, oracle_ulc_node
from .steiner import solve_steiner
from .ulc import reduce_edge_ulc, solve_ulc

EXIT_YES = 0
EXIT_ERROR = 1
EXIT_NO = 2
EXIT_UNKNOWN = 3

REDUCTIONS = ("mcc-eulc", "eulc-restricted", "eulc-nulc", "emwcu-nmwcu")
GENERATORS = ("steiner", "emwcu", "nmwcu", "eulc", "nulc", "mcc", "planted-steiner")


class CliError(Exception):
    """A user-facing failure reported with exit code 1."""


# ------------------------------------------------------------------- solving
def solve(inst: Instance, cfg: SolverConfig) -> SolutionReport:
    if isinstance(inst, SteinerInstance):
        return solve_steiner(inst, cfg)
    if isinstance(inst, MwcuInstance):
        return solve_mwcu(inst, cfg)
    if isinstance(inst, UlcInstance):
        return solve_ulc(inst, cfg)
    raise CliError(f"no solver for {problem_of(inst)} instances")


def exit_code(answer: str) -> int:
    return {YES: EXIT_YES, NO: EXIT_NO, UNKNOWN: EXIT_UNKNOWN}[answer]


# -------------------------------------------------------------- verification
def _mwcu_violations(inst: MwcuInstance, solution: Sequence[int]) -> List[str]:
    g = inst.graph
    x = set(solution)
    if inst.edge:
        index = g.edge_index()
        unknown = sorted(e for e in x if e not in index)
        if unknown:
            return [f"unknown edges {unknown}"]
        rest = g.remove_edges(x)
    else:
        unknown = sorted(v for v in x if v not in g)
        if unknown:
            return [f"unknown vertices {unknown}"]
        blocked = sorted(x & inst.blocked)
        if blocked:
            return [f"vertex {blocked[0]} is undeletable"]
        rest = g.remove_vertices(x)
    comp: Dict[int, int] = {}
    for i, c in enumerate(connected_components(rest)):
        for v in c:
            comp[v] = i
    terms = sorted(inst.classes)
    for i, a in enumerate(terms):
        for b in terms[i + 1 :]:
            same_class = inst.classes[a] == inst.classes[b]
            if same_class and comp[a] != comp[b]:
                return [f"terminals {a} and {b} share class {inst.classes[a]} but are separated"]
            if not same_class and comp[a] == comp[b]:
                return [f"terminals {a} and {b} of classes {inst.classes[a]} and {inst.classes[b]} are connected"]
    return []


def _oracle(inst: Instance):
    if isinstance(inst, SteinerInstance):
        return oracle_steiner(inst)
    if isinstance(inst, MwcuInstance):
        return oracle_mwcu_edge(inst) if inst.edge else oracle_mwcu_node(inst)
    return oracle_ulc_edge(inst) if inst.edge else oracle_ulc_node(inst)


def report_violations(inst: Instance, data: Mapping[str, Any]) -> List[str]:
    """Every problem found with a JSON report, starting with the first violated condition.

    A ``yes`` report is re-validated by definition.  A ``no`` report is checked
    against the exhaustive oracle when the instance is small enough.
    """
    problem = problem_of(inst)
    if data.get("problem") != problem:
        return [f"report is for {data.get('problem')!r}, instance is {problem!r}"]
    answer = data.get("answer")
    if answer not in (YES, NO, UNKNOWN):
        return [f"unknown answer {answer!r}"]
    report = SolutionReport.from_dict(data)
    solution = report.solution
    if answer != YES:
        if data.get("size") is not None or solution:
            return [f"answer {answer} must carry no solution"]
        if answer == NO:
            try:
                res = _oracle(inst)
            except OracleGuardError:
                return []
            if res.feasible:
                return [f"answer no, but a solution of size {res.size} exists"]
        return []
    if data.get("size") != len(solution):
        return [f"size field {data.get('size')} differs from the {len(solution)} listed elements"]
    if len(set(solution)) != len(solution):
        return ["solution lists an element twice"]
    if len(solution) > inst.k:
        return [f"deletion set has {len(solution)} > {inst.k} elements"]
    if isinstance(inst, SteinerInstance):
        index = inst.graph.edge_index()
        unknown = sorted(e for e in solution if e not in index)
        if unknown:
            return [f"unknown edges {unknown}"]
        got = terminal_components(inst.graph.remove_edges(solution), inst.terminals)
        if got < inst.s:
            return [f"only {got} components contain a terminal, need {inst.s}"]
        return []
    if isinstance(inst, MwcuInstance):
        return _mwcu_violations(inst, solution)
    if report.labeling is None:
        return ["report carries no labeling"]
    return ulc_violations(inst, solution, report.labeling)


# ------------------------------------------------------------------ commands
def _config(args: argparse.Namespace) -> SolverConfig:
    try:
        return SolverConfig(
            mode=args.mode,
            family=args.family,
            delta=args.family_delta,
            seed=args.seed,
            q_override=args.q_override,
            t_override=args.t_override,
            threads=args.threads,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _load(path: str) -> Instance:
    try:
        return read_instance(path)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None
    except InstanceFormatError as exc:
        raise CliError(f"{path}: {exc}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    if args.problem is not None and args.problem != problem_of(inst):
        raise CliError(f"--problem {args.problem} does not match the {problem_of(inst)} file")
    cfg = _config(args)
    started = time.perf_counter()
    try:
        report = solve(inst, cfg)
    except (GraphInputError, OracleGuardError, ValueError) as exc:
        raise CliError(str(exc)) from None
    data = report.to_dict()
    if args.stats:
        data["stats"]["wall_time"] = round(time.perf_counter() - started, 6)
    if args.json:
        sys.stdout.write(json.dumps(data, sort_keys=True, indent=2) + "\n")
    else:
        lines = [f"answer: {data['answer']}"]
        if data["answer"] == YES:
            lines.append(f"size: {data['size']}")
            lines.append("solution: " + " ".join(str(x) for x in data["solution"]))
            if data.get("labeling") is not None:
                lines.append("labeling: " + " ".join(f"{v}:{a}" for v, a in data["labeling"].items()))
        if args.stats:
            lines += [f"stat {name}: {value}" for name, value in sorted(data["stats"].items())]
        sys.stdout.write("\n".join(lines) + "\n")
    return exit_code(report.answer)


def cmd_verify(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    try:
        with open(args.report, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CliError(f"{args.report}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.report}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise CliError(f"{args.report}: expected a JSON object")
    try:
        problems = report_violations(inst, data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{args.report}: malformed report ({exc})") from None
    if problems:
        sys.stderr.write(f"invalid: {problems[0]}\n")
        return EXIT_ERROR
    sys.stdout.write("valid\n")
    return EXIT_YES


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        if args.problem == "mcc":
            inst: Instance = gen_mcc(args.k, args.n, args.density, args.seed)
        elif args.problem == "planted-steiner":
            inst = gen_planted_steiner(args.n, args.k, args.seed)
        else:
            inst = gen_random(
                args.problem,
                args.n,
                args.density,
                args.k,
                args.seed,
                s=args.s,
                sigma=args.sigma,
                classes=args.classes,
                terminals=args.terminals,
            )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _emit(format_instance(inst), args.output)
    return EXIT_YES


def reduce_instance(kind: str, inst: Instance) -> Instance:
    source = kind.split("-")[0]
    if source != problem_of(inst):
        raise CliError(f"reduction {kind} needs a {source} instance, got {problem_of(inst)}")
    if kind == "mcc-eulc":
        assert isinstance(inst, MccInstance)
        return gen_mcc_to_eulc(inst)
    if kind == "eulc-restricted":
        assert isinstance(inst, UlcInstance)
        return gen_restrict_ulc(inst)
    if kind == "eulc-nulc":
        assert isinstance(inst, UlcInstance)
        return normalize(reduce_edge_ulc(inst).node)[0]
    assert isinstance(inst, MwcuInstance)
    return normalize(subdivide_for_nodes(inst)[0])[0]


def cmd_reduce(args: argparse.Namespace) -> int:
    out = reduce_instance(args.kind, _load(args.instance))
    _emit(format_instance(out), args.output)
    return EXIT_YES


# -------------------------------------------------------------------- parser
class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1; argparse's default 2 means "solved-no" here."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="randcontract", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--problem", choices=("steiner", "emwcu", "nmwcu", "eulc", "nulc"))
    p.add_argument("--mode", choices=("exact", "randomized", "bruteforce"), default="exact")
    p.add_argument("--family", choices=("exhaustive", "perfect-hash", "randomized"), default="exhaustive")
    p.add_argument("--family-delta", type=float, default=1e-6)
    p.add_argument("--q-override", type=int)
    p.add_argument("--t-override", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true", help="print the JSON report")
    p.add_argument("--stats", action="store_true", help="include counters and wall time")
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("verify", help="re-validate a JSON report against an instance")
    p.add_argument("instance")
    p.add_argument("report")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("problem", choices=GENERATORS)
    p.add_argument("--n", type=int, required=True, help="vertices (mcc: vertices per part)")
    p.add_argument("--k", type=int, required=True, help="budget (mcc: number of parts)")
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--sigma", type=int, default=2)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--terminals", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("reduce", help="apply a reduction to an instance file")
    p.add_argument("kind", choices=REDUCTIONS)
    p.add_argument("instance")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_reduce)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors and --help; the parser has already printed its message
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        return args.run(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
