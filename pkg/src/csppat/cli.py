"""Command-line driver: solve, check, classify-pattern, occurs, generate, bench."""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Optional, Sequence

from . import analysis, catalog, generators, solvers
from .errors import BadParameter, CsppatError, ValidationError
from .model import CspInstance, CspPattern
from .occurrence import Occurrence, forbids, occurs, occurs_in_instance
from .serialize import parse, serialise

EXIT_OK = 0
EXIT_UNSAT = 1
EXIT_NOT_IN_CLASS = 2
EXIT_USAGE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise _UsageError(f"cannot read {path}: {e.strerror}")


def _load_instance(path: str) -> CspInstance:
    doc = parse(_read(path))
    if not isinstance(doc, CspInstance):
        raise ValidationError(f"{path} holds a pattern, expected an instance")
    return doc


def _load_pattern_ref(ref: str) -> CspPattern:
    """A pattern reference is a file path or a catalog name like 'pivot:2'."""
    if not os.path.exists(ref):
        name, _, param = ref.partition(":")
        try:
            return catalog.build(name, int(param) if param else None)
        except ValueError:
            raise _UsageError(f"bad pattern parameter in {ref!r}")
        except BadParameter as e:
            raise _UsageError(f"{ref!r} is neither a file nor a catalog pattern ({e})")
    doc = parse(_read(ref))
    if not isinstance(doc, CspPattern):
        raise ValidationError(f"{ref} holds an instance, expected a pattern")
    return doc


def _load_target(ref: str):
    if os.path.exists(ref):
        return parse(_read(ref))
    return _load_pattern_ref(ref)


def _print_occurrence(occ: Occurrence) -> None:
    print("varmap:", " ".join(str(v) for v in occ.renaming.var_map))
    print(
        "pointmap:",
        " ".join(f"({x},{a})->{b}" for (x, a), b in sorted(occ.renaming.point_map.items())),
    )


def _print_witness(witness) -> None:
    if isinstance(witness, Occurrence):
        _print_occurrence(witness)
    elif isinstance(witness, solvers.MaxClosureViolation):
        u, v = witness.scope
        (a1, b1), (a2, b2) = witness.allowed
        print(
            f"violation: scope=({u},{v}) allowed=({a1},{b1}),({a2},{b2})"
            f" max=({witness.disallowed_max[0]},{witness.disallowed_max[1]})"
        )
    elif isinstance(witness, tuple):
        print("cycle:", " ".join(str(v) for v in witness))
    elif witness is not None:
        print("witness:", witness)


def _csv_ints(text: str, what: str) -> list:
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise _UsageError(f"{what} must be comma-separated integers, got {text!r}")


_SOLVER_NAMES = ("auto", "tree", "btp", "maxclosed", "negtrans", "pivot1", "simple", "generic")


def _run_solver(name, p, order, value_order, check_class):
    if name == "tree":
        return solvers.solve_tree(p, check_class=check_class)
    if name == "btp":
        return solvers.solve_btp(p, order or range(p.num_variables), check_class=check_class)
    if name == "maxclosed":
        return solvers.solve_max_closed(p, value_order, check_class=check_class)
    if name == "negtrans":
        return solvers.solve_negtrans(p, check_class=check_class)
    if name == "pivot1":
        return solvers.solve_pivot1(p, check_class=check_class)
    if name == "simple":
        return solvers.solve_simple(p, check_class=check_class)
    return solvers.solve_backtracking(p)


def _cmd_solve(args) -> int:
    p = _load_instance(args.instance)
    order = _csv_ints(args.order, "--order") if args.order else None
    value_order = _csv_ints(args.value_order, "--value-order") if args.value_order else None
    if args.solver_class == "auto":
        name, outcome = solvers.solve_auto(p)
    else:
        name = args.solver_class
        outcome = _run_solver(name, p, order, value_order, not args.no_class_check)
    print("class:", name)
    print("status:", outcome.status.value)
    if outcome.status is solvers.SolveStatus.SOLUTION:
        print("assignment:", " ".join(f"{v}={outcome.assignment[v]}" for v in sorted(outcome.assignment)))
        return EXIT_OK
    if outcome.status is solvers.SolveStatus.UNSATISFIABLE:
        return EXIT_UNSAT
    _print_witness(outcome.witness)
    return EXIT_NOT_IN_CLASS


def _cmd_check(args) -> int:
    p = _load_instance(args.instance)
    patterns = [_load_pattern_ref(ref) for ref in args.patterns]
    result = forbids(p, patterns)
    print("forbids:", "true" if result.forbids else "false")
    if result.forbids:
        return EXIT_OK
    print("pattern-index:", result.pattern_index)
    _print_occurrence(result.witness)
    return EXIT_NOT_IN_CLASS


def _cmd_occurs(args) -> int:
    chi = _load_pattern_ref(args.pattern)
    target = _load_target(args.target)
    order = _csv_ints(args.order, "--order") if args.order else None
    if isinstance(target, CspInstance):
        occ = occurs_in_instance(chi, target, var_order=order)
    else:
        occ = occurs(chi, target)
    if occ is None:
        print("occurs: none")
        return EXIT_NOT_IN_CLASS
    print("occurs: true")
    _print_occurrence(occ)
    return EXIT_OK


def _cmd_classify(args) -> int:
    chi = _load_pattern_ref(args.pattern)
    verdict = analysis.classify_negative_pattern(chi)
    if isinstance(verdict, analysis.Intractable):
        print("verdict: intractable")
        print("family:", verdict.name)
        if verdict.parameter is not None:
            print("parameter:", verdict.parameter)
    else:
        print("verdict: pivot-embeddable")
        print("parameter:", verdict.r)
    _print_occurrence(verdict.occurrence)
    return EXIT_OK


def _write_instance(instance: CspInstance, out: Optional[str]) -> None:
    text = serialise(instance)
    if out is None:
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print("wrote:", out)


def _cmd_generate(args) -> int:
    if args.family == "pn":
        inst = generators.gen_pn_family(args.n)
    elif args.family == "alldiff":
        if args.domains:
            domains = [
                _csv_ints(block, "--domains block")
                for block in args.domains.split(";")
            ]
            inst = generators.gen_alldiff_unary(len(domains), domains)
        else:
            inst = generators.gen_alldiff_unary(args.n, [range(args.d)] * args.n)
    elif args.family == "3sat":
        formula = generators.formula_from_dimacs(_read(args.cnf))
        inst = generators.gen_3sat_instance(formula, args.ell).instance
    else:  # random
        seed = args.seed
        if seed is None:
            seed = int(os.environ.get("CSPPAT_SEED", "0"))
        inst = generators.gen_random_instance(
            args.n, args.d, args.constraint_density, args.disallowed_density, seed
        )
    _write_instance(inst, args.out)
    return EXIT_OK


def _cmd_bench(args) -> int:
    sizes = _csv_ints(args.sizes, "--sizes")
    for n in sizes:
        for run in range(args.runs):
            if args.family == "alldiff":
                d = args.d or n
                inst = generators.gen_alldiff_unary(n, [range(d)] * n)
                solver = args.solver or "negtrans"
            elif args.family == "pn":
                d = n
                inst = generators.gen_pn_family(n)
                solver = args.solver or "pivot1"
            else:  # random
                d = args.d or 4
                inst = generators.gen_random_instance(
                    n, d, args.constraint_density, args.disallowed_density, args.seed + run
                )
                solver = args.solver or "generic"
            start = time.perf_counter()
            if solver == "auto":
                _, outcome = solvers.solve_auto(inst)
            else:
                outcome = _run_solver(solver, inst, None, None, True)
            elapsed = time.perf_counter() - start
            print(
                f"family={args.family} n={n} d={d} run={run}"
                f" seconds={elapsed:.6f} status={outcome.status.value}"
            )
    return EXIT_OK


def build_arg_parser() -> _Parser:
    parser = _Parser(prog="csppat", description="Binary CSP pattern toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an instance")
    p_solve.add_argument("instance")
    p_solve.add_argument("--class", dest="solver_class", choices=_SOLVER_NAMES, default="auto")
    p_solve.add_argument("--order", help="variable order for the btp solver, e.g. 2,0,1")
    p_solve.add_argument("--value-order", help="value order for the maxclosed solver")
    p_solve.add_argument("--no-class-check", action="store_true", help="skip the class membership check (unsafe)")
    p_solve.set_defaults(run=_cmd_solve)

    p_check = sub.add_parser("check", help="does the instance forbid every pattern?")
    p_check.add_argument("instance")
    p_check.add_argument("patterns", nargs="+", metavar="pattern")
    p_check.set_defaults(run=_cmd_check)

    p_occ = sub.add_parser("occurs", help="search one pattern inside a pattern or instance")
    p_occ.add_argument("pattern")
    p_occ.add_argument("target")
    p_occ.add_argument("--order", help="variable order for ordered patterns against an instance")
    p_occ.set_defaults(run=_cmd_occurs)

    p_cls = sub.add_parser("classify-pattern", help="classify a connected flat negative pattern")
    p_cls.add_argument("pattern")
    p_cls.set_defaults(run=_cmd_classify)

    p_gen = sub.add_parser("generate", help="write a generated instance")
    p_gen.add_argument("family", choices=("3sat", "pn", "alldiff", "random"))
    p_gen.add_argument("--n", type=int, default=5)
    p_gen.add_argument("--d", type=int, default=3)
    p_gen.add_argument("--domains", help="semicolon-separated value lists for alldiff")
    p_gen.add_argument("--cnf", help="DIMACS file for the 3sat family")
    p_gen.add_argument("--ell", type=int, default=2)
    p_gen.add_argument("--constraint-density", type=float, default=0.5)
    p_gen.add_argument("--disallowed-density", type=float, default=0.25)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out")
    p_gen.set_defaults(run=_cmd_generate)

    p_bench = sub.add_parser("bench", help="time a solver across a family sweep")
    p_bench.add_argument("family", choices=("alldiff", "pn", "random"))
    p_bench.add_argument("--sizes", required=True, help="comma-separated sizes")
    p_bench.add_argument("--d", type=int)
    p_bench.add_argument("--runs", type=int, default=1)
    p_bench.add_argument("--solver", choices=_SOLVER_NAMES)
    p_bench.add_argument("--constraint-density", type=float, default=0.5)
    p_bench.add_argument("--disallowed-density", type=float, default=0.25)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.set_defaults(run=_cmd_bench)
    return parser


def main(argv: Optional[Sequence] = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "generate" and args.family == "3sat" and args.cnf is None:
            raise _UsageError("generate 3sat needs --cnf")
        return args.run(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CsppatError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
