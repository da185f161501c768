"""Command-line interface.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 usage or
input error, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import certificates as certs
from .automaton import (ForestAutomaton, RecognizedLanguage, af_automaton, connected_part,
                        control_table, direct_product, dump_automaton, ef_automaton, evaluate, minimize,
                        moore_product, read_automaton)
from .errors import ForestLogicError, InternalInconsistency
from .explorer import (ClosureConfig, closure_explore, conjecture_a_experiment,
                       conjecture_b_experiment)
from .fixtures import write_fixtures
from .forest import Alphabet, parse_forest, render_forest
from .logic import Modal, characteristic_forest, compile, read_formula_file, satisfies
from .varieties import ALL_EQUATIONS, check_equations, decide_ef_definable, decompose_ef

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- input helpers ------------------------------------------------------------------

def _split(text: str) -> list[str]:
    """Split on whitespace and on commas outside parentheses (product states are ``(p,q)``)."""
    out, cur, depth = [], [], 0
    for ch in text:
        if ch in "()":
            depth += 1 if ch == "(" else -1
        if ch.isspace() or (ch == "," and depth == 0):
            if cur:
                out.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def _load_language(path: str, finals_flag: str | None, required: bool = True):
    A, finals = read_automaton(path)
    if finals_flag is not None:
        finals = frozenset(A.state(q) for q in _split(finals_flag))
    if finals is None and required:
        raise UsageError(f"{path} has no finals line; pass --finals")
    return A, finals


def read_forest_file(path: str, alphabet: Alphabet | None = None):
    """``.fr`` file: optional ``alphabet:`` header line, then the forest text."""
    header = None
    body = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet:") and header is None and not body:
            header = Alphabet.of(line.partition(":")[2])
            continue
        body.append(line)
    return parse_forest(" ".join(body), alphabet or header)


def _forest_arg(args, alphabet: Alphabet | None):
    if getattr(args, "forest", None) is not None:
        return parse_forest(args.forest, alphabet)
    if getattr(args, "forest_file", None):
        return read_forest_file(args.forest_file, alphabet)
    raise UsageError("a forest is required (positional file or --forest TEXT)")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_control(path: str) -> dict[tuple[str, str], str]:
    table = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 4 or toks[2] != "->":
            raise UsageError(f"{path}:{lineno}: expected 'letter state -> letter'")
        table[(toks[0], toks[1])] = toks[3]
    return table


def _read_alphabets(path: str) -> list[Alphabet]:
    out = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(Alphabet.of(line))
    if not out:
        raise UsageError(f"{path} lists no alphabets")
    return out


# -- subcommands --------------------------------------------------------------------------

def cmd_eval(args) -> int:
    A, _ = read_automaton(args.automaton)
    print(A.states[evaluate(A, _forest_arg(args, A.alphabet))])
    return EXIT_OK


def cmd_member(args) -> int:
    A, finals = _load_language(args.automaton, args.finals)
    ok = evaluate(A, _forest_arg(args, A.alphabet)) in finals
    print("yes" if ok else "no")
    return EXIT_OK if ok else EXIT_NO


def cmd_minimize(args) -> int:
    A, finals = _load_language(args.automaton, args.finals)
    M = minimize(RecognizedLanguage(A, finals))
    _emit(dump_automaton(M.automaton, M.finals), args.out)
    return EXIT_OK


def cmd_product(args) -> int:
    loaded = [read_automaton(p) for p in args.automata]
    P = direct_product([A for A, _ in loaded])
    finals = None
    if all(f is not None for _, f in loaded):
        sizes = [A.n for A, _ in loaded]
        finals = set()
        for idx in range(P.n):
            comps, rest = [], idx
            for n in reversed(sizes):
                rest, r = divmod(rest, n)
                comps.append(r)
            comps.reverse()
            if all(c in f for c, (_, f) in zip(comps, loaded)):
                finals.add(idx)
    _emit(dump_automaton(P, finals), args.out)
    return EXIT_OK


def cmd_moore(args) -> int:
    A1, _ = read_automaton(args.left)
    A2, _ = read_automaton(args.right)
    table = _read_control(args.control)
    control_table(A1, A2, table)  # validates totality before building
    _emit(dump_automaton(moore_product(A1, A2, table)), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    A, _ = read_automaton(args.automaton)
    which = _split(args.equations) if args.equations else list(ALL_EQUATIONS)
    bad = [w for w in which if w not in ALL_EQUATIONS]
    if bad:
        raise UsageError(f"unknown equations: {' '.join(bad)}")
    rep = check_equations(A, which)
    sys.stdout.write(rep.serialize())
    return EXIT_OK if rep.all_pass() else EXIT_NO


def cmd_decide_ef(args) -> int:
    A, finals = _load_language(args.automaton, args.finals)
    d = decide_ef_definable(RecognizedLanguage(A, finals))
    print("YES" if d.definable else "NO")
    sys.stdout.write(d.report.serialize())
    return EXIT_OK if d.definable else EXIT_NO


def cmd_decompose_ef(args) -> int:
    A, _ = read_automaton(args.automaton)
    rep = check_equations(A, ("SEMILATTICE", "LETTER_IDEMPOTENT", "EF_DECREASING"))
    if not rep.all_pass():
        sys.stdout.write("NO\n" + rep.serialize())
        return EXIT_NO
    C = connected_part(A)
    cert = decompose_ef(C, shortcut=not args.no_shortcut)
    try:
        certs.check_certificate(cert, C)
    except ForestLogicError as exc:
        raise InternalInconsistency(f"constructed certificate failed verification: {exc}")
    _emit(certs.dump_certificate(cert), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cert = certs.load_certificate(Path(args.certificate).read_text())
    A, _ = read_automaton(args.automaton)
    try:
        certs.check_certificate(cert, A)
    except ForestLogicError as exc:
        print(f"REJECTED {exc}")
        return EXIT_NO
    print("ACCEPTED")
    return EXIT_OK


def cmd_sat(args) -> int:
    ff = read_formula_file(args.formula)
    ok = satisfies(_forest_arg(args, ff.alphabet), ff.formula)
    print("yes" if ok else "no")
    return EXIT_OK if ok else EXIT_NO


def cmd_compile(args) -> int:
    ff = read_formula_file(args.formula)
    L = compile(ff.formula, ff.alphabet)
    _emit(dump_automaton(L.automaton, L.finals), args.out)
    return EXIT_OK


def cmd_char_forest(args) -> int:
    ff = read_formula_file(args.formula)
    if not isinstance(ff.formula, Modal):
        raise UsageError("char-forest needs a formula whose outermost node is a modality")
    s = _forest_arg(args, ff.alphabet)
    print(render_forest(characteristic_forest(s, ff.formula.family)))
    return EXIT_OK


def _generators(spec: list[str]) -> dict[str, ForestAutomaton]:
    gens = {}
    for g in spec:
        if g.upper() == "EF":
            gens["EF"] = ef_automaton()
        elif g.upper() == "AF":
            gens["AF"] = af_automaton()
        else:
            A, _ = read_automaton(g)
            gens[Path(g).stem] = A
    return gens


def cmd_explore(args) -> int:
    alphs = _read_alphabets(args.alphabets) if args.alphabets else None
    cfg = ClosureConfig(_generators(args.generators), args.max_states, alphs, args.max_rounds,
                        args.jobs)
    res = closure_explore(cfg)
    if args.out:
        res.write(args.out)
    sys.stdout.write(res.report())
    return EXIT_OK


def _conjecture(args, fn) -> int:
    rep = fn(args.bound, jobs=args.jobs)
    if args.out:
        out = Path(args.out)
        rep.closure.write(out)
        (out / "conjecture.txt").write_text(rep.text())
    sys.stdout.write(rep.text())
    return EXIT_NO if rep.counterexamples else EXIT_OK


def cmd_conjecture_a(args) -> int:
    return _conjecture(args, conjecture_a_experiment)


def cmd_conjecture_b(args) -> int:
    return _conjecture(args, conjecture_b_experiment)


def cmd_fixtures(args) -> int:
    for p in write_fixtures(args.out or "."):
        print(p)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="forestlogic", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=None,
                    help="accepted for reproducible scripting; no subcommand is randomized")
    sub = ap.add_subparsers(dest="command", required=True)

    def forest_args(p):
        p.add_argument("forest_file", nargs="?", help="forest file (.fr)")
        p.add_argument("--forest", help="forest literal, e.g. '0(0+1)'")

    p = sub.add_parser("eval", help="value of a forest")
    p.add_argument("automaton")
    forest_args(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("member", help="membership test (exit 1 if not a member)")
    p.add_argument("automaton")
    forest_args(p)
    p.add_argument("--finals")
    p.set_defaults(fn=cmd_member)

    p = sub.add_parser("minimize", help="minimal automaton of a language")
    p.add_argument("automaton")
    p.add_argument("--finals")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_minimize)

    p = sub.add_parser("product", help="direct product")
    p.add_argument("automata", nargs="+")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_product)

    p = sub.add_parser("moore", help="Moore product with a control table file")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("control")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_moore)

    p = sub.add_parser("check", help="equation report (exit 1 on any non-PASS)")
    p.add_argument("automaton")
    p.add_argument("--equations")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("decide-ef", help="TL[EF] definability (exit 1 for NO)")
    p.add_argument("automaton")
    p.add_argument("--finals")
    p.set_defaults(fn=cmd_decide_ef)

    p = sub.add_parser("decompose-ef", help="membership certificate for the EF pseudovariety")
    p.add_argument("automaton")
    p.add_argument("--out")
    p.add_argument("--no-shortcut", action="store_true",
                   help="follow the inductive construction even for renamings of EF")
    p.set_defaults(fn=cmd_decompose_ef)

    p = sub.add_parser("verify", help="check a certificate against an automaton")
    p.add_argument("certificate")
    p.add_argument("automaton")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sat", help="forest satisfies formula (exit 1 if not)")
    p.add_argument("formula")
    forest_args(p)
    p.set_defaults(fn=cmd_sat)

    p = sub.add_parser("compile", help="minimal automaton of a formula")
    p.add_argument("formula")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("char-forest", help="characteristic forest for a modality's family")
    p.add_argument("formula")
    forest_args(p)
    p.set_defaults(fn=cmd_char_forest)

    p = sub.add_parser("explore", help="bounded closure exploration")
    p.add_argument("generators", nargs="+", help="EF, AF or automaton files")
    p.add_argument("--max-states", type=int, default=4)
    p.add_argument("--max-rounds", type=int, default=50)
    p.add_argument("--alphabets", help="file with one alphabet per line")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="result directory (report.txt and traces/)")
    p.set_defaults(fn=cmd_explore)

    for name, fn in (("conjecture-a", cmd_conjecture_a), ("conjecture-b", cmd_conjecture_b)):
        p = sub.add_parser(name, help="AF conjecture harness")
        p.add_argument("--bound", type=int, default=4)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out")
        p.set_defaults(fn=fn)

    p = sub.add_parser("fixtures", help="write the example files")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_fixtures)
    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except InternalInconsistency as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UsageError, ForestLogicError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
