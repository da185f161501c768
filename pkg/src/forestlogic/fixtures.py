"""Canonical example objects and their file renderings."""

from __future__ import annotations

from pathlib import Path

from .automaton import (ForestAutomaton, RecognizedLanguage, af_automaton, dump_automaton,
                        ef_automaton, make_automaton)
from .forest import Alphabet, parse_forest
from .logic import ModalityLibrary, parse_formula
from .varieties import aux_automaton, b_automaton

EXAMPLE1_ALPHABET = Alphabet(("a", "b", "c", "d"))
EXAMPLE1_FOREST = "d(b(a)+a(d+a+b))+c"
EXAMPLE4_FORMULA = "EX[LEX](0 -> a|c, 1 -> b|c)"
EXAMPLE5_CHARACTERISTIC = "1(1(0)+0(1+0+1))+0"

# membership lists attached to the fixed automata
EF_MEMBERS = ["1", "0(0+1)", "1(0+0)"]
EF_NON_MEMBERS = ["()", "0", "0(0+0(0))"]
LEX_MEMBERS = ["0(1(0))+0(1)"]
LEX_NON_MEMBERS = ["()", "0+1", "0(0(1+0)+0)+0"]


def lex_automaton() -> ForestAutomaton:
    """Forests with a node labelled 1 directly below some root.

    State ``xy``: x records a root labelled 1, y a root with a child labelled 1.
    """
    sigma = Alphabet(("0", "1"))

    def plus(p, q):
        return "".join(str(int(u) | int(v)) for u, v in zip(p, q))

    return make_automaton(sigma, ["00", "10", "01", "11"], "00", plus,
                          lambda a, q: ("1" if a == "1" else "0") + q[0], name="LEX")


def lex_language() -> RecognizedLanguage:
    return RecognizedLanguage.of(lex_automaton(), ["01", "11"])


def ef_language() -> RecognizedLanguage:
    return RecognizedLanguage.of(ef_automaton(), ["1"])


def af_language() -> RecognizedLanguage:
    return RecognizedLanguage.of(af_automaton(), ["1"])


def example1_forest():
    return parse_forest(EXAMPLE1_FOREST, EXAMPLE1_ALPHABET)


def example4_formula():
    lib = ModalityLibrary({"LEX": lex_language()})
    return parse_formula(EXAMPLE4_FORMULA, EXAMPLE1_ALPHABET, lib)


def fixture_files() -> dict[str, str]:
    return {
        "ef.aut": dump_automaton(ef_automaton(), ef_language().finals),
        "af.aut": dump_automaton(af_automaton(), af_language().finals),
        "lex.aut": dump_automaton(lex_automaton(), lex_language().finals),
        "example1.fr": f"alphabet: {EXAMPLE1_ALPHABET}\n{EXAMPLE1_FOREST}\n",
        "example4.fml": (f"alphabet: {EXAMPLE1_ALPHABET}\n"
                         "modality: LEX lex.aut\n"
                         f"formula: {EXAMPLE4_FORMULA}\n"),
        "aux.aut": dump_automaton(_named(aux_automaton(), "Aux")),
        "b.aut": dump_automaton(_named(b_automaton(), "B")),
    }


def _named(A: ForestAutomaton, name: str) -> ForestAutomaton:
    return ForestAutomaton(A.alphabet, A.states, A.zero, A.plus, A.action, name, trusted=True)


def write_fixtures(out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in fixture_files().items():
        p = out / name
        p.write_text(text)
        paths.append(p)
    return paths
