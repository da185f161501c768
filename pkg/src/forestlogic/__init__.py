"""Forest automata, forest temporal logics and Moore pseudovarieties."""

from .automaton import (Congruence, ForestAutomaton, RecognizedLanguage, af_automaton,
                        build_powerset_automaton, congruence_from_pairs, connected_part,
                        direct_product, ef_automaton, enumerate_congruences, evaluate,
                        is_isomorphic, load_automaton, dump_automaton, make_automaton, member,
                        minimize, moore_product, quotient, rename, validate)
from .forest import Alphabet, Forest, Tree, parse_forest, random_forest, render_forest
from .logic import (ModalityLibrary, characteristic_forest, compile, determinize_family,
                    inverse_literal_formula, parse_formula, satisfies, substitute)
from .varieties import (check_af_necessary, check_equations, decide_ef_definable, decompose_ef,
                        find_ladder_congruences)
from .certificates import verify_certificate
from .explorer import (ClosureConfig, closure_explore, conjecture_a_experiment,
                       conjecture_b_experiment)

__version__ = "0.1.0"

__all__ = [
    "Congruence",
    "ForestAutomaton",
    "RecognizedLanguage",
    "af_automaton",
    "build_powerset_automaton",
    "congruence_from_pairs",
    "connected_part",
    "direct_product",
    "ef_automaton",
    "enumerate_congruences",
    "evaluate",
    "is_isomorphic",
    "load_automaton",
    "dump_automaton",
    "make_automaton",
    "member",
    "minimize",
    "moore_product",
    "quotient",
    "rename",
    "validate",
    "Alphabet",
    "Forest",
    "Tree",
    "parse_forest",
    "random_forest",
    "render_forest",
    "ModalityLibrary",
    "characteristic_forest",
    "compile",
    "determinize_family",
    "inverse_literal_formula",
    "parse_formula",
    "satisfies",
    "substitute",
    "check_af_necessary",
    "check_equations",
    "decide_ef_definable",
    "decompose_ef",
    "find_ladder_congruences",
    "verify_certificate",
    "ClosureConfig",
    "closure_explore",
    "conjecture_a_experiment",
    "conjecture_b_experiment",
]
