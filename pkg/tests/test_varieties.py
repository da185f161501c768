import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (BIN, o_core_increasing, o_ef_decreasing, o_letter_idempotent, o_positive,
                     o_semilattice, random_monoid_automaton, random_semilattice_automaton)
from forestlogic.automaton import (Congruence, RecognizedLanguage, af_automaton, connected_part,
                                   ef_automaton, enumerate_congruences, is_congruence,
                                   make_automaton, quotient, trivial_automaton)
from forestlogic.enumeration import af_letter, ef_letter, enumerate_automata
from forestlogic.errors import AutomatonError
from forestlogic.forest import Alphabet
from forestlogic.varieties import (ALL_EQUATIONS, EF_EQUATIONS, FAIL, NA, PASS,
                                   atom_congruence, bottom, check_af_necessary, check_equations,
                                   decide_ef_definable, find_ladder_congruences,
                                   is_ladder_congruence, is_subdirectly_reducible,
                                   ladder_reconstruction, ladder_violation,
                                   minimal_nontrivial_congruences, passes, semilattice_atoms)

EF, AF = ef_automaton(), af_automaton()


def meet_automaton(order, meet, letters):
    """Semilattice automaton with zero = top; each letter x acts as q -> q meet x."""
    alph = Alphabet(tuple(letters))
    return make_automaton(alph, order, order[0], meet, lambda a, q: meet(a, q))


def chain():
    rank = {"a": 2, "b": 1, "c": 0}
    return meet_automaton(["a", "b", "c"], lambda p, q: min(p, q, key=rank.get), ["b", "c"])


def diamond():
    def meet(p, q):
        if p == q:
            return p
        if p == "a":
            return q
        if q == "a":
            return p
        return "d"
    return meet_automaton(["a", "b", "c", "d"], meet, ["b", "c"])


def names(A, c):
    return sorted(sorted(A.states[q] for q in b) for b in c.blocks)


# -- equations ---------------------------------------------------------------------------

def test_ef_passes_ef_equations():
    rep = check_equations(EF, EF_EQUATIONS)
    assert all(rep.verdict(e) == PASS for e in EF_EQUATIONS)


def test_af_fails_ef_decreasing_with_witness():
    r = check_equations(AF, EF_EQUATIONS).results["EF_DECREASING"]
    assert r.verdict == FAIL and r.witness == {"a": "1", "x": "0"}
    assert r.line() == "EF_DECREASING FAIL a=1 x=0 (ax + x != ax)"


def test_af_passes_af_equations():
    rep = check_equations(AF, ["POSITIVE", "CORE_INCREASING", "ZERO_ACTION", "CORE_IMPLICATION"])
    assert rep.all_pass()
    assert check_af_necessary(AF).all_pass()


def test_ef_not_positive():
    rep = check_af_necessary(EF)
    assert rep.verdict("POSITIVE") == FAIL
    assert rep.results["POSITIVE"].witness == {"a": "0", "x": "0"}
    assert rep.verdict("CORE_INCREASING") == NA
    assert rep.verdict("CORE_IMPLICATION") == NA


def test_trivial_flagged():
    rep = check_af_necessary(trivial_automaton(BIN))
    assert rep.trivial
    assert "# trivial" in rep.serialize()


def test_unknown_equation():
    with pytest.raises(ValueError):
        check_equations(EF, ["NOPE"])


def test_connected_part_recorded():
    from forestlogic.automaton import ForestAutomaton
    # the unreachable state u is sent to zero, which only matters off the connected part
    X = ForestAutomaton(BIN, tuple(_ST), 0, AF_WITH_JUNK_PLUS, AF_WITH_JUNK_ACT)
    rep = check_equations(X, ["POSITIVE"])
    assert rep.connected_part_taken and rep.holds("POSITIVE")


# AF with an extra unreachable absorbing state u, states ordered 2 1 0 u (zero first)
_ST = ["2", "1", "0", "u"]


def _plus(p, q):
    if "u" in (p, q):
        return "u"
    return str(min(int(p), int(q)))


AF_WITH_JUNK_PLUS = tuple(tuple(_ST.index(_plus(p, q)) for q in _ST) for p in _ST)
AF_WITH_JUNK_ACT = (
    tuple(_ST.index(x) for x in ["0", "1", "0", "2"]),  # letter 0; u -> 2 (zero!)
    tuple(_ST.index(x) for x in ["1", "1", "1", "1"]),  # letter 1
)


def _recheck(A, r):
    """Re-derive a FAIL verdict from its witness."""
    C = connected_part(A)
    S = {q: i for i, q in enumerate(C.states)}
    w = r.witness
    P = C.plus
    if r.equation == "SEMILATTICE":
        x = S[w["x"]]
        if "y" in w:
            y = S[w["y"]]
            return P[x][y] != P[y][x]
        return P[x][x] != x
    a = C.alphabet.index(w["a"]) if "a" in w else None
    if r.equation == "LETTER_IDEMPOTENT":
        x = S[w["x"]]
        row = C.action[a]
        return row[row[x]] != row[x]
    if r.equation == "EF_DECREASING":
        x = S[w["x"]]
        ax = C.action[a][x]
        return P[ax][x] != ax
    if r.equation == "POSITIVE":
        if a is not None:
            return C.action[a][S[w["x"]]] == C.zero
        return P[S[w["x"]]][S[w["y"]]] == C.zero
    if r.equation == "ZERO_ACTION":
        return C.action[a][C.zero] != C.action[a][S[w["bottom"]]]
    if r.equation == "CORE_INCREASING":
        x = S[w["x"]]
        return P[x][C.action[a][x]] != x
    if r.equation == "CORE_IMPLICATION":
        x, y = S[w["x"]], S[w["y"]]
        ax = C.action[a][x]
        return P[x][y] == x and P[y][ax] == y and C.action[a][y] != ax
    raise AssertionError(r.equation)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.booleans())
def test_failures_carry_checkable_witnesses(seed, n, semi):
    rng = random.Random(seed)
    alph = Alphabet(("a", "b"))
    A = (random_semilattice_automaton(rng, alph, n) if semi
         else random_monoid_automaton(rng, alph, n))
    A = connected_part(A)
    rep = check_equations(A, ALL_EQUATIONS)
    for r in rep.failures():
        if r.verdict == FAIL:
            assert _recheck(A, r), r.line()
    # verdicts agree with the plain-loop oracles
    assert rep.holds("SEMILATTICE") == o_semilattice(A)
    assert rep.holds("LETTER_IDEMPOTENT") == o_letter_idempotent(A)
    assert rep.holds("POSITIVE") == o_positive(A)
    if o_semilattice(A):
        assert rep.holds("EF_DECREASING") == o_ef_decreasing(A)
        if o_positive(A):
            assert rep.holds("CORE_INCREASING") == o_core_increasing(A)


# -- decision ---------------------------------------------------------------------------------

def test_decide_examples():
    assert decide_ef_definable(RecognizedLanguage.of(EF, ["1"])).definable
    d = decide_ef_definable(RecognizedLanguage.of(AF, ["1"]))
    assert not d.definable and d.report.verdict("EF_DECREASING") == FAIL
    assert decide_ef_definable(RecognizedLanguage(trivial_automaton(BIN), frozenset())).definable


# -- atoms and congruences --------------------------------------------------------------------

def test_atoms():
    assert [EF.states[x] for x in semilattice_atoms(EF)] == ["0"]
    C = chain()
    assert [C.states[x] for x in semilattice_atoms(C)] == ["b"]
    D = diamond()
    assert sorted(D.states[x] for x in semilattice_atoms(D)) == ["b", "c"]
    with pytest.raises(AutomatonError):
        semilattice_atoms(trivial_automaton(BIN))


def test_atom_congruences():
    assert atom_congruence(EF, EF.state("0")).is_total()
    C = chain()
    c = atom_congruence(C, C.state("b"))
    assert names(C, c) == [["a"], ["b", "c"]]
    D = diamond()
    assert names(D, atom_congruence(D, D.state("b"))) == [["a"], ["b", "d"], ["c"]]


def test_subdirect_reducibility():
    assert is_subdirectly_reducible(EF) is None
    assert is_subdirectly_reducible(trivial_automaton(BIN)) is None
    D = diamond()
    pair = is_subdirectly_reducible(D)
    assert pair is not None
    c1, c2 = pair
    assert c1.meet(c2).is_identity() and not c1.is_identity() and not c2.is_identity()
    tb, tc = atom_congruence(D, D.state("b")), atom_congruence(D, D.state("c"))
    assert tb.meet(tc).is_identity()


EF3 = [A for al in (Alphabet(("0",)), BIN) for A in enumerate_automata(al, 4, ef_letter)]
AF4 = [A for A in enumerate_automata(BIN, 4, af_letter, lambda A: check_af_necessary(A).all_pass())]


@pytest.mark.parametrize("A", [A for A in EF3 if A.n >= 2], ids=lambda A: A.name)
def test_atom_congruence_properties(A):
    for p in semilattice_atoms(A):
        theta = atom_congruence(A, p)
        assert is_congruence(A, theta)
        assert quotient(A, theta).n == A.n - 1
        assert theta.related(p, bottom(A))


@pytest.mark.parametrize("A", EF3, ids=lambda A: A.name)
def test_quotients_preserve_ef_equations(A):
    for theta in enumerate_congruences(A):
        assert passes(quotient(A, theta), EF_EQUATIONS)


@pytest.mark.parametrize("A", AF4, ids=lambda A: A.name)
def test_quotients_preserve_af_conditions(A):
    for theta in enumerate_congruences(A):
        Q = quotient(A, theta)
        if Q.n > 1:
            assert check_af_necessary(Q).all_pass()


# -- ladders ------------------------------------------------------------------------------------

def test_af_ladder():
    rep = find_ladder_congruences(AF)
    ladders = [names(AF, c) for c in rep.ladders()]
    assert [["0", "1"], ["2"]] in ladders
    assert all(not e.congruence.is_identity() for e in rep.entries)
    assert "LADDER" in rep.serialize(AF)


def test_ef_total_is_ladder():
    assert is_ladder_congruence(EF, Congruence.total(2))


def test_ladder_clause_violations():
    # three-element class
    assert "class-size" in ladder_violation(diamond(), Congruence.total(4))
    D = diamond()
    # {b,c} are incomparable
    c = Congruence.from_blocks(4, [[0], [1, 2], [3]])
    assert ladder_violation(D, c).startswith("incomparable")


def test_minimal_congruence_of_af():
    mins = minimal_nontrivial_congruences(AF)
    assert len(mins) == 1 and names(AF, mins[0]) == [["0", "1"], ["2"]]


def test_ladder_reconstruction_of_af():
    theta = minimal_nontrivial_congruences(AF)[0]
    assert ladder_reconstruction(AF, theta) is not None


def test_ladder_matches_clause_oracle():
    """Re-derive every ladder verdict clause by clause on the enumerated AF-like automata."""
    for A in AF4:
        lab = None
        for theta in enumerate_congruences(A):
            if theta.is_identity():
                continue
            lab = theta.labels
            want = True
            if any(len(b) > 2 for b in theta.blocks):
                want = False
            else:
                for C in [b for b in theta.blocks if len(b) == 2]:
                    x, y = C
                    if A.plus[x][y] == x:
                        p, q = x, y
                    elif A.plus[x][y] == y:
                        p, q = y, x
                    else:
                        want = False
                        break
                    for row in A.action:
                        if p not in row:
                            continue
                        for D in theta.blocks:
                            if D == C or lab[row[D[0]]] != lab[p]:
                                continue
                            if len(D) == 1:
                                want &= row[D[0]] == p
                            else:
                                r, s = D if A.plus[D[0]][D[1]] == D[0] else D[::-1]
                                want &= row[r] == p and row[s] == q
            assert is_ladder_congruence(A, theta) == want
