import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (BIN, brute_congruences, brute_isomorphism, forests, random_monoid_automaton,
                     ref_eval, seeded_forests, tables)
from forestlogic.automaton import (Congruence, ForestAutomaton, RecognizedLanguage, af_automaton,
                                   build_powerset_automaton, canonical_key, congruence_from_pairs,
                                   connected_part, direct_product, dump_automaton, ef_automaton,
                                   enumerate_congruences, evaluate, evaluate_name, is_congruence,
                                   is_connected, is_homomorphism, is_isomorphic, load_automaton,
                                   make_automaton, member, minimize, moore_product, permute_states,
                                   quotient, rename, subautomaton, trivial_automaton, validate)
from forestlogic.errors import (AutomatonError, AutomatonFormatError, CongruenceError,
                                SizeGuardError, UnknownSymbolError)
from forestlogic.forest import Alphabet, Forest, Tree, parse_forest, relabel

EF, AF = ef_automaton(), af_automaton()
AB = Alphabet(("a", "b"))


def F(text, alph=BIN):
    return parse_forest(text, alph)


def names(A, blocks):
    return sorted(sorted(A.states[q] for q in b) for b in blocks)


@st.composite
def automata(draw, alphabet=AB, max_states=4):
    seed = draw(st.integers(0, 10**6))
    n = draw(st.integers(1, max_states))
    return random_monoid_automaton(random.Random(seed), alphabet, n)


# -- construction ------------------------------------------------------------------

def test_fixed_automata_valid():
    validate(EF)
    validate(AF)
    assert EF.states == ("0", "1") and EF.zero == 0
    assert AF.states[AF.zero] == "2"
    # 1.x = 1; 0.0 = 0.2 = 0; 0.1 = 1; plus is min
    assert [AF.states[q] for q in AF.action[AF.letter("1")]] == ["1", "1", "1"]
    assert [AF.states[q] for q in AF.action[AF.letter("0")]] == ["0", "1", "0"]
    assert all(AF.states[AF.plus[p][q]] == min(AF.states[p], AF.states[q])
               for p in range(3) for q in range(3))


def test_non_associative_rejected():
    # x+x = 0 (zero), so (x+x)+x = x while x+(x+x) = x ... use a 3-state table instead
    with pytest.raises(AutomatonError) as e:
        ForestAutomaton(AB, ("0", "x", "y"), 0,
                        ((0, 1, 2), (1, 2, 1), (2, 1, 1)), ((0, 0, 0), (0, 0, 0)))
    assert e.value.axiom == "associativity"
    w = e.value.witness
    S = {"0": 0, "x": 1, "y": 2}
    P = ((0, 1, 2), (1, 2, 1), (2, 1, 1))
    x, y, z = S[w["x"]], S[w["y"]], S[w["z"]]
    assert P[P[x][y]][z] != P[x][P[y][z]]


def test_non_unit_zero_rejected():
    with pytest.raises(AutomatonError) as e:
        ForestAutomaton(AB, ("0", "1"), 0, ((1, 1), (1, 1)), ((0, 0), (0, 0)))
    assert e.value.axiom == "unit"


def test_partial_tables_rejected():
    with pytest.raises(AutomatonError):
        ForestAutomaton(AB, ("0", "1"), 0, ((0, 1), (1, 1)), ((0, 1),))


# -- evaluation ---------------------------------------------------------------------

@pytest.mark.parametrize("text,state", [("1(0+0)", "1"), ("0(0+0(0))", "0"), ("()", "0"),
                                        ("0(0+1)", "1"), ("1", "1")])
def test_ef_values(text, state):
    assert evaluate_name(EF, F(text)) == state


def test_af_empty_forest():
    assert evaluate_name(AF, Forest()) == "2"


def test_membership_examples():
    LEF = RecognizedLanguage.of(EF, ["1"])
    LAF = RecognizedLanguage.of(AF, ["1"])
    assert member(LEF, F("0(0+1)"))
    assert member(LAF, F("1(0)"))
    assert not member(LEF, F("()"))


def test_unknown_symbol():
    with pytest.raises(UnknownSymbolError):
        evaluate(EF, parse_forest("a"))


@settings(max_examples=150, deadline=None)
@given(automata(), forests(AB))
def test_evaluation_matches_reference(A, s):
    plus, act, zero = tables(A)
    assert evaluate_name(A, s) == ref_eval(plus, act, zero, s)


@settings(max_examples=100, deadline=None)
@given(automata(), forests(AB), forests(AB))
def test_evaluation_is_a_homomorphism(A, s1, s2):
    assert evaluate(A, s1 + s2) == A.plus[evaluate(A, s1)][evaluate(A, s2)]
    for a in AB:
        t = Forest((Tree(a, s1),))
        assert evaluate(A, t) == A.act(a, evaluate(A, s1))


@settings(max_examples=100, deadline=None)
@given(automata(), st.sets(st.integers(0, 3)), forests(AB))
def test_complement(A, fin, s):
    L = RecognizedLanguage(A, frozenset(f for f in fin if f < A.n))
    assert member(L, s) != member(L.complement(), s)


# -- connected part, renaming -------------------------------------------------------

def test_connected_parts_of_fixed_automata():
    assert connected_part(EF) == EF
    assert connected_part(AF) == AF
    assert evaluate_name(AF, F("0")) == "0" and evaluate_name(AF, F("1")) == "1"


def test_unreachable_state_dropped():
    X = ForestAutomaton(BIN, ("0", "1", "u"), 0, ((0, 1, 2), (1, 1, 2), (2, 2, 2)),
                        ((0, 1, 2), (1, 1, 2)))
    assert not is_connected(X)
    C = connected_part(X)
    assert C.states == ("0", "1")
    assert is_isomorphic(C, EF) is not None


def test_rename_identity():
    R = rename(EF, BIN, {"0": "0", "1": "1"})
    assert R == EF


def test_rename_to_proof_alphabet():
    D = Alphabet(("l", "o", "e", "s"))
    B = rename(EF, D, {"l": "0", "e": "0", "s": "1", "o": "1"})
    assert B.plus == EF.plus
    assert B.action[D.index("l")] == B.action[D.index("e")] == EF.action[0]
    assert B.action[D.index("s")] == B.action[D.index("o")] == EF.action[1]


def test_rename_must_be_total():
    with pytest.raises(Exception):
        rename(EF, AB, {"a": "0"})


@settings(max_examples=100, deadline=None)
@given(automata(BIN), st.sets(st.integers(0, 3)), forests(AB),
       st.tuples(st.sampled_from("01"), st.sampled_from("01")))
def test_renaming_recognizes_inverse_image(A, fin, s, img):
    h = dict(zip("ab", img))
    fin = frozenset(f for f in fin if f < A.n)
    R = rename(A, AB, h)
    assert member(RecognizedLanguage(R, fin), s) == member(RecognizedLanguage(A, fin),
                                                           relabel(s, h))


# -- products --------------------------------------------------------------------------

def test_ef_squared():
    P = direct_product([EF, EF])
    assert evaluate_name(P, F("1")) == "(1,1)"


def test_product_alphabet_mismatch():
    with pytest.raises(AutomatonError):
        direct_product([EF, trivial_automaton(AB)])


def test_product_with_trivial():
    P = direct_product([AF, trivial_automaton(BIN)])
    assert is_isomorphic(P, AF) is not None


def test_powerset_as_product_of_renamings():
    H = Alphabet(("x", "y", "z"))
    Es = [rename(EF, H, {g: "1" if g == h else "0" for g in H}) for h in H]
    P = direct_product(Es)
    PH = build_powerset_automaton(H)
    iso = is_isomorphic(P, PH)
    assert iso is not None
    # the bijection is (e_h) -> {h : e_h = 1}
    for i, q in enumerate(P.states):
        bits = q.strip("()").split(",")
        want = "{" + ",".join(h for h, e in zip(H, bits) if e == "1") + "}"
        assert PH.states[iso[i]] == want


def test_powerset_automaton():
    P1 = build_powerset_automaton(["x"])
    assert P1.states == ("{}", "{x}")
    assert P1.states[P1.act("x", P1.state("{}"))] == "{x}"
    P2 = build_powerset_automaton(["x", "y"])
    assert P2.n == 4
    assert P2.states[P2.act("x", P2.state("{y}"))] == "{x,y}"
    assert P2.states[P2.plus[P2.state("{x}")][P2.state("{y}")]] == "{x,y}"


def test_moore_ef_ef_identity_control():
    M = moore_product(EF, EF, lambda a, p: EF.states[p])
    # hand recursion: 0 -> (0, 0) ; 1 . (0,0) = (1, alpha(1, 1) . 0) = (1, 1)
    # 0 . (1,1) = (1, alpha(0, 1) . 1) = (1, 1)
    assert evaluate_name(M, F("1")) == "(1,1)"
    assert evaluate_name(M, F("0(1)")) == "(1,1)"
    assert evaluate_name(M, F("0(0)")) == "(0,0)"


@settings(max_examples=80, deadline=None)
@given(automata(AB, 3), automata(BIN, 3), st.sampled_from("01"), forests(AB))
def test_moore_constant_control_is_renaming(A, B, c, s):
    M = moore_product(A, B, lambda a, p: c)
    R = rename(B, AB, {"a": c, "b": c})
    v = evaluate(M, s)
    assert v // B.n == evaluate(A, s)
    assert v % B.n == evaluate(R, s)


@settings(max_examples=80, deadline=None)
@given(automata(AB, 3), automata(BIN, 3), st.integers(0, 10**6), forests(AB))
def test_moore_action_definition(A, B, seed, s):
    rng = random.Random(seed)
    tab = {(a, A.states[p]): rng.choice("01") for a in AB for p in range(A.n)}
    M = moore_product(A, B, tab)

    def ref(f):  # independent recursion over pairs
        p, q = A.zero, B.zero
        for t in f.trees:
            tp, tq = ref(t.children)
            ap = A.act(t.label, tp)
            b = tab[(t.label, A.states[ap])]
            p, q = A.plus[p][ap], B.plus[q][B.act(b, tq)]
        return p, q

    p, q = ref(s)
    assert evaluate(M, s) == p * B.n + q


@settings(max_examples=50, deadline=None)
@given(automata(AB, 4))
def test_moore_with_trivial_right_factor(A):
    M = moore_product(A, trivial_automaton(BIN), lambda a, p: "0")
    assert is_isomorphic(M, A) is not None


@settings(max_examples=80, deadline=None)
@given(automata(AB, 3), automata(AB, 3), st.sets(st.integers(0, 2)),
       st.sets(st.integers(0, 2)), forests(AB))
def test_product_recognizes_intersection(A, B, f1, f2, s):
    f1 = {f for f in f1 if f < A.n}
    f2 = {f for f in f2 if f < B.n}
    P = direct_product([A, B])
    fin = frozenset(p * B.n + q for p in f1 for q in f2)
    assert member(RecognizedLanguage(P, fin), s) == (
        member(RecognizedLanguage(A, frozenset(f1)), s)
        and member(RecognizedLanguage(B, frozenset(f2)), s))


# -- congruences ----------------------------------------------------------------------

def test_principal_congruence_examples():
    assert congruence_from_pairs(EF, [(0, 1)]).is_total()
    c = congruence_from_pairs(AF, [(AF.state("0"), AF.state("1"))])
    assert names(AF, c.blocks) == [["0", "1"], ["2"]]
    assert congruence_from_pairs(AF, []).is_identity()


def test_enumerate_congruences_examples():
    cs = enumerate_congruences(EF)
    assert set(cs) == {Congruence.identity(2), Congruence.total(2)}
    cs = enumerate_congruences(AF)
    assert Congruence.identity(3) in cs and Congruence.total(3) in cs
    assert any(names(AF, c.blocks) == [["0", "1"], ["2"]] for c in cs)
    assert enumerate_congruences(trivial_automaton(BIN)) == [Congruence.identity(1)]
    assert cs[0].is_identity() and cs[-1].is_total()


def test_congruence_guard():
    big = build_powerset_automaton(["a", "b", "c", "d"])
    with pytest.raises(SizeGuardError):
        enumerate_congruences(big)
    assert len(enumerate_congruences(big, guard=16)) > 2


def test_from_blocks_errors():
    with pytest.raises(CongruenceError):
        Congruence.from_blocks(3, [[0, 1], [1, 2]])
    with pytest.raises(CongruenceError):
        Congruence.from_blocks(3, [[0, 1]])


@settings(max_examples=60, deadline=None)
@given(automata(AB, 5))
def test_enumeration_matches_brute_force(A):
    assert set(enumerate_congruences(A)) == brute_congruences(A)


@settings(max_examples=60, deadline=None)
@given(automata(AB, 5), st.integers(0, 4), st.integers(0, 4))
def test_principal_congruence_is_least(A, p, q):
    p, q = p % A.n, q % A.n
    c = congruence_from_pairs(A, [(p, q)])
    assert is_congruence(A, c) and c.related(p, q)
    for d in brute_congruences(A):
        if d.related(p, q):
            assert c.refines(d)


def test_quotient_examples():
    c = Congruence.from_blocks(3, [[0, 1], [2]])
    Q = quotient(AF, c)
    assert Q.n == 2
    assert is_isomorphic(quotient(AF, Congruence.identity(3)), AF) is not None
    assert quotient(AF, Congruence.total(3)).n == 1


def test_quotient_rejects_non_congruence():
    # {1,2} is not compatible in AF: 0.1 = 1 but 0.2 = 0
    with pytest.raises(CongruenceError):
        quotient(AF, Congruence.from_blocks(3, [[0], [1, 2]]))


@settings(max_examples=60, deadline=None)
@given(automata(AB, 4), st.integers(0, 100), st.sets(st.integers(0, 10)), forests(AB))
def test_quotient_recognition(A, pick, fin, s):
    cs = enumerate_congruences(A)
    theta = cs[pick % len(cs)]
    Q = quotient(A, theta)
    h = [theta.labels[q] for q in range(A.n)]
    assert is_homomorphism(A, Q, h)
    fq = frozenset(f for f in fin if f < Q.n)
    fa = frozenset(q for q in range(A.n) if h[q] in fq)
    assert member(RecognizedLanguage(A, fa), s) == member(RecognizedLanguage(Q, fq), s)


# -- minimization -------------------------------------------------------------------------

def test_minimize_product_gives_ef():
    P = direct_product([EF, EF])
    M = minimize(RecognizedLanguage.of(P, ["(1,1)"]))
    iso = is_isomorphic(M.automaton, EF)
    assert iso is not None
    assert [EF.states[iso[f]] for f in M.finals] == ["1"]
    M2 = minimize(RecognizedLanguage.of(EF, ["1"]))
    assert is_isomorphic(M2.automaton, EF) is not None


def test_minimize_empty_language():
    M = minimize(RecognizedLanguage(AF, frozenset()))
    assert M.automaton.n == 1 and not M.finals


@settings(max_examples=40, deadline=None)
@given(automata(AB, 4), st.sets(st.integers(0, 3)), st.integers(0, 1000))
def test_minimize_preserves_language_and_is_idempotent(A, fin, seed):
    L = RecognizedLanguage(A, frozenset(f for f in fin if f < A.n))
    M = minimize(L)
    MM = minimize(M)
    assert is_isomorphic(M.automaton, MM.automaton) is not None
    for s in seeded_forests(AB, 1000, 4, 3, seed=seed):
        assert member(L, s) == member(M, s)


# -- isomorphism -------------------------------------------------------------------------

def test_iso_examples():
    swapped = permute_states(EF, [1, 0])
    iso = is_isomorphic(EF, swapped)
    assert iso is not None
    assert {EF.states[k]: swapped.states[v] for k, v in iso.items()} == {"0": "0", "1": "1"}
    assert is_isomorphic(EF, AF) is None
    with pytest.raises(AutomatonError):
        is_isomorphic(EF, trivial_automaton(AB))


@settings(max_examples=100, deadline=None)
@given(automata(AB, 4), automata(AB, 4), st.permutations(range(4)))
def test_iso_agrees_with_brute_force(A, B, perm):
    order = [p for p in perm if p < A.n]
    C = permute_states(A, order)
    m = is_isomorphic(A, C)
    assert m is not None and is_homomorphism(A, C, [m[q] for q in range(A.n)])
    assert (is_isomorphic(A, B) is None) == (brute_isomorphism(A, B) is None)


@settings(max_examples=100, deadline=None)
@given(automata(AB, 4), automata(AB, 4), st.permutations(range(4)))
def test_canonical_key_is_exact(A, B, perm):
    A, B = connected_part(A), connected_part(B)
    order = [p for p in perm if p < A.n]
    assert canonical_key(A) == canonical_key(permute_states(A, order))
    assert (canonical_key(A) == canonical_key(B)) == (brute_isomorphism(A, B) is not None)


# -- text format --------------------------------------------------------------------------

def test_dump_load_round_trip():
    text = dump_automaton(AF, [AF.state("1")])
    B, fin = load_automaton(text)
    assert B == AF and fin == {AF.state("1")}
    C, fin2 = load_automaton(dump_automaton(EF))
    assert C == EF and fin2 is None


def test_load_rejects_missing_and_duplicate():
    text = dump_automaton(EF)
    lines = text.splitlines()
    missing = "\n".join(l for l in lines if l != "plus: 1 1 -> 1")
    with pytest.raises(AutomatonFormatError):
        load_automaton(missing)
    with pytest.raises(AutomatonFormatError):
        load_automaton(text + "action: 0 0 -> 0\n")
    with pytest.raises(AutomatonFormatError):
        load_automaton(text.replace("action: 1 0 -> 1", "action: 2 0 -> 1"))


def test_load_runs_validation():
    text = dump_automaton(EF).replace("plus: 0 1 -> 1", "plus: 0 1 -> 0")
    with pytest.raises(AutomatonError):
        load_automaton(text)


def test_make_automaton_and_subautomaton():
    A = make_automaton(BIN, ["0", "1"], "0", lambda p, q: max(p, q), lambda a, q: max(a, q))
    assert A == EF
    S = subautomaton(AF, [AF.state("2"), AF.state("0"), AF.state("1")])
    assert S.n == 3
