"""Shared generators and brute-force oracles for the test suite."""

import itertools

from hypothesis import strategies as st

from forestlogic.automaton import _trusted
from forestlogic.enumeration import semilattice_monoids
from forestlogic.forest import Alphabet, Forest, Tree

BIN = Alphabet(("0", "1"))
ABC = Alphabet(("a", "b", "c"))


def forests(alphabet, max_leaves=12):
    labels = st.sampled_from(alphabet.symbols)
    leaf = st.builds(lambda a: Tree(a, Forest()), labels)
    trees = st.recursive(
        leaf,
        lambda kids: st.builds(lambda a, ks: Tree(a, Forest(tuple(ks))), labels,
                               st.lists(kids, max_size=3)),
        max_leaves=max_leaves)
    return st.lists(trees, max_size=3).map(lambda ts: Forest(tuple(ts)))


# -- reference evaluation over plain dict tables ---------------------------------

def ref_eval(plus, act, zero, s):
    """Evaluate with name-keyed dictionaries; independent of the index encoding."""
    v = zero
    for t in s.trees:
        v = plus[(v, act[(t.label, ref_eval(plus, act, zero, t.children))])]
    return v


def tables(A):
    S = A.states
    plus = {(S[p], S[q]): S[A.plus[p][q]] for p in range(A.n) for q in range(A.n)}
    act = {(a, S[q]): S[A.action[i][q]] for i, a in enumerate(A.alphabet) for q in range(A.n)}
    return plus, act, S[A.zero]


# -- random automata -----------------------------------------------------------------

_SEMI = {n: list(semilattice_monoids(n)) for n in range(1, 6)}


def random_semilattice_automaton(rng, alphabet, n, letter_ok=None, tries=200):
    """Random semilattice automaton on n states with letter maps satisfying ``letter_ok``."""
    P = rng.choice(_SEMI[n])
    maps = [f for f in itertools.product(range(n), repeat=n)
            if letter_ok is None or letter_ok(n, P, f)]
    if not maps:
        return None
    acts = tuple(rng.choice(maps) for _ in alphabet)
    return _trusted(alphabet, [str(i) for i in range(n)], 0, P, acts, name="R")


def random_monoid_automaton(rng, alphabet, n):
    """Random automaton whose monoid is a (possibly non-commutative) random choice.

    Uses semilattices, cyclic groups, and right/left-zero semigroups with an
    adjoined unit, plus random actions.
    """
    kind = rng.randrange(4)
    if kind == 0 or n == 1:
        P = rng.choice(_SEMI[n])
    elif kind == 1:
        # x + y = y for y != 0 (right-zero semigroup with adjoined unit)
        P = tuple(tuple(x if y == 0 else y for y in range(n)) for x in range(n))
    elif kind == 3:
        P = tuple(tuple((x + y) % n for y in range(n)) for x in range(n))
    else:
        # x + y = x for x != 0 (left-zero semigroup with adjoined unit)
        P = tuple(tuple(y if x == 0 else x for y in range(n)) for x in range(n))
    acts = tuple(tuple(rng.randrange(n) for _ in range(n)) for _ in alphabet)
    return _trusted(alphabet, [str(i) for i in range(n)], 0, P, acts, name="R")


# -- brute-force oracles ---------------------------------------------------------------

def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def brute_congruences(A):
    from forestlogic.automaton import Congruence, is_congruence
    out = set()
    for part in set_partitions(range(A.n)):
        c = Congruence.from_blocks(A.n, part)
        if is_congruence(A, c):
            out.add(c)
    return out


def brute_isomorphism(A, B):
    if A.n != B.n or A.alphabet != B.alphabet:
        return None
    for perm in itertools.permutations(range(B.n)):
        if perm[A.zero] != B.zero:
            continue
        if all(perm[A.plus[p][q]] == B.plus[perm[p]][perm[q]]
               for p in range(A.n) for q in range(A.n)) and \
                all(perm[row[p]] == B.action[a][perm[p]]
                    for a, row in enumerate(A.action) for p in range(A.n)):
            return perm
    return None


def seeded_forests(alphabet, count, max_depth=4, max_arity=3, seed=0):
    from forestlogic.forest import random_forests
    return random_forests(alphabet, count, max_depth, max_arity, seed)


# -- independent equation oracles (plain loops over the tables) -----------------------

def o_semilattice(A):
    r = range(A.n)
    return all(A.plus[x][y] == A.plus[y][x] for x in r for y in r) and \
        all(A.plus[x][x] == x for x in r)


def o_letter_idempotent(A):
    return all(row[row[x]] == row[x] for row in A.action for x in range(A.n))


def o_ef_decreasing(A):
    # ax <= x  iff  ax = ax + x
    return all(A.plus[row[x]][x] == row[x] for row in A.action for x in range(A.n))


def o_reachable(A):
    seen = {A.zero}
    while True:
        new = {A.plus[p][q] for p in seen for q in seen} | \
            {row[p] for row in A.action for p in seen}
        if new <= seen:
            return seen
        seen |= new


def o_positive(A):
    """Only the empty forest reaches zero: no tree value and no sum of nonzero values is zero."""
    R = o_reachable(A)
    nz = R - {A.zero}
    return all(row[p] != A.zero for row in A.action for p in R) and \
        all(A.plus[p][q] != A.zero for p in nz for q in nz)


def o_core_increasing(A):
    """p <= ap on the reachable nonzero states (p = p + ap)."""
    nz = o_reachable(A) - {A.zero}
    return all(A.plus[p][row[p]] == p for row in A.action for p in nz)


# -- random formulas beyond the library generator -------------------------------------

def random_tree_formula(alphabet, rng, depth=2):
    from forestlogic.logic import And, EF, Letter, Not, Or, random_formula
    if depth <= 0:
        return Letter(rng.choice(alphabet.symbols))
    k = rng.randrange(5)
    if k == 0:
        return Letter(rng.choice(alphabet.symbols))
    if k == 1:
        return Not(random_tree_formula(alphabet, rng, depth - 1))
    if k == 2:
        return And(random_tree_formula(alphabet, rng, depth - 1),
                   random_tree_formula(alphabet, rng, depth - 1))
    if k == 3:
        return Or(random_tree_formula(alphabet, rng, depth - 1),
                  random_tree_formula(alphabet, rng, depth - 1))
    if rng.random() < 0.5:
        return EF(random_tree_formula(alphabet, rng, depth - 1))
    return random_formula(alphabet, depth - 1, rng, ("EF", "AF"))


def random_family(alphabet, delta, rng, depth=2):
    return [(d, random_tree_formula(alphabet, rng, depth)) for d in delta]
