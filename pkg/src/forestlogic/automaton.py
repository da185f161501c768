"""Finite forest automata and the operations on them.

A forest automaton is a finite monoid ``(Q, +, 0)`` together with a total
action of the letters of an alphabet on ``Q``.  Forests are evaluated bottom
up: ``a(s)`` evaluates to ``a . s`` and a sum of trees to the sum of their
values.  States are identified by position; every state also carries a name
used by the text format and by certificates.

Automata built from trusted pieces (products, quotients, renamings of valid
automata) skip the cubic associativity scan; anything constructed directly or
loaded from text is validated eagerly.
"""

from __future__ import annotations

import hashlib
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (AutomatonError, AutomatonFormatError, CongruenceError,
                     SizeGuardError, UnknownSymbolError)
from .forest import Alphabet, Forest, Tree

DEFAULT_CONGRUENCE_GUARD = 10


@dataclass(frozen=True)
class ForestAutomaton:
    alphabet: Alphabet
    states: tuple[str, ...]
    zero: int
    plus: tuple[tuple[int, ...], ...]
    action: tuple[tuple[int, ...], ...]  # action[letter index][state]
    name: str = field(default="A", compare=False)
    trusted: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        n = len(self.states)
        if n == 0:
            raise AutomatonError("an automaton needs at least one state", "nonempty")
        if len(set(self.states)) != n:
            raise AutomatonError("duplicate state names", "names")
        for q in self.states:
            if not q or any(ch.isspace() for ch in q):
                raise AutomatonError(f"invalid state name {q!r}", "names")
        if not 0 <= self.zero < n:
            raise AutomatonError("zero is not a state", "zero")
        if len(self.plus) != n or any(len(row) != n for row in self.plus):
            raise AutomatonError("plus table is not |Q| x |Q|", "total")
        if len(self.action) != len(self.alphabet) or any(len(row) != n for row in self.action):
            raise AutomatonError("action table is not |Sigma| x |Q|", "total")
        for row in itertools.chain(self.plus, self.action):
            for v in row:
                if not 0 <= v < n:
                    raise AutomatonError(f"table entry {v} out of range", "total")
        object.__setattr__(self, "_index", {q: i for i, q in enumerate(self.states)})
        if not self.trusted:
            validate(self)

    @property
    def n(self) -> int:
        return len(self.states)

    def state(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise AutomatonError(f"unknown state {name!r}", "names") from None

    def letter(self, symbol: str) -> int:
        return self.alphabet.index(symbol)

    def act(self, symbol: str, q: int) -> int:
        return self.action[self.alphabet.index(symbol)][q]

    def add(self, p: int, q: int) -> int:
        return self.plus[p][q]

    def sum(self, qs: Iterable[int]) -> int:
        v = self.zero
        for q in qs:
            v = self.plus[v][q]
        return v

    def __str__(self) -> str:
        return dump_automaton(self)


def make_automaton(alphabet: Alphabet, states: Sequence[str], zero: str,
                   plus: Callable[[str, str], str], action: Callable[[str, str], str],
                   name: str = "A") -> ForestAutomaton:
    """Build an automaton from operation functions on state names."""
    states = tuple(states)
    index = {q: i for i, q in enumerate(states)}
    plus_tab = tuple(tuple(index[plus(p, q)] for q in states) for p in states)
    act_tab = tuple(tuple(index[action(a, q)] for q in states) for a in alphabet)
    return ForestAutomaton(alphabet, states, index[zero], plus_tab, act_tab, name)


def _trusted(alphabet, states, zero, plus, action, name="A") -> ForestAutomaton:
    return ForestAutomaton(alphabet, tuple(states), zero, plus, action, name, trusted=True)


def validate(A: ForestAutomaton) -> None:
    """Check the monoid axioms; raise AutomatonError naming a witness on failure."""
    P, z, S = A.plus, A.zero, A.states
    for p in range(A.n):
        if P[z][p] != p or P[p][z] != p:
            raise AutomatonError(
                f"zero {S[z]} is not a two-sided unit for {S[p]}", "unit", {"x": S[p]})
    for p in range(A.n):
        Pp = P[p]
        for q in range(A.n):
            pq = Pp[q]
            Pq = P[q]
            for r in range(A.n):
                if P[pq][r] != Pp[Pq[r]]:
                    raise AutomatonError(
                        f"plus is not associative on ({S[p]}, {S[q]}, {S[r]})",
                        "associativity", {"x": S[p], "y": S[q], "z": S[r]})


@dataclass(frozen=True)
class RecognizedLanguage:
    automaton: ForestAutomaton
    finals: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "finals", frozenset(self.finals))
        if any(not 0 <= f < self.automaton.n for f in self.finals):
            raise AutomatonError("final states must be states of the automaton", "finals")

    @classmethod
    def of(cls, A: ForestAutomaton, finals: Iterable[str]) -> "RecognizedLanguage":
        return cls(A, frozenset(A.state(f) for f in finals))

    def final_names(self) -> list[str]:
        return [self.automaton.states[f] for f in sorted(self.finals)]

    def complement(self) -> "RecognizedLanguage":
        return RecognizedLanguage(self.automaton, frozenset(range(self.automaton.n)) - self.finals)


# -- evaluation ----------------------------------------------------------------

def evaluate(A: ForestAutomaton, s: Tree | Forest) -> int:
    """Value of a forest (or of a tree viewed as a one-tree forest) in ``A``."""
    P, act, idx = A.plus, A.action, A.alphabet._index

    def ev_forest(f: Forest) -> int:
        v = A.zero
        for t in f.trees:
            v = P[v][ev_tree(t)]
        return v

    def ev_tree(t: Tree) -> int:
        try:
            a = idx[t.label]
        except KeyError:
            raise UnknownSymbolError(t.label, A.alphabet.symbols) from None
        return act[a][ev_forest(t.children)]

    if isinstance(s, Tree):
        return P[A.zero][ev_tree(s)]
    return ev_forest(s)


def evaluate_name(A: ForestAutomaton, s: Tree | Forest) -> str:
    return A.states[evaluate(A, s)]


def member(L: RecognizedLanguage, s: Tree | Forest) -> bool:
    return evaluate(L.automaton, s) in L.finals


# -- subautomata -----------------------------------------------------------------

def reachable_states(A: ForestAutomaton) -> list[int]:
    """States generated by zero under plus and the letter actions, in state order."""
    seen = {A.zero}
    order = [A.zero]
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        new = [row[x] for row in A.action]
        for y in order[:i]:
            new.append(A.plus[x][y])
            new.append(A.plus[y][x])
        for v in new:
            if v not in seen:
                seen.add(v)
                order.append(v)
    return sorted(seen)


def is_connected(A: ForestAutomaton) -> bool:
    return len(reachable_states(A)) == A.n


def subautomaton(A: ForestAutomaton, keep: Iterable[int], name: str | None = None) -> ForestAutomaton:
    """Restriction of ``A`` to a subset closed under plus and actions (order inherited)."""
    keep = sorted(set(keep))
    pos = {q: i for i, q in enumerate(keep)}
    if A.zero not in pos:
        raise AutomatonError("a subautomaton must contain zero", "subautomaton")
    try:
        plus = tuple(tuple(pos[A.plus[p][q]] for q in keep) for p in keep)
        action = tuple(tuple(pos[row[q]] for q in keep) for row in A.action)
    except KeyError:
        raise AutomatonError("subset is not closed under the operations", "subautomaton") from None
    return _trusted(A.alphabet, [A.states[q] for q in keep], pos[A.zero], plus, action,
                    name or A.name)


def connected_part(A: ForestAutomaton) -> ForestAutomaton:
    reach = reachable_states(A)
    if len(reach) == A.n:
        return A
    return subautomaton(A, reach)


def subautomata(A: ForestAutomaton) -> list[ForestAutomaton]:
    """All subautomata of ``A`` (subsets containing zero closed under the operations)."""
    others = [q for q in range(A.n) if q != A.zero]
    out = []
    for k in range(len(others) + 1):
        for combo in itertools.combinations(others, k):
            keep = set(combo) | {A.zero}
            if all(A.plus[p][q] in keep for p in keep for q in keep) and \
                    all(row[q] in keep for row in A.action for q in keep):
                out.append(subautomaton(A, keep))
    return out


# -- renaming and products -------------------------------------------------------

def rename(A: ForestAutomaton, target: Alphabet, h: Mapping[str, str],
           name: str | None = None) -> ForestAutomaton:
    """Renaming onto ``target``: letter ``d`` acts as ``h[d]`` acts in ``A``."""
    missing = [d for d in target if d not in h]
    if missing:
        raise AutomatonError(f"renaming map is not total: missing {' '.join(missing)}", "rename")
    action = tuple(A.action[A.letter(h[d])] for d in target)
    return _trusted(target, A.states, A.zero, A.plus, action, name or A.name)


def _tuple_name(parts: Sequence[str]) -> str:
    return "(" + ",".join(parts) + ")"


def direct_product(As: Sequence[ForestAutomaton], name: str | None = None) -> ForestAutomaton:
    """Componentwise product; states are tuples in lexicographic order."""
    As = list(As)
    if not As:
        raise AutomatonError("direct product needs at least one factor", "product")
    sigma = As[0].alphabet
    for B in As[1:]:
        if B.alphabet != sigma:
            raise AutomatonError("direct product factors must share one alphabet", "alphabet")
    combos = list(itertools.product(*(range(B.n) for B in As)))
    index = {c: i for i, c in enumerate(combos)}
    plus = tuple(
        tuple(index[tuple(B.plus[x][y] for B, x, y in zip(As, c, d))] for d in combos)
        for c in combos)
    action = tuple(
        tuple(index[tuple(B.action[a][x] for B, x in zip(As, c))] for c in combos)
        for a in range(len(sigma)))
    names = [_tuple_name([B.states[x] for B, x in zip(As, c)]) for c in combos]
    zero = index[tuple(B.zero for B in As)]
    return _trusted(sigma, names, zero, plus, action,
                    name or "x".join(B.name for B in As))


def control_table(A1: ForestAutomaton, A2: ForestAutomaton,
                  alpha: Mapping[tuple[str, str], str] | Callable[[str, int], str]
                  ) -> tuple[tuple[int, ...], ...]:
    """Normalize a control function to ``table[a][p] = index of target letter``.

    ``alpha`` is either a mapping keyed by ``(letter, state name)`` or a
    function of ``(letter, state index)``.
    """
    tab = []
    for a in A1.alphabet:
        row = []
        for p in range(A1.n):
            try:
                d = alpha(a, p) if callable(alpha) else alpha[(a, A1.states[p])]
            except KeyError:
                raise AutomatonError(
                    f"control function undefined on ({a}, {A1.states[p]})", "control") from None
            if d not in A2.alphabet:
                raise AutomatonError(f"control value {d!r} is not a letter of the right factor",
                                     "control")
            row.append(A2.letter(d))
        tab.append(tuple(row))
    return tuple(tab)


def moore_product(A1: ForestAutomaton, A2: ForestAutomaton, alpha,
                  name: str | None = None) -> ForestAutomaton:
    """Moore product ``A1 x_alpha A2``: ``a.(p,q) = (a.p, alpha(a, a.p) . q)``.

    State ``(p, q)`` has index ``p * |Q2| + q``.
    """
    tab = control_table(A1, A2, alpha)
    n2 = A2.n
    pairs = [(p, q) for p in range(A1.n) for q in range(n2)]
    plus = tuple(tuple(A1.plus[p][r] * n2 + A2.plus[q][s] for r, s in pairs) for p, q in pairs)
    action = []
    for a in range(len(A1.alphabet)):
        row = []
        for p, q in pairs:
            p2 = A1.action[a][p]
            row.append(p2 * n2 + A2.action[tab[a][p2]][q])
        action.append(tuple(row))
    names = [_tuple_name((A1.states[p], A2.states[q])) for p, q in pairs]
    return _trusted(A1.alphabet, names, A1.zero * n2 + A2.zero, plus, tuple(action),
                    name or f"{A1.name}*{A2.name}")


def moore_connected(A1: ForestAutomaton, A2: ForestAutomaton, tab, limit: int | None = None
                    ) -> ForestAutomaton | None:
    """``connected_part(moore_product(A1, A2, tab))`` without building the full product.

    ``tab`` is a normalized control table (see :func:`control_table`).  Returns
    None as soon as the connected part exceeds ``limit`` states.
    """
    P1, P2, T1, T2 = A1.plus, A2.plus, A1.action, A2.action
    start = (A1.zero, A2.zero)
    seen = {start}
    order = [start]
    i = 0
    letters = range(len(T1))
    while i < len(order):
        p, q = order[i]
        i += 1
        new = []
        for a in letters:
            p2 = T1[a][p]
            new.append((p2, T2[tab[a][p2]][q]))
        for r, s in order[:i]:
            new.append((P1[p][r], P2[q][s]))
            new.append((P1[r][p], P2[s][q]))
        for x in new:
            if x not in seen:
                seen.add(x)
                order.append(x)
                if limit is not None and len(order) > limit:
                    return None
    keep = sorted(seen)
    pos = {x: i for i, x in enumerate(keep)}
    plus = tuple(tuple(pos[(P1[p][r], P2[q][s])] for r, s in keep) for p, q in keep)
    action = []
    for a in letters:
        row = []
        for p, q in keep:
            p2 = T1[a][p]
            row.append(pos[(p2, T2[tab[a][p2]][q])])
        action.append(tuple(row))
    names = [_tuple_name((A1.states[p], A2.states[q])) for p, q in keep]
    return _trusted(A1.alphabet, names, pos[start], plus, tuple(action), f"{A1.name}*{A2.name}")


def trivial_automaton(alphabet: Alphabet, name: str = "one") -> ForestAutomaton:
    return _trusted(alphabet, ["0"], 0, ((0,),), tuple((0,) for _ in alphabet), name)


def build_powerset_automaton(H: Sequence[str] | Alphabet) -> ForestAutomaton:
    """``P(H)``: subsets of H under union, with ``h . X = {h} | X``.

    Subset index is its bitmask (bit i for ``H[i]``).
    """
    H = H if isinstance(H, Alphabet) else Alphabet(tuple(H))
    k = len(H)
    masks = range(1 << k)
    names = ["{" + ",".join(H[i] for i in range(k) if m >> i & 1) + "}" for m in masks]
    plus = tuple(tuple(m | m2 for m2 in masks) for m in masks)
    action = tuple(tuple(m | (1 << i) for m in masks) for i in range(k))
    return _trusted(H, names, 0, plus, action, "P")


def ef_automaton() -> ForestAutomaton:
    """``({0,1}, {0,1}, or, 0, or)``."""
    sigma = Alphabet(("0", "1"))
    return make_automaton(sigma, ["0", "1"], "0",
                          lambda p, q: str(int(p) | int(q)),
                          lambda a, q: str(int(a) | int(q)), name="EF")


def af_automaton() -> ForestAutomaton:
    """``({0,1,2}, {0,1}, min, 2, .)`` with ``1.x = 1``, ``0.0 = 0.2 = 0``, ``0.1 = 1``."""
    sigma = Alphabet(("0", "1"))
    zero_action = {"0": "0", "1": "1", "2": "0"}
    return make_automaton(sigma, ["0", "1", "2"], "2",
                          lambda p, q: min(p, q),
                          lambda a, q: "1" if a == "1" else zero_action[q], name="AF")


def relabel_states(A: ForestAutomaton, names: Sequence[str] | None = None) -> ForestAutomaton:
    """Same tables with new state names (default ``0 .. n-1``)."""
    names = [str(i) for i in range(A.n)] if names is None else list(names)
    return _trusted(A.alphabet, names, A.zero, A.plus, A.action, A.name)


def permute_states(A: ForestAutomaton, order: Sequence[int]) -> ForestAutomaton:
    """Reorder states: new state ``i`` is old state ``order[i]`` (names carried along)."""
    pos = {old: new for new, old in enumerate(order)}
    plus = tuple(tuple(pos[A.plus[p][q]] for q in order) for p in order)
    action = tuple(tuple(pos[row[p]] for p in order) for row in A.action)
    return _trusted(A.alphabet, [A.states[p] for p in order], pos[A.zero], plus, action, A.name)


# -- homomorphisms and congruences ----------------------------------------------

def is_homomorphism(A: ForestAutomaton, B: ForestAutomaton, h: Sequence[int]) -> bool:
    if A.alphabet != B.alphabet or h[A.zero] != B.zero:
        return False
    for p in range(A.n):
        for q in range(A.n):
            if h[A.plus[p][q]] != B.plus[h[p]][h[q]]:
                return False
        for a in range(len(A.alphabet)):
            if h[A.action[a][p]] != B.action[a][h[p]]:
                return False
    return True


class Congruence:
    """A partition of the states, stored as canonical block labels.

    Blocks are numbered by their least member, so ``labels`` is a canonical
    key: two equal partitions have equal labels.
    """

    __slots__ = ("labels", "blocks")

    def __init__(self, labels: Sequence[int]):
        relabel: dict[int, int] = {}
        canon = tuple(relabel.setdefault(x, len(relabel)) for x in labels)
        self.labels = canon
        blocks: list[list[int]] = [[] for _ in relabel]
        for q, b in enumerate(canon):
            blocks[b].append(q)
        self.blocks = tuple(tuple(b) for b in blocks)

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[Iterable[int]]) -> "Congruence":
        labels = [-1] * n
        for i, block in enumerate(blocks):
            for q in block:
                if labels[q] != -1:
                    raise CongruenceError(f"state {q} occurs in two blocks")
                labels[q] = i
        if -1 in labels:
            raise CongruenceError("blocks do not cover all states")
        return cls(labels)

    @classmethod
    def identity(cls, n: int) -> "Congruence":
        return cls(range(n))

    @classmethod
    def total(cls, n: int) -> "Congruence":
        return cls([0] * n)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.blocks)

    def __eq__(self, other) -> bool:
        return isinstance(other, Congruence) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return "Congruence(" + "|".join(",".join(map(str, b)) for b in self.blocks) + ")"

    def is_identity(self) -> bool:
        return len(self.blocks) == self.n

    def is_total(self) -> bool:
        return len(self.blocks) == 1

    def related(self, p: int, q: int) -> bool:
        return self.labels[p] == self.labels[q]

    def refines(self, other: "Congruence") -> bool:
        """True if every block of ``self`` lies inside a block of ``other``."""
        return all(other.labels[q] == other.labels[b[0]] for b in self.blocks for q in b)

    def meet(self, other: "Congruence") -> "Congruence":
        return Congruence(list(zip(self.labels, other.labels)))

    def join(self, other: "Congruence") -> "Congruence":
        uf = _UnionFind(self.n)
        for c in (self, other):
            for b in c.blocks:
                for q in b[1:]:
                    uf.union(b[0], q)
        return Congruence([uf.find(q) for q in range(self.n)])

    def named_blocks(self, A: ForestAutomaton) -> list[list[str]]:
        return [[A.states[q] for q in b] for b in self.blocks]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if rx < ry:
            self.parent[ry] = rx
        else:
            self.parent[rx] = ry
        return True


def congruence_from_pairs(A: ForestAutomaton, pairs: Iterable[tuple[int, int]]) -> Congruence:
    """Least congruence of ``A`` relating every given pair."""
    uf = _UnionFind(A.n)
    work = deque(pairs)
    P = A.plus
    while work:
        p, q = work.popleft()
        if not uf.union(p, q):
            continue
        for r in range(A.n):
            work.append((P[p][r], P[q][r]))
            work.append((P[r][p], P[r][q]))
        for row in A.action:
            work.append((row[p], row[q]))
    return Congruence([uf.find(q) for q in range(A.n)])


def is_congruence(A: ForestAutomaton, theta: Congruence) -> bool:
    return compatibility_violation(A, theta) is None


def compatibility_violation(A: ForestAutomaton, theta: Congruence):
    """First witness that ``theta`` is not compatible with the operations, or None."""
    lab = theta.labels
    for block in theta.blocks:
        rep = block[0]
        for q in block[1:]:
            for r in range(A.n):
                if lab[A.plus[rep][r]] != lab[A.plus[q][r]]:
                    return ("plus-right", rep, q, r)
                if lab[A.plus[r][rep]] != lab[A.plus[r][q]]:
                    return ("plus-left", rep, q, r)
            for a, row in enumerate(A.action):
                if lab[row[rep]] != lab[row[q]]:
                    return ("action", rep, q, A.alphabet[a])
    return None


def quotient(A: ForestAutomaton, theta: Congruence, name: str | None = None) -> ForestAutomaton:
    """Factor automaton ``A/theta``; block ``i`` is named after its least member."""
    if theta.n != A.n:
        raise CongruenceError("partition size does not match the automaton")
    bad = compatibility_violation(A, theta)
    if bad is not None:
        raise CongruenceError(f"partition is not a congruence: {bad}")
    lab = theta.labels
    reps = [b[0] for b in theta.blocks]
    plus = tuple(tuple(lab[A.plus[p][q]] for q in reps) for p in reps)
    action = tuple(tuple(lab[row[p]] for p in reps) for row in A.action)
    return _trusted(A.alphabet, [A.states[p] for p in reps], lab[A.zero], plus, action,
                    name or A.name)


def enumerate_congruences(A: ForestAutomaton, guard: int = DEFAULT_CONGRUENCE_GUARD
                          ) -> list[Congruence]:
    """All congruences of ``A``, as joins of principal congruences.

    Sorted by number of blocks (descending) then labels, so the identity
    comes first and the total congruence last.
    """
    if A.n > guard:
        raise SizeGuardError(f"automaton has {A.n} states; congruence enumeration is "
                             f"limited to {guard}")
    principal = []
    seen_p = set()
    for p in range(A.n):
        for q in range(p + 1, A.n):
            c = congruence_from_pairs(A, [(p, q)])
            if c not in seen_p:
                seen_p.add(c)
                principal.append(c)
    ident = Congruence.identity(A.n)
    found = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for c in frontier:
            for pc in principal:
                j = c.join(pc)
                if j not in found:
                    found.add(j)
                    nxt.append(j)
        frontier = nxt
    return sorted(found, key=lambda c: (-len(c), c.labels))


# -- minimization ------------------------------------------------------------------

def coarsest_congruence(A: ForestAutomaton, finals: Iterable[int]) -> Congruence:
    """Coarsest congruence of ``A`` saturating ``finals`` (partition refinement)."""
    finals = set(finals)
    labels = [0 if q in finals else 1 for q in range(A.n)]
    count = len(set(labels))
    states = range(A.n)
    while True:
        sigs = {}
        new = []
        for p in states:
            sig = (labels[p],
                   tuple(labels[x] for x in A.plus[p]),
                   tuple(labels[A.plus[r][p]] for r in states),
                   tuple(labels[row[p]] for row in A.action))
            new.append(sigs.setdefault(sig, len(sigs)))
        labels = new
        if len(sigs) == count:
            return Congruence(labels)
        count = len(sigs)


def minimize(L: RecognizedLanguage) -> RecognizedLanguage:
    """Minimal automaton of ``L(A, F)``: connected part, then the coarsest saturating quotient."""
    A = L.automaton
    reach = reachable_states(A)
    C = subautomaton(A, reach) if len(reach) < A.n else A
    pos = {q: i for i, q in enumerate(reach)}
    finals = {pos[f] for f in L.finals if f in pos}
    theta = coarsest_congruence(C, finals)
    M = quotient(C, theta)
    return RecognizedLanguage(M, frozenset(theta.labels[f] for f in finals))


# -- isomorphism --------------------------------------------------------------------

def _state_profile(A: ForestAutomaton, p: int) -> tuple:
    indeg = [0] * len(A.action)
    for a, row in enumerate(A.action):
        indeg[a] = sum(1 for x in row if x == p)
    return (p == A.zero,
            A.plus[p][p] == p,
            sum(1 for r in range(A.n) if A.plus[p][r] == p),
            tuple((row[p] == p, indeg[a]) for a, row in enumerate(A.action)))


def fingerprint(A: ForestAutomaton) -> tuple:
    """Isomorphism invariant: alphabet, size and the multiset of state profiles."""
    return (A.alphabet.symbols, A.n, tuple(sorted(_state_profile(A, p) for p in range(A.n))))


def is_isomorphic(A: ForestAutomaton, B: ForestAutomaton) -> dict[int, int] | None:
    """A bijection ``A -> B`` preserving zero, plus and actions, or None.

    Backtracking over candidate images with equal state profiles; every
    tentative assignment is propagated through the operations before
    branching further.
    """
    if A.alphabet != B.alphabet:
        raise AutomatonError("isomorphism test needs a common alphabet", "alphabet")
    if A.n != B.n or fingerprint(A) != fingerprint(B):
        return None
    prof_a = [_state_profile(A, p) for p in range(A.n)]
    prof_b = [_state_profile(B, p) for p in range(B.n)]
    letters = range(len(A.action))

    def assign(fwd: dict, bwd: dict, p: int, q: int):
        fwd, bwd = dict(fwd), dict(bwd)
        stack = [(p, q)]
        while stack:
            x, y = stack.pop()
            if x in fwd:
                if fwd[x] != y:
                    return None
                continue
            if y in bwd or prof_a[x] != prof_b[y]:
                return None
            fwd[x] = y
            bwd[y] = x
            for a in letters:
                stack.append((A.action[a][x], B.action[a][y]))
            for u, v in list(fwd.items()):
                stack.append((A.plus[x][u], B.plus[y][v]))
                stack.append((A.plus[u][x], B.plus[v][y]))
        return fwd, bwd

    def search(fwd, bwd):
        if len(fwd) == A.n:
            return fwd
        p = next(x for x in range(A.n) if x not in fwd)
        for q in range(B.n):
            if q in bwd or prof_a[p] != prof_b[q]:
                continue
            res = assign(fwd, bwd, p, q)
            if res is not None:
                found = search(*res)
                if found is not None:
                    return found
        return None

    start = assign({}, {}, A.zero, B.zero)
    if start is None:
        return None
    return search(*start)


def canonical_order(A: ForestAutomaton) -> list[int]:
    """Deterministic discovery order of the states generated from zero.

    For a connected automaton this is an isomorphism-invariant labelling:
    isomorphisms fix zero and commute with the operations, so they carry
    one discovery order onto the other.
    """
    order = [A.zero]
    seen = {A.zero}
    i = 0
    while i < len(order):
        x = order[i]
        cand = [row[x] for row in A.action]
        for y in order[:i + 1]:
            cand.append(A.plus[x][y])
            cand.append(A.plus[y][x])
        for v in cand:
            if v not in seen:
                seen.add(v)
                order.append(v)
        i += 1
    return order


def canonical_key(A: ForestAutomaton) -> tuple:
    """Exact isomorphism key for connected automata (see :func:`canonical_order`)."""
    order = canonical_order(A)
    if len(order) != A.n:
        raise AutomatonError("canonical_key requires a connected automaton", "connected")
    pos = {q: i for i, q in enumerate(order)}
    plus = tuple(tuple(pos[A.plus[p][q]] for q in order) for p in order)
    action = tuple(tuple(pos[row[p]] for p in order) for row in A.action)
    return (A.alphabet.symbols, plus, action)


def canonical_form(A: ForestAutomaton) -> ForestAutomaton:
    """Connected automaton relabelled in canonical order with states ``0 .. n-1``."""
    order = canonical_order(A)
    if len(order) != A.n:
        raise AutomatonError("canonical_form requires a connected automaton", "connected")
    return relabel_states(permute_states(A, order))


def canonical_name(A: ForestAutomaton) -> str:
    digest = hashlib.sha1(repr(canonical_key(A)).encode()).hexdigest()[:10]
    return f"n{A.n}_{digest}"


class IsoIndex:
    """Set of automata up to isomorphism.

    Connected automata are keyed exactly by :func:`canonical_key`; other
    automata are bucketed by :func:`fingerprint` and compared with
    :func:`is_isomorphic` inside the bucket.
    """

    def __init__(self):
        self._canon: dict[tuple, int] = {}
        self._buckets: dict[tuple, list[int]] = {}
        self.items: list[ForestAutomaton] = []

    def __len__(self) -> int:
        return len(self.items)

    def find(self, A: ForestAutomaton) -> int | None:
        if is_connected(A):
            return self._canon.get(canonical_key(A))
        for i in self._buckets.get(fingerprint(A), ()):
            if is_isomorphic(A, self.items[i]) is not None:
                return i
        return None

    def add(self, A: ForestAutomaton) -> tuple[int, bool]:
        """Insert ``A`` unless an isomorphic copy is present; returns (index, inserted)."""
        found = self.find(A)
        if found is not None:
            return found, False
        i = len(self.items)
        self.items.append(A)
        if is_connected(A):
            self._canon[canonical_key(A)] = i
        else:
            self._buckets.setdefault(fingerprint(A), []).append(i)
        return i, True


# -- text format ------------------------------------------------------------------

def dump_automaton(A: ForestAutomaton, finals: Iterable[int] | None = None) -> str:
    S = A.states
    lines = [f"automaton {A.name}",
             f"alphabet: {' '.join(A.alphabet)}",
             f"states: {' '.join(S)}",
             f"zero: {S[A.zero]}"]
    for p in range(A.n):
        for q in range(A.n):
            lines.append(f"plus: {S[p]} {S[q]} -> {S[A.plus[p][q]]}")
    for a, sym in enumerate(A.alphabet):
        for q in range(A.n):
            lines.append(f"action: {sym} {S[q]} -> {S[A.action[a][q]]}")
    if finals is not None:
        lines.append("finals: " + " ".join(S[f] for f in sorted(finals)))
    return "\n".join(lines) + "\n"


def dump_language(L: RecognizedLanguage) -> str:
    return dump_automaton(L.automaton, L.finals)


def load_automaton(text: str) -> tuple[ForestAutomaton, frozenset[int] | None]:
    """Parse the line-oriented automaton format; returns (automaton, finals or None)."""
    name = alphabet = states = zero = finals = None
    plus: dict[tuple[str, str], str] = {}
    action: dict[tuple[str, str], str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("automaton"):
            parts = line.split()
            if len(parts) != 2 or parts[0] != "automaton":
                raise AutomatonFormatError("expected 'automaton <name>'", lineno)
            name = parts[1]
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise AutomatonFormatError(f"unrecognized line {line!r}", lineno)
        key = key.strip()
        toks = rest.split()
        if key == "alphabet":
            try:
                alphabet = Alphabet(tuple(toks))
            except ValueError as e:
                raise AutomatonFormatError(str(e), lineno) from None
        elif key == "states":
            states = toks
        elif key == "zero":
            if len(toks) != 1:
                raise AutomatonFormatError("zero needs exactly one state", lineno)
            zero = toks[0]
        elif key in ("plus", "action"):
            if len(toks) != 4 or toks[2] != "->":
                raise AutomatonFormatError(f"expected '{key}: x y -> z'", lineno)
            table = plus if key == "plus" else action
            k = (toks[0], toks[1])
            if k in table:
                raise AutomatonFormatError(f"duplicate {key} entry for {k[0]} {k[1]}", lineno)
            table[k] = toks[3]
        elif key == "finals":
            finals = toks
        else:
            raise AutomatonFormatError(f"unknown key {key!r}", lineno)
    if alphabet is None or states is None or zero is None:
        raise AutomatonFormatError("missing alphabet, states or zero line")
    if len(set(states)) != len(states):
        raise AutomatonFormatError("duplicate state names")
    sset = set(states)
    for (p, q), r in plus.items():
        if p not in sset or q not in sset or r not in sset:
            raise AutomatonFormatError(f"plus entry {p} {q} -> {r} mentions an unknown state")
    for (a, q), r in action.items():
        if a not in alphabet:
            raise AutomatonFormatError(f"action entry for unknown letter {a!r}")
        if q not in sset or r not in sset:
            raise AutomatonFormatError(f"action entry {a} {q} -> {r} mentions an unknown state")
    for p in states:
        for q in states:
            if (p, q) not in plus:
                raise AutomatonFormatError(f"missing plus entry for {p} {q}")
    for a in alphabet:
        for q in states:
            if (a, q) not in action:
                raise AutomatonFormatError(f"missing action entry for {a} {q}")
    if zero not in sset:
        raise AutomatonFormatError(f"zero {zero!r} is not a state")
    A = make_automaton(alphabet, states, zero, lambda p, q: plus[(p, q)],
                       lambda a, q: action[(a, q)], name=name or "A")
    if finals is not None:
        unknown = [f for f in finals if f not in sset]
        if unknown:
            raise AutomatonFormatError(f"unknown final states: {' '.join(unknown)}")
        return A, frozenset(A.state(f) for f in finals)
    return A, None


def read_automaton(path) -> tuple[ForestAutomaton, frozenset[int] | None]:
    with open(path) as fh:
        return load_automaton(fh.read())
