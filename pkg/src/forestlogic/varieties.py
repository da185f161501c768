"""Equational checks, the TL[EF] decision procedure and the TL[AF] conditions.

Semilattice automata are ordered by ``x <= y  iff  x = x + y``; the sum is
the infimum, zero is the top element and the sum of all states is the
bottom.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automaton import (Alphabet, Congruence, ForestAutomaton, RecognizedLanguage,
                        af_automaton, connected_part, ef_automaton, enumerate_congruences,
                        is_congruence, is_isomorphic, minimize, moore_connected, quotient,
                        rename)
from .certificates import (BaseEF, Cert, DirectProduct, Divide, Moore, Quotient, Rename,
                           build, control_from, divides_connected)
from .errors import AutomatonError, InternalInconsistency

SEMILATTICE = "SEMILATTICE"
LETTER_IDEMPOTENT = "LETTER_IDEMPOTENT"
EF_DECREASING = "EF_DECREASING"
POSITIVE = "POSITIVE"
CORE_INCREASING = "CORE_INCREASING"
ZERO_ACTION = "ZERO_ACTION"
CORE_IMPLICATION = "CORE_IMPLICATION"

ALL_EQUATIONS = (SEMILATTICE, LETTER_IDEMPOTENT, EF_DECREASING, POSITIVE, CORE_INCREASING,
                 ZERO_ACTION, CORE_IMPLICATION)
EF_EQUATIONS = (SEMILATTICE, LETTER_IDEMPOTENT, EF_DECREASING)
AF_EQUATIONS = (SEMILATTICE, LETTER_IDEMPOTENT, POSITIVE, CORE_INCREASING, ZERO_ACTION,
                CORE_IMPLICATION)
_CONNECTED_ONLY = {POSITIVE, CORE_INCREASING, ZERO_ACTION, CORE_IMPLICATION}

PASS, FAIL, NA = "PASS", "FAIL", "NA"


@dataclass
class EquationResult:
    equation: str
    verdict: str
    witness: dict = field(default_factory=dict)
    note: str = ""

    def line(self) -> str:
        parts = [self.equation, self.verdict]
        parts += [f"{k}={v}" for k, v in self.witness.items()]
        if self.note:
            parts.append(f"({self.note})")
        return " ".join(parts)


@dataclass
class EquationReport:
    results: dict[str, EquationResult]
    connected_part_taken: bool = False
    trivial: bool = False

    def verdict(self, eq: str) -> str:
        return self.results[eq].verdict

    def holds(self, eq: str) -> bool:
        return self.results[eq].verdict == PASS

    def all_pass(self) -> bool:
        return all(r.verdict == PASS for r in self.results.values())

    def failures(self) -> list[EquationResult]:
        return [r for r in self.results.values() if r.verdict != PASS]

    def serialize(self) -> str:
        lines = []
        if self.connected_part_taken:
            lines.append("# connected-part")
        if self.trivial:
            lines.append("# trivial")
        lines += [r.line() for r in self.results.values()]
        return "\n".join(lines) + "\n"


# -- order helpers -------------------------------------------------------------------

def leq(A: ForestAutomaton, x: int, y: int) -> bool:
    return A.plus[x][y] == x


def bottom(A: ForestAutomaton) -> int:
    return A.sum(range(A.n))


def _semilattice_witness(A: ForestAutomaton):
    P = A.plus
    for p in range(A.n):
        if P[p][p] != p:
            return {"x": A.states[p]}, "x+x != x"
        for q in range(p + 1, A.n):
            if P[p][q] != P[q][p]:
                return {"x": A.states[p], "y": A.states[q]}, "x+y != y+x"
    return None


def is_semilattice(A: ForestAutomaton) -> bool:
    return _semilattice_witness(A) is None


def is_positive(A: ForestAutomaton) -> bool:
    """Structural positivity test, meaningful on connected automata."""
    return _positive_witness(A) is None


def _positive_witness(A: ForestAutomaton):
    z = A.zero
    for a, row in enumerate(A.action):
        for q in range(A.n):
            if row[q] == z:
                return {"a": A.alphabet[a], "x": A.states[q]}, "a.x = 0"
    for p in range(A.n):
        for q in range(A.n):
            if A.plus[p][q] == z and (p != z or q != z):
                return {"x": A.states[p], "y": A.states[q]}, "x+y = 0"
    return None


def core(A: ForestAutomaton) -> list[int]:
    return [q for q in range(A.n) if q != A.zero]


def check_equations(A: ForestAutomaton, which: Iterable[str] = ALL_EQUATIONS) -> EquationReport:
    """Exhaustive table scan of the requested equations.

    Equations that only make sense on connected automata are checked on the
    connected part (and the report records that it was taken).  Order based
    equations are NA when the monoid is not a semilattice; core equations are
    NA when the automaton is not positive.
    """
    requested = set(which)
    unknown = requested - set(ALL_EQUATIONS)
    if unknown:
        raise ValueError(f"unknown equations: {sorted(unknown)}")
    which = [w for w in ALL_EQUATIONS if w in requested]
    results: dict[str, EquationResult] = {}
    C = connected_part(A) if _CONNECTED_ONLY & set(which) else A
    taken = C is not A
    S = A.states
    semi = _semilattice_witness(A)
    semi_C = _semilattice_witness(C) if taken else semi

    for eq in which:
        if eq == SEMILATTICE:
            results[eq] = (EquationResult(eq, PASS) if semi is None
                           else EquationResult(eq, FAIL, semi[0], semi[1]))
        elif eq == LETTER_IDEMPOTENT:
            res = EquationResult(eq, PASS)
            for a, row in enumerate(A.action):
                bad = next((q for q in range(A.n) if row[row[q]] != row[q]), None)
                if bad is not None:
                    res = EquationResult(eq, FAIL, {"a": A.alphabet[a], "x": S[bad]}, "aax != ax")
                    break
            results[eq] = res
        elif eq == EF_DECREASING:
            if semi is not None:
                results[eq] = EquationResult(eq, NA, note="not a semilattice")
                continue
            res = EquationResult(eq, PASS)
            for a, row in enumerate(A.action):
                bad = next((q for q in range(A.n) if not leq(A, row[q], q)), None)
                if bad is not None:
                    res = EquationResult(eq, FAIL, {"a": A.alphabet[a], "x": S[bad]},
                                         "ax + x != ax")
                    break
            results[eq] = res
        else:
            results[eq] = _check_connected(C, eq, semi_C)
    return EquationReport(results, connected_part_taken=taken, trivial=C.n == 1)


def _check_connected(C: ForestAutomaton, eq: str, semi) -> EquationResult:
    S = C.states
    pos = _positive_witness(C)
    if eq == POSITIVE:
        return EquationResult(eq, PASS) if pos is None else EquationResult(eq, FAIL, *pos)
    if semi is not None:
        return EquationResult(eq, NA, note="not a semilattice")
    if eq == ZERO_ACTION:
        bot = bottom(C)
        for a, row in enumerate(C.action):
            if row[C.zero] != row[bot]:
                return EquationResult(eq, FAIL, {"a": C.alphabet[a], "bottom": S[bot]},
                                      "a.0 != a.bottom")
        return EquationResult(eq, PASS)
    if pos is not None:
        return EquationResult(eq, NA, note="not positive")
    Q1 = core(C)
    if eq == CORE_INCREASING:
        for a, row in enumerate(C.action):
            for p in Q1:
                if not leq(C, p, row[p]):
                    return EquationResult(eq, FAIL, {"a": C.alphabet[a], "x": S[p]},
                                          "x + ax != x")
        return EquationResult(eq, PASS)
    if eq == CORE_IMPLICATION:
        for a, row in enumerate(C.action):
            for p in Q1:
                for q in Q1:
                    if leq(C, p, q) and leq(C, q, row[p]) and row[p] != row[q]:
                        return EquationResult(eq, FAIL, {"a": C.alphabet[a], "x": S[p], "y": S[q]},
                                              "x <= y <= ax but ay != ax")
        return EquationResult(eq, PASS)
    raise ValueError(eq)


def passes(A: ForestAutomaton, which: Sequence[str]) -> bool:
    return check_equations(A, which).all_pass()


def check_af_necessary(A: ForestAutomaton) -> EquationReport:
    """All known necessary conditions for membership in the AF pseudovariety."""
    C = connected_part(A)
    rep = check_equations(C, AF_EQUATIONS)
    rep.connected_part_taken = C is not A
    rep.trivial = C.n == 1
    return rep


# -- TL[EF] ----------------------------------------------------------------------------

@dataclass
class EFDecision:
    definable: bool
    report: EquationReport
    minimal: RecognizedLanguage


def decide_ef_definable(L: RecognizedLanguage) -> EFDecision:
    """Is ``L`` definable in TL[EF]?  Checks the EF equations on its minimal automaton."""
    M = minimize(L)
    rep = check_equations(M.automaton, EF_EQUATIONS)
    return EFDecision(rep.all_pass(), rep, M)


def semilattice_atoms(A: ForestAutomaton) -> list[int]:
    if A.n < 2 or not is_semilattice(A):
        raise AutomatonError("atoms need a semilattice automaton with at least two states",
                             "atoms")
    bot = bottom(A)
    out = []
    for x in range(A.n):
        if x == bot:
            continue
        if not any(y not in (bot, x) and leq(A, y, x) for y in range(A.n)):
            out.append(x)
    return out


def atom_congruence(A: ForestAutomaton, p: int) -> Congruence:
    bot = bottom(A)
    labels = list(range(A.n))
    labels[p] = labels[bot]
    theta = Congruence(labels)
    if not is_congruence(A, theta):
        raise InternalInconsistency(f"merging bottom with atom {A.states[p]} is not a congruence")
    return theta


def nontrivial_congruences(A: ForestAutomaton) -> list[Congruence]:
    return [c for c in enumerate_congruences(A) if not c.is_identity()]


def is_subdirectly_reducible(A: ForestAutomaton):
    """First pair of non-identity congruences meeting in the identity, or None."""
    cs = nontrivial_congruences(A)
    for i, c1 in enumerate(cs):
        for c2 in cs[i + 1:]:
            if c1.meet(c2).is_identity():
                return c1, c2
    return None


def minimal_nontrivial_congruences(A: ForestAutomaton) -> list[Congruence]:
    cs = nontrivial_congruences(A)
    return [c for c in cs if not any(d != c and d.refines(c) for d in cs)]


# -- decomposition --------------------------------------------------------------------

def _one_state_cert(A: ForestAutomaton) -> Cert:
    inner = Rename(A.alphabet, tuple((a, "0") for a in A.alphabet), BaseEF())
    return Divide(A, Quotient((("0", "1"),), inner))


def _ef_renaming_cert(A: ForestAutomaton) -> Cert | None:
    """Certificate when ``A`` is the connected part of a renaming of EF."""
    if A.n != 2:
        return None
    EF = ef_automaton()
    if A.alphabet == EF.alphabet and is_isomorphic(EF, A) is not None:
        return Divide(A, BaseEF())
    for h in itertools.product("01", repeat=len(A.alphabet)):
        mapping = tuple(zip(A.alphabet, h))
        R = connected_part(rename(EF, A.alphabet, dict(mapping)))
        if is_isomorphic(R, A) is not None:
            return Divide(A, Rename(A.alphabet, mapping, BaseEF()))
    return None


AUX_ALPHABET = Alphabet(("l", "o", "e", "s"))


def aux_certificate() -> Cert:
    """``Aux`` as a quotient of ``B x_alpha EF`` with ``B`` a renaming of EF."""
    B = Rename(AUX_ALPHABET, (("l", "0"), ("o", "1"), ("e", "0"), ("s", "1")), BaseEF())
    ctrl = tuple(((d, b), "1" if d == "o" or (d == "e" and b == "0") else "0")
                 for d in AUX_ALPHABET for b in ("0", "1"))
    return Quotient((("(0,0)",), ("(0,1)", "(1,1)"), ("(1,0)",)), Moore(B, BaseEF(), ctrl))


def aux_automaton() -> ForestAutomaton:
    return build(aux_certificate())


def b_automaton() -> ForestAutomaton:
    return build(aux_certificate().inner.left)


def powerset_certificate(H: Alphabet) -> Cert:
    """``prod_h E_h``, isomorphic to the powerset automaton over ``H``."""
    return DirectProduct(tuple(
        Rename(H, tuple((g, "1" if g == h else "0") for g in H), BaseEF()) for h in H))


def decompose_ef(A: ForestAutomaton, shortcut: bool = True) -> Cert:
    """Certificate that the connected automaton ``A`` lies in the EF pseudovariety."""
    rep = check_equations(A, EF_EQUATIONS)
    if not rep.all_pass():
        raise AutomatonError("automaton fails the EF equations: "
                             + "; ".join(r.line() for r in rep.failures()), "ef")
    if connected_part(A).n != A.n:
        raise AutomatonError("decompose_ef requires a connected automaton", "connected")
    return _decompose(A, shortcut)


def _decompose(A: ForestAutomaton, shortcut: bool) -> Cert:
    if A.n == 1:
        return _one_state_cert(A)
    if shortcut:
        c = _ef_renaming_cert(A)
        if c is not None:
            return c
    atoms = semilattice_atoms(A)
    if len(atoms) >= 2:
        p, q = atoms[0], atoms[1]
        parts = [_decompose(quotient(A, atom_congruence(A, x)), shortcut) for x in (p, q)]
        return Divide(A, DirectProduct(tuple(parts)))
    return _single_atom(A, atoms[0], shortcut)


def _single_atom(A: ForestAutomaton, p: int, shortcut: bool) -> Cert:
    theta = atom_congruence(A, p)
    A1 = quotient(A, theta)
    c1 = _decompose(A1, shortcut)
    k = A1.n
    H = Alphabet(tuple(f"h{i}" for i in range(k)))
    pa = Moore(c1, powerset_certificate(H), control_from(A1, lambda a, q: H[q]))
    PA = build(pa)

    bot = bottom(A)
    bot1 = theta.labels[bot]
    members = theta.blocks  # block i of A1 lists the A-states it contains

    def control(a: str, x: int) -> str:
        q1, bits = divmod(x, 1 << k)
        Hs = [i for i in range(k) if bits >> (k - 1 - i) & 1]
        if A1.sum(Hs) != bot1:
            return "l"
        ap = A.act(a, p)
        if ap == bot:
            return "o"
        if ap == p:
            rest = A.sum(members[i][0] for i in Hs if i != bot1)
            v = A.act(a, rest)
            if v == p:
                return "s"
            if v == bot:
                return "e"
        return "l"

    final = Moore(pa, aux_certificate(), control_from(PA, control))
    return Divide(A, final)


# -- ladders ---------------------------------------------------------------------------

@dataclass
class LadderEntry:
    congruence: Congruence
    ladder: bool
    reason: str = ""


@dataclass
class LadderReport:
    entries: list[LadderEntry]

    def ladders(self) -> list[Congruence]:
        return [e.congruence for e in self.entries if e.ladder]

    def serialize(self, A: ForestAutomaton) -> str:
        out = []
        for e in self.entries:
            blocks = "|".join(",".join(b) for b in e.congruence.named_blocks(A))
            tail = "LADDER" if e.ladder else f"NOT-LADDER {e.reason}"
            out.append(f"{blocks} {tail}")
        return "\n".join(out) + "\n"


def ladder_violation(A: ForestAutomaton, theta: Congruence) -> str | None:
    """None if ``theta`` is a ladder congruence, else the violated clause.

    The second clause quantifies over classes other than ``C`` itself.
    """
    S = A.states
    lab = theta.labels
    for blk in theta.blocks:
        if len(blk) > 2:
            return f"class-size {','.join(S[q] for q in blk)}"
    for C in theta.blocks:
        if len(C) != 2:
            continue
        x, y = C
        if leq(A, x, y):
            p, q = x, y
        elif leq(A, y, x):
            p, q = y, x
        else:
            return f"incomparable {S[x]},{S[y]}"
        for a, row in enumerate(A.action):
            if p not in row:
                continue
            for D in theta.blocks:
                if D == C or lab[row[D[0]]] != lab[p]:
                    continue
                if len(D) == 1:
                    if row[D[0]] != p:
                        return f"letter {A.alphabet[a]} maps {S[D[0]]} to {S[row[D[0]]]} not {S[p]}"
                else:
                    r, s = D if leq(A, D[0], D[1]) else (D[1], D[0])
                    if row[r] != p or row[s] != q:
                        return (f"letter {A.alphabet[a]} maps {S[r]},{S[s]} to "
                                f"{S[row[r]]},{S[row[s]]} not {S[p]},{S[q]}")
    return None


def is_ladder_congruence(A: ForestAutomaton, theta: Congruence) -> bool:
    return ladder_violation(A, theta) is None


def find_ladder_congruences(A: ForestAutomaton) -> LadderReport:
    entries = []
    for c in nontrivial_congruences(A):
        why = ladder_violation(A, c)
        entries.append(LadderEntry(c, why is None, why or ""))
    return LadderReport(entries)


def ladder_reconstruction(A: ForestAutomaton, theta: Congruence, limit: int = 4096):
    """Search for ``alpha`` with ``A`` a homomorphic image of ``A/theta x_alpha AF``.

    Returns the control table (letter index -> quotient state -> AF letter) or
    None when no candidate works (or the search space exceeds ``limit``).
    """
    AF = af_automaton()
    Qt = quotient(A, theta)
    cells = len(Qt.alphabet) * Qt.n
    if 2 ** cells > limit:
        return None
    for bits in itertools.product((0, 1), repeat=cells):
        tab = tuple(tuple(bits[a * Qt.n:(a + 1) * Qt.n]) for a in range(len(Qt.alphabet)))
        P = moore_connected(Qt, AF, tab)
        if divides_connected(P, A)[0]:
            return tab
    return None
