"""Forest logics FL(L): formulas, satisfaction and compilation to automata.

Formulas come in two sorts.  Forest formulas are built from ``T``, ``F``,
negation, conjunction and modalities ``L(phi_d)_{d in Delta}``; tree
formulas additionally allow letters.  A single set of node classes covers
both sorts and :func:`is_forest_formula` recovers the sort.

A modality node carries the recognized language it tests and a family of
tree formulas indexed by that language's alphabet.  A forest satisfies the
modality iff its characteristic forest (each node relabelled by the first
index whose formula holds at the node's subtree, else the last index)
belongs to the language.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

from .automaton import (ForestAutomaton, RecognizedLanguage, af_automaton, control_table,
                        direct_product, ef_automaton, load_automaton, make_automaton,
                        minimize, moore_connected, moore_product, trivial_automaton)
from .errors import FormulaSyntaxError, SortError, UnknownSymbolError
from .forest import Alphabet, Forest, Tree, as_forest


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Letter:
    symbol: str


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Modal:
    language: RecognizedLanguage
    family: tuple[tuple[str, "Formula"], ...]
    name: str = "L"
    modname: str = "L"
    sugar: bool = False  # written as EF(..)/AF(..); enables the direct CTL clauses

    def __post_init__(self):
        delta = self.language.automaton.alphabet
        keys = tuple(d for d, _ in self.family)
        if keys != delta.symbols:
            raise SortError(f"modality family indices {keys} do not match its alphabet "
                            f"{delta.symbols}")

    @property
    def delta(self) -> Alphabet:
        return self.language.automaton.alphabet

    def formula_for(self, d: str) -> "Formula":
        return dict(self.family)[d]


Formula = Union[Top, Bot, Letter, Not, And, Modal]

TOP = Top()
BOT = Bot()


def Or(x: Formula, y: Formula) -> Formula:
    return Not(And(Not(x), Not(y)))


def Implies(x: Formula, y: Formula) -> Formula:
    return Or(Not(x), y)


def big_and(items: Sequence[Formula]) -> Formula:
    if not items:
        return TOP
    out = items[0]
    for x in items[1:]:
        out = And(out, x)
    return out


def big_or(items: Sequence[Formula]) -> Formula:
    if not items:
        return BOT
    out = items[0]
    for x in items[1:]:
        out = Or(out, x)
    return out


def is_forest_formula(phi: Formula) -> bool:
    if isinstance(phi, (Top, Bot, Modal)):
        return True
    if isinstance(phi, Letter):
        return False
    if isinstance(phi, Not):
        return is_forest_formula(phi.arg)
    return is_forest_formula(phi.left) and is_forest_formula(phi.right)


def letters_of(phi: Formula) -> set[str]:
    if isinstance(phi, Letter):
        return {phi.symbol}
    if isinstance(phi, Not):
        return letters_of(phi.arg)
    if isinstance(phi, And):
        return letters_of(phi.left) | letters_of(phi.right)
    if isinstance(phi, Modal):
        out: set[str] = set()
        for _, f in phi.family:
            out |= letters_of(f)
        return out
    return set()


# -- modality library ---------------------------------------------------------

EF_LANGUAGE = RecognizedLanguage.of(ef_automaton(), ["1"])
AF_LANGUAGE = RecognizedLanguage.of(af_automaton(), ["1"])


class ModalityLibrary:
    """Named recognized languages usable as modalities; EF and AF are built in."""

    def __init__(self, entries: Mapping[str, RecognizedLanguage] | None = None):
        self._entries: dict[str, RecognizedLanguage] = {"EF": EF_LANGUAGE, "AF": AF_LANGUAGE}
        for name, L in (entries or {}).items():
            self.register(name, L)

    def register(self, name: str, L: RecognizedLanguage) -> None:
        if name in self._entries:
            raise ValueError(f"modality {name!r} already registered")
        self._entries[name] = L

    def __getitem__(self, name: str) -> RecognizedLanguage:
        try:
            return self._entries[name]
        except KeyError:
            raise KeyError(f"unknown modality {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> list[str]:
        return list(self._entries)


def EF(phi: Formula) -> Modal:
    return Modal(EF_LANGUAGE, (("0", Not(phi)), ("1", phi)), "EF", "EF", True)


def AF(phi: Formula) -> Modal:
    return Modal(AF_LANGUAGE, (("0", Not(phi)), ("1", phi)), "AF", "AF", True)


def modal(language: RecognizedLanguage, family: Mapping[str, Formula] | Sequence,
          name: str = "L", modname: str | None = None) -> Modal:
    """Modality node with the family put into the language alphabet's order."""
    fam = dict(family)
    delta = language.automaton.alphabet
    missing = [d for d in delta if d not in fam]
    if missing or len(fam) != len(delta):
        raise SortError(f"family must be indexed exactly by {' '.join(delta)}")
    return Modal(language, tuple((d, fam[d]) for d in delta), name, modname or name)


# -- semantics ----------------------------------------------------------------

class _Evaluator:
    """Memoizing evaluator; memo keys use object ids of input subtrees and formulas."""

    def __init__(self, direct: bool = False):
        self.direct = direct
        self.tree_memo: dict[tuple[int, int], bool] = {}
        self.modal_memo: dict[tuple[int, int], int] = {}
        self.ctl_memo: dict[tuple[int, int], bool] = {}

    def tree(self, t: Tree, phi: Formula) -> bool:
        key = (id(t), id(phi))
        hit = self.tree_memo.get(key)
        if hit is not None:
            return hit
        if isinstance(phi, Letter):
            res = t.label == phi.symbol
        elif isinstance(phi, Not):
            res = not self.tree(t, phi.arg)
        elif isinstance(phi, And):
            res = self.tree(t, phi.left) and self.tree(t, phi.right)
        else:
            res = self.forest(Forest((t,)), phi)
        self.tree_memo[key] = res
        return res

    def forest(self, s: Forest, phi: Formula) -> bool:
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Bot):
            return False
        if isinstance(phi, Not):
            return not self.forest(s, phi.arg)
        if isinstance(phi, And):
            return self.forest(s, phi.left) and self.forest(s, phi.right)
        if isinstance(phi, Modal):
            if self.direct and phi.sugar:
                arg = phi.formula_for("1")
                if phi.modname == "EF":
                    return any(self._ef_tree(t, phi, arg) for t in s.trees)
                if phi.modname == "AF":
                    return bool(s.trees) and all(self._af_tree(t, phi, arg) for t in s.trees)
            A = phi.language.automaton
            v = A.zero
            for t in s.trees:
                v = A.plus[v][self.modal_value(t, phi)]
            return v in phi.language.finals
        raise SortError(f"{render_formula(phi)} is a tree formula; a forest formula is required")

    def label(self, t: Tree, family) -> str:
        for d, f in family:
            if self.tree(t, f):
                return d
        return family[-1][0]

    def modal_value(self, t: Tree, phi: Modal) -> int:
        """Value of the characteristic tree of ``t`` in the modality's automaton."""
        key = (id(t), id(phi))
        hit = self.modal_memo.get(key)
        if hit is not None:
            return hit
        A = phi.language.automaton
        v = A.zero
        for c in t.children.trees:
            v = A.plus[v][self.modal_value(c, phi)]
        res = A.action[A.alphabet.index(self.label(t, phi.family))][v]
        self.modal_memo[key] = res
        return res

    def _ef_tree(self, t: Tree, phi: Modal, arg: Formula) -> bool:
        key = (id(t), id(phi))
        hit = self.ctl_memo.get(key)
        if hit is None:
            hit = self.tree(t, arg) or any(self._ef_tree(c, phi, arg) for c in t.children.trees)
            self.ctl_memo[key] = hit
        return hit

    def _af_tree(self, t: Tree, phi: Modal, arg: Formula) -> bool:
        key = (id(t), id(phi))
        hit = self.ctl_memo.get(key)
        if hit is None:
            kids = t.children.trees
            hit = self.tree(t, arg) or (bool(kids) and all(self._af_tree(c, phi, arg) for c in kids))
            self.ctl_memo[key] = hit
        return hit


def satisfies(x: Tree | Forest, phi: Formula, direct: bool = False) -> bool:
    """``x |= phi``.  Trees satisfy forest formulas as one-tree forests.

    With ``direct=True`` the EF/AF sugar nodes are evaluated by the recursive
    CTL clauses instead of through characteristic forests.
    """
    ev = _Evaluator(direct)
    if isinstance(x, Tree):
        return ev.tree(x, phi)
    return ev.forest(x, phi)


def satisfies_direct(x: Tree | Forest, phi: Formula) -> bool:
    return satisfies(x, phi, direct=True)


def characteristic_forest(s: Tree | Forest, family) -> Forest:
    """Relabel every node by the first index whose formula its subtree satisfies."""
    family = tuple(family.items()) if isinstance(family, Mapping) else tuple(family)
    if not family:
        raise ValueError("a family needs at least one index")
    ev = _Evaluator()

    def walk(f: Forest) -> Forest:
        return Forest(tuple(Tree(ev.label(t, family), walk(t.children)) for t in f.trees))

    return walk(as_forest(s))


def determinize_family(family) -> list[tuple[str, Formula]]:
    """Equivalent family in which every tree satisfies exactly one member."""
    family = list(family.items()) if isinstance(family, Mapping) else list(family)
    out = []
    for i, (d, f) in enumerate(family):
        if i == len(family) - 1:
            out.append((d, big_and([Not(g) for c, g in family if c != d])))
        else:
            out.append((d, big_and([f] + [Not(g) for _, g in family[:i]])))
    return out


# -- transformations ------------------------------------------------------------

def substitute(phi: Formula, sigma: Mapping[str, Formula]) -> Formula:
    """Replace each letter ``a`` of ``phi`` by ``sigma[a]``."""
    if isinstance(phi, (Top, Bot)):
        return phi
    if isinstance(phi, Letter):
        try:
            return sigma[phi.symbol]
        except KeyError:
            raise UnknownSymbolError(phi.symbol) from None
    if isinstance(phi, Not):
        return Not(substitute(phi.arg, sigma))
    if isinstance(phi, And):
        return And(substitute(phi.left, sigma), substitute(phi.right, sigma))
    return Modal(phi.language, tuple((d, substitute(f, sigma)) for d, f in phi.family),
                 phi.name, phi.modname, phi.sugar)


def inverse_literal_formula(phi: Formula, h: Mapping[str, str],
                            target: Iterable[str] | None = None) -> Formula:
    """Formula over the domain of ``h`` defining ``h^{-1}`` of the language of ``phi``.

    Each letter ``d`` becomes the disjunction of the letters ``b`` with
    ``h(b) = d`` (in the order of ``h``); an empty disjunction is ``F``.
    """
    image_letters = set(target) if target is not None else letters_of(phi) | set(h.values())
    sigma = {d: big_or([Letter(b) for b, hb in h.items() if hb == d]) for d in image_letters}
    return substitute(phi, sigma)


def compose_modality(psi: Formula, family) -> Formula:
    """``psi[d -> psi_d]`` for a deterministic version of ``family``.

    If ``psi`` defines ``L`` then the result is equivalent to ``L(phi_d)_d``.
    """
    return substitute(psi, dict(determinize_family(family)))


# -- compilation ------------------------------------------------------------------

def letter_automaton(alphabet: Alphabet, a: str) -> RecognizedLanguage:
    """Three-state root tracker: a one-tree forest is final iff its root is ``a``."""
    if a not in alphabet:
        raise UnknownSymbolError(a, alphabet.symbols)

    def plus(p, q):
        if p == "init":
            return q
        if q == "init":
            return p
        return "root" if p == q == "root" else "other"

    A = make_automaton(alphabet, ["init", "root", "other"], "init", plus,
                       lambda b, q: "root" if b == a else "other", name=f"root_{a}")
    return RecognizedLanguage.of(A, ["root"])


def _tidy(L: RecognizedLanguage) -> RecognizedLanguage:
    M = minimize(L)
    B = M.automaton
    A = ForestAutomaton(B.alphabet, tuple(str(i) for i in range(B.n)), B.zero, B.plus, B.action,
                        "formula", trusted=True)
    return RecognizedLanguage(A, M.finals)


def compile_tree(phi: Formula, alphabet: Alphabet) -> RecognizedLanguage:
    """Recognizer whose one-tree values decide the tree formula ``phi``."""
    if isinstance(phi, Letter):
        return letter_automaton(alphabet, phi.symbol)
    if isinstance(phi, Not):
        return compile_tree(phi.arg, alphabet).complement()
    if isinstance(phi, And):
        return _conjunction(compile_tree(phi.left, alphabet), compile_tree(phi.right, alphabet))
    return compile(phi, alphabet)


def _conjunction(L1: RecognizedLanguage, L2: RecognizedLanguage) -> RecognizedLanguage:
    P = direct_product([L1.automaton, L2.automaton])
    n2 = L2.automaton.n
    finals = frozenset(p * n2 + q for p in L1.finals for q in L2.finals)
    return _tidy(RecognizedLanguage(P, finals))


def modal_control(factors: Sequence[RecognizedLanguage], delta: Alphabet):
    """Control function of the modal product as a table over the product's states.

    ``alpha(sigma, (q_d)_d)`` is the first ``d`` with ``q_d`` final in its
    factor, else the last letter of ``delta``.
    """
    sizes = [F.automaton.n for F in factors]

    def choose(index: int) -> str:
        comps = []
        for n in reversed(sizes):
            index, r = divmod(index, n)
            comps.append(r)
        comps.reverse()
        for d, F, q in zip(delta, factors, comps):
            if q in F.finals:
                return d
        return delta.last

    return choose


def modal_product(phi: Modal, alphabet: Alphabet, connected: bool = True):
    """Moore product recognizing ``phi`` before minimization.

    Returns ``(language, factors)`` where the product is
    ``(prod_d A_d) x_alpha A`` and ``factors`` are the family recognizers.
    """
    factors = [compile_tree(f, alphabet) for _, f in phi.family]
    D = direct_product([F.automaton for F in factors])
    M = phi.language.automaton
    choose = modal_control(factors, phi.delta)
    if connected:
        tab = control_table(D, M, lambda a, p: choose(p))
        P = moore_connected(D, M, tab)
        finals = frozenset(i for i, nm in enumerate(P.states)
                           if M.state(_right_component(nm)) in phi.language.finals)
    else:
        P = moore_product(D, M, lambda a, p: choose(p))
        finals = frozenset(p * M.n + q for p in range(D.n) for q in phi.language.finals)
    return RecognizedLanguage(P, finals), factors


def _right_component(pair_name: str) -> str:
    # "(left,right)" where right is a state name of the modality automaton
    depth = 0
    for i in range(len(pair_name) - 2, 0, -1):
        ch = pair_name[i]
        if ch == ")":
            depth += 1
        elif ch == "(":
            depth -= 1
        elif ch == "," and depth == 0:
            return pair_name[i + 1:-1]
    raise ValueError(pair_name)


def compile(phi: Formula, alphabet: Alphabet) -> RecognizedLanguage:
    """Minimal recognizer over ``alphabet`` of the forests satisfying ``phi``."""
    if isinstance(phi, Top):
        return RecognizedLanguage(trivial_automaton(alphabet), frozenset({0}))
    if isinstance(phi, Bot):
        return RecognizedLanguage(trivial_automaton(alphabet), frozenset())
    if isinstance(phi, Not):
        return compile(phi.arg, alphabet).complement()
    if isinstance(phi, And):
        return _conjunction(compile(phi.left, alphabet), compile(phi.right, alphabet))
    if isinstance(phi, Modal):
        L, _ = modal_product(phi, alphabet)
        return _tidy(L)
    raise SortError(f"{render_formula(phi)} is a tree formula; a forest formula is required")


# -- text syntax ----------------------------------------------------------------------

_FTOKEN = re.compile(r"\s*(?:(->)|([A-Za-z0-9_]+)|(\S))")


def _ftokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while True:
        m = _FTOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1):
            out.append(("->", "->", m.start(1)))
        elif m.group(2):
            out.append(("id", m.group(2), m.start(2)))
        else:
            ch = m.group(3)
            if ch not in "!&|()[],":
                raise FormulaSyntaxError(f"unexpected character {ch!r}", m.start(3))
            out.append((ch, ch, m.start(3)))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _FormulaParser:
    def __init__(self, text: str, alphabet: Alphabet, lib: ModalityLibrary):
        self.toks = _ftokenize(text)
        self.i = 0
        self.alphabet = alphabet
        self.lib = lib

    def peek(self, k: int = 0) -> tuple[str, str, int]:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def expect(self, kind: str):
        tok = self.toks[self.i]
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}",
                                     tok[2])
        self.i += 1
        return tok

    def expr(self) -> Formula:
        left = self.disj()
        if self.peek()[0] == "->":
            self.i += 1
            return Implies(left, self.expr())
        return left

    def disj(self) -> Formula:
        out = self.conj()
        while self.peek()[0] == "|":
            self.i += 1
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.unary()
        while self.peek()[0] == "&":
            self.i += 1
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        if self.peek()[0] == "!":
            self.i += 1
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "(":
            self.i += 1
            out = self.expr()
            self.expect(")")
            return out
        if kind != "id":
            raise FormulaSyntaxError(f"unexpected {val or 'end of input'!r}", pos)
        nxt = self.peek(1)[0]
        if val in ("T", "F") and nxt not in ("[", "("):
            self.i += 1
            return TOP if val == "T" else BOT
        if val in ("EF", "AF") and nxt == "(":
            self.i += 2
            arg = self.expr()
            self.expect(")")
            return EF(arg) if val == "EF" else AF(arg)
        if nxt == "[":
            return self.modality()
        self.i += 1
        if val not in self.alphabet:
            raise UnknownSymbolError(val, self.alphabet.symbols)
        return Letter(val)

    def modality(self) -> Modal:
        _, name, _ = self.expect("id")
        self.expect("[")
        _, modname, pos = self.expect("id")
        if modname not in self.lib:
            raise FormulaSyntaxError(f"unknown modality {modname!r}", pos)
        L = self.lib[modname]
        delta = L.automaton.alphabet
        self.expect("]")
        self.expect("(")
        fam: dict[str, Formula] = {}
        while True:
            _, d, dpos = self.expect("id")
            if d not in delta:
                raise FormulaSyntaxError(f"{d!r} is not a letter of modality {modname}", dpos)
            if d in fam:
                raise FormulaSyntaxError(f"duplicate family index {d!r}", dpos)
            self.expect("->")
            fam[d] = self.expr()
            if self.peek()[0] == ",":
                self.i += 1
                continue
            self.expect(")")
            break
        missing = [d for d in delta if d not in fam]
        if missing:
            raise SortError(f"modality {modname} family misses {' '.join(missing)}")
        return Modal(L, tuple((d, fam[d]) for d in delta), name, modname)


def parse_formula(text: str, alphabet: Alphabet, lib: ModalityLibrary | None = None) -> Formula:
    """Parse a formula.  ``|``, ``->`` are desugared into ``!`` and ``&``.

    Precedence (loosest first): ``->`` (right associative), ``|``, ``&``, ``!``.
    """
    p = _FormulaParser(text, alphabet, lib or ModalityLibrary())
    out = p.expr()
    p.expect("eof")
    return out


def render_formula(phi: Formula) -> str:
    if isinstance(phi, Top):
        return "T"
    if isinstance(phi, Bot):
        return "F"
    if isinstance(phi, Letter):
        return phi.symbol
    if isinstance(phi, Not):
        inner = phi.arg
        if isinstance(inner, And) and isinstance(inner.left, Not) and isinstance(inner.right, Not):
            return f"({render_formula(inner.left.arg)} | {render_formula(inner.right.arg)})"
        return "!" + render_formula(inner)
    if isinstance(phi, And):
        return f"({render_formula(phi.left)} & {render_formula(phi.right)})"
    if phi.sugar:
        return f"{phi.modname}({render_formula(phi.formula_for('1'))})"
    args = ", ".join(f"{d} -> {render_formula(f)}" for d, f in phi.family)
    return f"{phi.name}[{phi.modname}]({args})"


# -- formula files -------------------------------------------------------------------

@dataclass
class FormulaFile:
    formula: Formula
    alphabet: Alphabet
    library: ModalityLibrary


def load_formula_text(text: str, base_dir: str | Path = ".") -> FormulaFile:
    """Parse a ``.fml`` file: ``alphabet:``, any ``modality: NAME PATH`` lines, ``formula:``."""
    alphabet = None
    lib = ModalityLibrary()
    formula_text = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key, rest = key.strip(), rest.strip()
        if not sep:
            raise FormulaSyntaxError(f"line {lineno}: expected 'key: value'")
        if key == "alphabet":
            alphabet = Alphabet.of(rest)
        elif key == "modality":
            parts = rest.split()
            if len(parts) != 2:
                raise FormulaSyntaxError(f"line {lineno}: expected 'modality: NAME PATH'")
            path = Path(base_dir) / parts[1]
            A, finals = load_automaton(path.read_text())
            if finals is None:
                raise FormulaSyntaxError(f"line {lineno}: modality automaton {path} has no finals")
            lib.register(parts[0], RecognizedLanguage(A, finals))
        elif key == "formula":
            formula_text = rest
        else:
            raise FormulaSyntaxError(f"line {lineno}: unknown key {key!r}")
    if alphabet is None or formula_text is None:
        raise FormulaSyntaxError("formula file needs 'alphabet:' and 'formula:' lines")
    return FormulaFile(parse_formula(formula_text, alphabet, lib), alphabet, lib)


def read_formula_file(path) -> FormulaFile:
    path = Path(path)
    return load_formula_text(path.read_text(), path.parent)


# -- random formulas (test corpora) ---------------------------------------------------

def random_formula(alphabet: Alphabet, depth: int, rng: random.Random,
                   modalities: Sequence[str] = ("EF",)) -> Formula:
    """Random TL[EF,AF] forest formula of nesting depth <= ``depth``."""
    def sugar(arg):
        return EF(arg) if rng.choice(modalities) == "EF" else AF(arg)

    def forest_f(d):
        if d <= 0:
            r = rng.random()
            if r < 0.1:
                return TOP
            if r < 0.2:
                return BOT
            return sugar(Letter(rng.choice(alphabet.symbols)))
        k = rng.randrange(4)
        if k == 0:
            return Not(forest_f(d - 1))
        if k == 1:
            return And(forest_f(d - 1), forest_f(d - 1))
        return sugar(tree_f(d - 1))

    def tree_f(d):
        if d <= 0:
            return Letter(rng.choice(alphabet.symbols))
        k = rng.randrange(5)
        if k == 0:
            return Letter(rng.choice(alphabet.symbols))
        if k == 1:
            return Not(tree_f(d - 1))
        if k == 2:
            return And(tree_f(d - 1), tree_f(d - 1))
        if k == 3:
            return Or(tree_f(d - 1), tree_f(d - 1))
        return forest_f(d - 1)

    return forest_f(depth)
