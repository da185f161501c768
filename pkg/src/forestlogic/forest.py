"""Trees and forests over ordered finite alphabets.

A forest is an ordered tuple of trees, and a tree is a label together with
the forest of its children.  The empty forest is rendered as ``()``; a tree
with no children is rendered by its bare label::

    >>> sigma = Alphabet.of("a b c d")
    >>> s = parse_forest("d(b(a)+a(d+a+b))+c", sigma)
    >>> render_forest(s)
    'd(b(a)+a(d+a+b))+c'
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import ForestSyntaxError, UnknownSymbolError

SYMBOL_RE = re.compile(r"[A-Za-z0-9_]+")


@dataclass(frozen=True)
class Alphabet:
    """A nonempty sequence of distinct symbols; declaration order is the total order."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("an alphabet must be nonempty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError(f"duplicate symbols in alphabet {self.symbols}")
        for sym in self.symbols:
            if not SYMBOL_RE.fullmatch(sym):
                raise ValueError(f"invalid symbol {sym!r}")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @classmethod
    def of(cls, symbols: str | Iterable[str]) -> "Alphabet":
        if isinstance(symbols, str):
            symbols = symbols.replace(",", " ").split()
        return cls(tuple(symbols))

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise UnknownSymbolError(symbol, self.symbols) from None

    @property
    def first(self) -> str:
        return self.symbols[0]

    @property
    def last(self) -> str:
        return self.symbols[-1]

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol) -> bool:
        return symbol in self._index

    def __getitem__(self, i: int) -> str:
        return self.symbols[i]

    def __str__(self) -> str:
        return " ".join(self.symbols)


@dataclass(frozen=True)
class Tree:
    label: str
    children: "Forest"

    def __str__(self) -> str:
        return render_tree(self)


@dataclass(frozen=True)
class Forest:
    trees: tuple[Tree, ...] = ()

    def __add__(self, other: "Forest") -> "Forest":
        return Forest(self.trees + other.trees)

    def __iter__(self) -> Iterator[Tree]:
        return iter(self.trees)

    def __len__(self) -> int:
        return len(self.trees)

    def __bool__(self) -> bool:
        return bool(self.trees)

    def __str__(self) -> str:
        return render_forest(self)


EMPTY = Forest()


def tree(label: str, *children: Tree) -> Tree:
    return Tree(label, Forest(tuple(children)))


def forest(*trees: Tree) -> Forest:
    return Forest(tuple(trees))


def as_forest(x: Tree | Forest) -> Forest:
    """A tree viewed as the forest consisting of that single tree."""
    return Forest((x,)) if isinstance(x, Tree) else x


# -- parsing / rendering -----------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:([A-Za-z0-9_]+)|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            tokens.append(("sym", m.group(1), m.start(1)))
        else:
            ch = m.group(2)
            if ch not in "()+":
                raise ForestSyntaxError(f"unexpected character {ch!r}", text, m.start(2))
            tokens.append((ch, ch, m.start(2)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _ForestParser:
    def __init__(self, text: str, alphabet: Alphabet | None):
        self.text = text
        self.alphabet = alphabet
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def expect(self, kind: str):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            found = tok[1] or "end of input"
            raise ForestSyntaxError(f"expected {kind!r}, found {found!r}", self.text, tok[2])
        self.i += 1
        return tok

    def forest(self) -> Forest:
        if self.peek() == "(":
            self.expect("(")
            self.expect(")")
            return EMPTY
        trees = [self.tree()]
        while self.peek() == "+":
            self.expect("+")
            trees.append(self.tree())
        return Forest(tuple(trees))

    def tree(self) -> Tree:
        _, label, pos = self.expect("sym")
        if self.alphabet is not None and label not in self.alphabet:
            raise UnknownSymbolError(label, self.alphabet.symbols)
        if self.peek() == "(":
            self.expect("(")
            if self.peek() == ")":
                children = EMPTY
            else:
                children = self.forest()
            self.expect(")")
        else:
            children = EMPTY
        return Tree(label, children)


def parse_forest(text: str, alphabet: Alphabet | None = None) -> Forest:
    """Parse ``text`` per the forest grammar; labels are checked against ``alphabet``."""
    p = _ForestParser(text, alphabet)
    result = p.forest()
    p.expect("eof")
    return result


def render_tree(t: Tree) -> str:
    if not t.children:
        return t.label
    return f"{t.label}({render_forest(t.children)})"


def render_forest(s: Forest) -> str:
    if not s.trees:
        return "()"
    return "+".join(render_tree(t) for t in s.trees)


# -- structural helpers ------------------------------------------------------

def depth(x: Tree | Forest) -> int:
    """Height of the forest; the empty forest has depth 0, a leaf depth 1."""
    if isinstance(x, Tree):
        return 1 + depth(x.children)
    return max((depth(t) for t in x.trees), default=0)


def max_arity(x: Tree | Forest) -> int:
    """Largest number of siblings in any forest occurring in ``x`` (roots included)."""
    s = as_forest(x)
    best = len(s.trees)
    for t in s.trees:
        best = max(best, max_arity(t.children))
    return best


def size(x: Tree | Forest) -> int:
    if isinstance(x, Tree):
        return 1 + size(x.children)
    return sum(size(t) for t in x.trees)


def labels(x: Tree | Forest) -> set[str]:
    if isinstance(x, Tree):
        return {x.label} | labels(x.children)
    out: set[str] = set()
    for t in x.trees:
        out |= labels(t)
    return out


def subtrees(x: Tree | Forest) -> Iterator[Tree]:
    """All subtrees in preorder."""
    for t in as_forest(x).trees:
        yield t
        yield from subtrees(t.children)


def relabel(x: Tree | Forest, h: Mapping[str, str]):
    """Literal homomorphism: replace every label ``a`` by ``h[a]``."""
    if isinstance(x, Tree):
        return Tree(h[x.label], relabel(x.children, h))
    return Forest(tuple(relabel(t, h) for t in x.trees))


def random_forest(alphabet: Alphabet, max_depth: int, max_arity: int, seed: int) -> Forest:
    """Seeded random forest with depth <= max_depth and at most max_arity siblings."""
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    rng = random.Random(seed)
    return _random_forest(rng, alphabet.symbols, max_depth, max_arity)


def _random_forest(rng: random.Random, symbols, d: int, k: int) -> Forest:
    if d == 0:
        return EMPTY
    n = rng.randint(0, k)
    return Forest(tuple(Tree(rng.choice(symbols), _random_forest(rng, symbols, d - 1, k))
                        for _ in range(n)))


def random_forests(alphabet: Alphabet, count: int, max_depth: int, max_arity: int,
                   seed: int) -> list[Forest]:
    rng = random.Random(seed)
    return [_random_forest(rng, alphabet.symbols, max_depth, max_arity) for _ in range(count)]
