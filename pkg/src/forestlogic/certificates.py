"""Membership certificates: expression trees over automaton constructors.

A certificate is evaluated bottom-up to a concrete automaton.  ``Divide``
nodes name an external target automaton and check that the target is a
homomorphic image of the connected part of the automaton built below it;
the node then evaluates to the target.  This keeps intermediate automata
small and makes every division claim machine checked.

Text format (one node per line, two-space indentation)::

    cert v1
    target T0
      automaton A
      ...
    end
    Divide T0
      Moore
        @control a (0,1) -> d
        BaseEF
        Rename x->0 y->1
          BaseEF
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .automaton import (ForestAutomaton, connected_part, direct_product, ef_automaton,
                        is_isomorphic, load_automaton, dump_automaton, moore_product, quotient,
                        reachable_states, rename, Congruence)
from .errors import AutomatonError, CertificateError, CongruenceError
from .forest import Alphabet


@dataclass(frozen=True, eq=False)
class BaseEF:
    pass


@dataclass(frozen=True, eq=False)
class Generator:
    """A named generating automaton other than EF (used by closure traces)."""
    name: str


@dataclass(frozen=True, eq=False)
class Ref:
    """Reference to an already built automaton (closure traces)."""
    name: str


@dataclass(frozen=True, eq=False)
class Rename:
    target: Alphabet
    mapping: tuple[tuple[str, str], ...]
    inner: "Cert"


@dataclass(frozen=True, eq=False)
class DirectProduct:
    inners: tuple["Cert", ...]


@dataclass(frozen=True, eq=False)
class Moore:
    left: "Cert"
    right: "Cert"
    control: tuple[tuple[tuple[str, str], str], ...]  # ((letter, left state), right letter)


@dataclass(frozen=True, eq=False)
class Connected:
    inner: "Cert"


@dataclass(frozen=True, eq=False)
class Quotient:
    blocks: tuple[tuple[str, ...], ...]  # partition by state names
    inner: "Cert"


@dataclass(frozen=True, eq=False)
class Divide:
    target: ForestAutomaton
    inner: "Cert"


Cert = BaseEF | Generator | Ref | Rename | DirectProduct | Moore | Connected | Quotient | Divide


def node_label(c: Cert) -> str:
    return type(c).__name__


def children(c: Cert) -> list[Cert]:
    if isinstance(c, (Rename, Connected, Quotient, Divide)):
        return [c.inner]
    if isinstance(c, DirectProduct):
        return list(c.inners)
    if isinstance(c, Moore):
        return [c.left, c.right]
    return []


def size(c: Cert) -> int:
    return 1 + sum(size(x) for x in children(c))


# -- evaluation ---------------------------------------------------------------------

def divides_connected(B: ForestAutomaton, T: ForestAutomaton) -> tuple[bool, str]:
    """Is the connected automaton ``T`` a homomorphic image of ``connected_part(B)``?

    Builds the connected part of the pairing of ``B`` with ``T`` and checks that
    the first component determines the second and that every state of ``T``
    is reached.
    """
    if B.alphabet != T.alphabet:
        return False, (f"alphabet mismatch: built automaton over {B.alphabet}, "
                       f"target over {T.alphabet}")
    start = (B.zero, T.zero)
    seen = {start}
    order = [start]
    i = 0
    while i < len(order):
        p, q = order[i]
        i += 1
        new = [(B.action[a][p], T.action[a][q]) for a in range(len(B.alphabet))]
        for r, s in order[:i]:
            new.append((B.plus[p][r], T.plus[q][s]))
            new.append((B.plus[r][p], T.plus[s][q]))
        for x in new:
            if x not in seen:
                seen.add(x)
                order.append(x)
    image: dict[int, int] = {}
    for p, q in order:
        if image.setdefault(p, q) != q:
            return False, (f"not functional: state {B.states[p]} pairs with both "
                           f"{T.states[image[p]]} and {T.states[q]}")
    reach = reachable_states(T)
    if len(reach) != T.n:
        return False, "target is not connected"
    missing = set(reach) - set(image.values())
    if missing:
        return False, "not onto: " + " ".join(T.states[q] for q in sorted(missing))
    return True, ""


class Builder:
    """Evaluates certificates, memoizing shared subtrees by identity."""

    def __init__(self, generators: Mapping[str, ForestAutomaton] | None = None,
                 refs: Mapping[str, ForestAutomaton] | None = None,
                 allow_external: bool = True):
        self.generators = dict(generators or {})
        self.refs = dict(refs or {})
        self.allow_external = allow_external
        self._memo: dict[int, ForestAutomaton] = {}
        self._keep: list[Cert] = []

    def build(self, c: Cert, path: str = "root") -> ForestAutomaton:
        hit = self._memo.get(id(c))
        if hit is not None:
            return hit
        try:
            out = self._build(c, path)
        except (AutomatonError, CongruenceError, KeyError, ValueError) as exc:
            if isinstance(exc, CertificateError):
                raise
            raise CertificateError(str(exc), f"{path}:{node_label(c)}") from exc
        self._memo[id(c)] = out
        self._keep.append(c)
        return out

    def _build(self, c: Cert, path: str) -> ForestAutomaton:
        here = f"{path}:{node_label(c)}"
        if isinstance(c, BaseEF):
            return ef_automaton()
        if isinstance(c, (Generator, Ref)):
            if not self.allow_external:
                raise CertificateError("only BaseEF leaves are allowed", here)
            table = self.generators if isinstance(c, Generator) else self.refs
            if c.name not in table:
                raise CertificateError(f"unknown {node_label(c).lower()} {c.name!r}", here)
            return table[c.name]
        if isinstance(c, Rename):
            return rename(self.build(c.inner, here + "/0"), c.target, dict(c.mapping))
        if isinstance(c, DirectProduct):
            if not c.inners:
                raise CertificateError("empty direct product", here)
            return direct_product([self.build(x, f"{here}/{i}") for i, x in enumerate(c.inners)])
        if isinstance(c, Moore):
            L = self.build(c.left, here + "/0")
            R = self.build(c.right, here + "/1")
            control = dict(c.control)
            return moore_product(L, R, control)
        if isinstance(c, Connected):
            return connected_part(self.build(c.inner, here + "/0"))
        if isinstance(c, Quotient):
            B = self.build(c.inner, here + "/0")
            blocks = [[B.state(s) for s in blk] for blk in c.blocks]
            return quotient(B, Congruence.from_blocks(B.n, blocks))
        if isinstance(c, Divide):
            B = self.build(c.inner, here + "/0")
            ok, why = divides_connected(B, c.target)
            if not ok:
                raise CertificateError(f"division check failed: {why}", here)
            return c.target
        raise CertificateError(f"unknown node {c!r}", here)


def build(c: Cert, generators=None, refs=None) -> ForestAutomaton:
    return Builder(generators, refs).build(c)


def check_certificate(c: Cert, A: ForestAutomaton) -> None:
    """Raise :class:`CertificateError` unless ``c`` certifies ``A`` from EF alone."""
    result = Builder(allow_external=False).build(c)
    if result.alphabet != A.alphabet or is_isomorphic(result, A) is None:
        raise CertificateError("certificate does not evaluate to the given automaton",
                               f"root:{node_label(c)}")


def verify_certificate(c: Cert, A: ForestAutomaton) -> bool:
    try:
        check_certificate(c, A)
    except CertificateError:
        return False
    return True


# -- text format -----------------------------------------------------------------------

def dump_certificate(c: Cert) -> str:
    targets: dict[int, str] = {}
    target_text: list[str] = []
    body: list[str] = []

    def target_name(T: ForestAutomaton) -> str:
        if id(T) not in targets:
            name = f"T{len(targets)}"
            targets[id(T)] = name
            target_text.append(f"target {name}")
            target_text.extend("  " + ln for ln in dump_automaton(T).splitlines())
            target_text.append("end")
        return targets[id(T)]

    def walk(x: Cert, ind: str):
        if isinstance(x, BaseEF):
            body.append(ind + "BaseEF")
        elif isinstance(x, Generator):
            body.append(f"{ind}Generator {x.name}")
        elif isinstance(x, Ref):
            body.append(f"{ind}Ref {x.name}")
        elif isinstance(x, Rename):
            pairs = " ".join(f"{d}->{s}" for d, s in x.mapping)
            body.append(f"{ind}Rename {pairs}")
        elif isinstance(x, DirectProduct):
            body.append(ind + "DirectProduct")
        elif isinstance(x, Moore):
            body.append(ind + "Moore")
            for (a, q), d in x.control:
                body.append(f"{ind}  @control {a} {q} -> {d}")
        elif isinstance(x, Connected):
            body.append(ind + "Connected")
        elif isinstance(x, Quotient):
            body.append(ind + "Quotient")
            for blk in x.blocks:
                body.append(f"{ind}  @block {' '.join(blk)}")
        elif isinstance(x, Divide):
            body.append(f"{ind}Divide {target_name(x.target)}")
        for ch in children(x):
            walk(ch, ind + "  ")

    walk(c, "")
    return "\n".join(["cert v1"] + target_text + body) + "\n"


def load_certificate(text: str) -> Cert:
    lines = [ln.rstrip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0].strip() != "cert v1":
        raise CertificateError("missing 'cert v1' header")
    i = 1
    targets: dict[str, ForestAutomaton] = {}
    while i < len(lines) and lines[i].startswith("target "):
        name = lines[i].split()[1]
        j = i + 1
        chunk = []
        while j < len(lines) and lines[j].strip() != "end":
            chunk.append(lines[j].strip())
            j += 1
        if j == len(lines):
            raise CertificateError(f"target {name} lacks 'end'")
        targets[name], _ = load_automaton("\n".join(chunk))
        i = j + 1
    entries = []
    for ln in lines[i:]:
        stripped = ln.lstrip(" ")
        ind = len(ln) - len(stripped)
        if ind % 2:
            raise CertificateError(f"odd indentation: {ln!r}")
        entries.append((ind // 2, stripped))
    pos = 0

    def parse(level: int) -> Cert:
        nonlocal pos
        if pos >= len(entries) or entries[pos][0] != level:
            raise CertificateError("malformed certificate tree")
        head = entries[pos][1].split()
        pos += 1
        attrs = []
        while pos < len(entries) and entries[pos][0] == level + 1 \
                and entries[pos][1].startswith("@"):
            attrs.append(entries[pos][1].split())
            pos += 1
        kids = []
        while pos < len(entries) and entries[pos][0] == level + 1:
            kids.append(parse(level + 1))
        if pos < len(entries) and entries[pos][0] > level:
            raise CertificateError("malformed certificate tree")
        kind, args = head[0], head[1:]
        arity = {"BaseEF": 0, "Generator": 0, "Ref": 0, "Rename": 1, "Moore": 2,
                 "Connected": 1, "Quotient": 1, "Divide": 1}
        if kind in arity and len(kids) != arity[kind]:
            raise CertificateError(f"{kind} expects {arity[kind]} children, got {len(kids)}")
        if kind == "BaseEF":
            return BaseEF()
        if kind == "Generator":
            return Generator(args[0])
        if kind == "Ref":
            return Ref(args[0])
        if kind == "Rename":
            mapping = tuple(tuple(p.split("->")) for p in args)
            return Rename(Alphabet(tuple(d for d, _ in mapping)), mapping, kids[0])
        if kind == "DirectProduct":
            return DirectProduct(tuple(kids))
        if kind == "Moore":
            control = tuple(((a[1], a[2]), a[4]) for a in attrs if a[0] == "@control")
            return Moore(kids[0], kids[1], control)
        if kind == "Connected":
            return Connected(kids[0])
        if kind == "Quotient":
            return Quotient(tuple(tuple(a[1:]) for a in attrs if a[0] == "@block"), kids[0])
        if kind == "Divide":
            if args[0] not in targets:
                raise CertificateError(f"unknown target {args[0]}")
            return Divide(targets[args[0]], kids[0])
        raise CertificateError(f"unknown node kind {kind!r}")

    root = parse(0)
    if pos != len(entries):
        raise CertificateError("trailing content after certificate root")
    return root


def control_from(A1: ForestAutomaton, fn) -> tuple[tuple[tuple[str, str], str], ...]:
    """Control table ``((letter, state name), value)`` from ``fn(letter, state index)``."""
    return tuple(((a, A1.states[p]), fn(a, p)) for a in A1.alphabet for p in range(A1.n))
