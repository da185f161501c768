"""Exhaustive enumeration of small semilattice automata up to isomorphism."""

from __future__ import annotations

import itertools
from typing import Callable, Iterator

from .automaton import ForestAutomaton, _trusted, canonical_key, is_connected
from .forest import Alphabet

LetterFilter = Callable[[int, tuple, tuple], bool]


def semilattice_monoids(n: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All commutative idempotent monoid tables on ``0..n-1`` with unit 0."""
    pairs = [(x, y) for x in range(1, n) for y in range(x + 1, n)]
    values = range(1, n)
    for choice in itertools.product(values, repeat=len(pairs)):
        P = [[0] * n for _ in range(n)]
        for x in range(n):
            P[0][x] = P[x][0] = x
            P[x][x] = x
        for (x, y), v in zip(pairs, choice):
            P[x][y] = P[y][x] = v
        if all(P[P[x][y]][z] == P[x][P[y][z]]
               for x in range(1, n) for y in range(1, n) for z in range(1, n)):
            yield tuple(tuple(r) for r in P)


def ef_letter(n: int, P, f) -> bool:
    """Idempotent and decreasing: ``f(f(x)) = f(x)`` and ``f(x) <= x``."""
    return all(f[f[x]] == f[x] and P[f[x]][x] == f[x] for x in range(n))


def af_letter(n: int, P, f) -> bool:
    """Idempotent, never zero, increasing on the core, ``f(0) = f(bottom)``."""
    bot = 0
    for x in range(n):
        bot = P[bot][x]
    return (all(f[x] != 0 and f[f[x]] == f[x] for x in range(n))
            and all(P[x][f[x]] == x for x in range(1, n))
            and f[0] == f[bot])


def any_letter(n: int, P, f) -> bool:
    return True


def enumerate_automata(alphabet: Alphabet, max_states: int,
                       letter_ok: LetterFilter = any_letter,
                       keep: Callable[[ForestAutomaton], bool] | None = None,
                       min_states: int = 1) -> list[ForestAutomaton]:
    """Connected semilattice automata with ``min_states..max_states`` states, up to isomorphism.

    Each letter's action is drawn from the maps accepted by ``letter_ok``;
    ``keep`` filters whole automata.  Output order is deterministic.
    """
    out: list[ForestAutomaton] = []
    seen: set = set()
    for n in range(min_states, max_states + 1):
        names = [str(i) for i in range(n)]
        for P in semilattice_monoids(n):
            maps = [f for f in itertools.product(range(n), repeat=n) if letter_ok(n, P, f)]
            for acts in itertools.product(maps, repeat=len(alphabet)):
                A = _trusted(alphabet, names, 0, P, tuple(acts), name=f"E{len(out)}")
                if not is_connected(A):
                    continue
                key = canonical_key(A)
                if key in seen:
                    continue
                if keep is not None and not keep(A):
                    continue
                seen.add(key)
                out.append(A)
    return out
