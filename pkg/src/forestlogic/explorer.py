"""Bounded exploration of Moore pseudovariety closures, and the AF conjecture harnesses.

Only connected automata are stored.  Every member of a pseudovariety is a
homomorphic image of a subautomaton of a connected member's product, and
the connected part of a connected automaton's subautomaton is the
automaton itself, so nothing is lost by closing the connected members
under: connected parts of renamings, quotients, and connected parts of
Moore products.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .automaton import (ForestAutomaton, af_automaton, canonical_key, canonical_name,
                        connected_part, enumerate_congruences, moore_connected, quotient, rename)
from .certificates import (Builder, Cert, Connected, Generator, Moore, Quotient, Ref, Rename,
                           dump_certificate)
from .enumeration import af_letter, enumerate_automata
from .forest import Alphabet
from .varieties import (check_af_necessary, is_subdirectly_reducible, ladder_reconstruction,
                        ladder_violation, minimal_nontrivial_congruences)

BINARY = Alphabet(("0", "1"))


@dataclass
class ClosureConfig:
    generators: dict[str, ForestAutomaton]
    max_states: int
    target_alphabets: list[Alphabet] | None = None
    max_rounds: int = 50
    jobs: int = 1

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")
        if not self.generators:
            raise ValueError("at least one generator is required")
        if self.target_alphabets is None:
            alphs = []
            for A in self.generators.values():
                if A.alphabet not in alphs:
                    alphs.append(A.alphabet)
            if BINARY not in alphs:
                alphs.append(BINARY)
            self.target_alphabets = alphs
        if not self.target_alphabets:
            raise ValueError("target_alphabets must be nonempty")


@dataclass
class Member:
    name: str
    automaton: ForestAutomaton
    trace: Cert
    round: int


@dataclass
class ClosureResult:
    members: list[Member]
    saturated: bool
    rounds: int
    config: ClosureConfig = field(repr=False)

    def automata(self) -> list[ForestAutomaton]:
        return [m.automaton for m in self.members]

    def by_name(self) -> dict[str, ForestAutomaton]:
        return {m.name: m.automaton for m in self.members}

    def keys(self) -> set:
        return {canonical_key(m.automaton) for m in self.members}

    def contains(self, A: ForestAutomaton) -> bool:
        return canonical_key(connected_part(A)) in self.keys()

    def replay(self, m: Member) -> ForestAutomaton:
        return Builder(self.config.generators, self.by_name()).build(m.trace)

    def report(self, trace_dir: str = "traces") -> str:
        lines = [f"# max_states={self.config.max_states} rounds={self.rounds} "
                 f"saturated={'yes' if self.saturated else 'no'}"]
        for m in self.members:
            lines.append(f"MEMBER {m.name} states={m.automaton.n} "
                         f"trace={trace_dir}/{m.name}.cert")
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        (out / "traces").mkdir(parents=True, exist_ok=True)
        for m in self.members:
            (out / "traces" / f"{m.name}.cert").write_text(dump_certificate(m.trace))
        (out / "report.txt").write_text(self.report())
        return out


# -- candidate generation (pure; runs in workers) -------------------------------

def _renamings(A: ForestAutomaton, targets: Sequence[Alphabet], limit: int):
    for T in targets:
        for image in itertools.product(A.alphabet.symbols, repeat=len(T)):
            mapping = tuple(zip(T.symbols, image))
            R = connected_part(rename(A, T, dict(mapping)))
            if R.n <= limit:
                yield R, ("rename", T, mapping)


def _quotients(A: ForestAutomaton):
    for theta in enumerate_congruences(A, guard=max(10, A.n)):
        if not theta.is_identity():
            yield quotient(A, theta), ("quotient", tuple(tuple(b) for b in theta.named_blocks(A)))


def _moore_candidates(A: ForestAutomaton, B: ForestAutomaton, limit: int):
    """Connected parts of ``A x_alpha B`` with at most ``limit`` states.

    Only ``alpha(a, q)`` with ``q`` in the image of ``a`` influence the product;
    the remaining entries are fixed to the first letter of B's alphabet.
    """
    cells = [(a, q) for a in range(len(A.alphabet)) for q in sorted(set(A.action[a]))]
    delta = range(len(B.alphabet))
    out = []
    seen = set()
    for choice in itertools.product(delta, repeat=len(cells)):
        tab = [[0] * A.n for _ in A.alphabet]
        for (a, q), d in zip(cells, choice):
            tab[a][q] = d
        tab = tuple(tuple(r) for r in tab)
        P = moore_connected(A, B, tab, limit)
        if P is None:
            continue
        key = canonical_key(P)
        if key in seen:
            continue
        seen.add(key)
        out.append((P, tab))
    return out


def _moore_task(args):
    A, B, limit = args
    return _moore_candidates(A, B, limit)


# -- exploration -------------------------------------------------------------------

def closure_explore(cfg: ClosureConfig) -> ClosureResult:
    members: list[Member] = []
    index: dict[tuple, int] = {}

    def add(A: ForestAutomaton, trace: Cert, rnd: int) -> bool:
        if A.n > cfg.max_states:
            return False
        key = canonical_key(A)
        if key in index:
            return False
        index[key] = len(members)
        members.append(Member(canonical_name(A), A, trace, rnd))
        return True

    for gname in sorted(cfg.generators):
        G = cfg.generators[gname]
        C = connected_part(G)
        add(C, Generator(gname) if C is G else Connected(Generator(gname)), 0)

    rounds = 0
    new_start = 0
    saturated = False
    pool = ProcessPoolExecutor(cfg.jobs) if cfg.jobs > 1 else None
    try:
        while rounds < cfg.max_rounds:
            rounds += 1
            old_count = len(members)
            fresh = members[new_start:old_count]
            # renamings and quotients of the fresh members
            for m in fresh:
                for R, (_, T, mapping) in _renamings(m.automaton, cfg.target_alphabets,
                                                     cfg.max_states):
                    add(R, Connected(Rename(T, mapping, Ref(m.name))), rounds)
                for Qa, (_, blocks) in _quotients(m.automaton):
                    add(Qa, Quotient(blocks, Ref(m.name)), rounds)
            # Moore products of pairs with at least one fresh member
            snapshot = members[:old_count]
            pairs = []
            for i, ma in enumerate(snapshot):
                for j, mb in enumerate(snapshot):
                    if i < new_start and j < new_start:
                        continue
                    if ma.automaton.n == 1 or mb.automaton.n == 1:
                        continue  # products with a trivial factor are renamings
                    pairs.append((ma, mb))
            tasks = [(ma.automaton, mb.automaton, cfg.max_states) for ma, mb in pairs]
            results = pool.map(_moore_task, tasks, chunksize=4) if pool else map(_moore_task, tasks)
            for (ma, mb), cands in zip(pairs, results):
                for P, tab in cands:
                    control = tuple(((a, ma.automaton.states[p]), mb.automaton.alphabet[tab[ai][p]])
                                    for ai, a in enumerate(ma.automaton.alphabet)
                                    for p in range(ma.automaton.n))
                    add(P, Connected(Moore(Ref(ma.name), Ref(mb.name), control)), rounds)
            new_start = old_count
            if len(members) == old_count:
                saturated = True
                break
    finally:
        if pool:
            pool.shutdown()
    return ClosureResult(members, saturated, rounds, cfg)


def explore(generators: dict[str, ForestAutomaton], max_states: int,
            target_alphabets: list[Alphabet] | None = None, max_rounds: int = 50,
            jobs: int = 1) -> ClosureResult:
    return closure_explore(ClosureConfig(generators, max_states, target_alphabets, max_rounds,
                                         jobs))


# -- conjecture harnesses ---------------------------------------------------------------

@dataclass
class ConjectureReport:
    lines: list[str]
    counterexamples: list[str]
    inconclusive: list[str]
    closure: ClosureResult

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def af_closure(bound: int, jobs: int = 1) -> ClosureResult:
    return explore({"AF": af_automaton()}, bound, [BINARY], jobs=jobs)


def conjecture_a_experiment(bound: int = 4, jobs: int = 1,
                            closure: ClosureResult | None = None) -> ConjectureReport:
    """Necessity is checked on every closure member; sufficiency is report-only."""
    res = closure or af_closure(bound, jobs)
    lines = [f"# conjecture-a bound={bound} members={len(res.members)} "
             f"saturated={'yes' if res.saturated else 'no'}"]
    bad, inconclusive = [], []
    for m in res.members:
        if m.automaton.n == 1:
            lines.append(f"SKIP {m.name} trivial")
            continue
        rep = check_af_necessary(m.automaton)
        if rep.all_pass():
            lines.append(f"NECESSARY-OK {m.name} states={m.automaton.n}")
        else:
            why = "; ".join(r.line() for r in rep.failures())
            bad.append(m.name)
            lines.append(f"COUNTEREXAMPLE {m.name} necessity {why}")
    keys = res.keys()
    candidates = enumerate_automata(BINARY, bound, af_letter,
                                    lambda A: check_af_necessary(A).all_pass(), min_states=2)
    for A in candidates:
        name = canonical_name(A)
        if canonical_key(A) in keys:
            lines.append(f"FOUND {name} states={A.n}")
        else:
            inconclusive.append(name)
            lines.append(f"INCONCLUSIVE {name} states={A.n} not generated within bound")
    lines.append(f"# necessity-violations={len(bad)} candidates={len(candidates)} "
                 f"inconclusive={len(inconclusive)}")
    return ConjectureReport(lines, bad, inconclusive, res)


def conjecture_b_experiment(bound: int = 4, jobs: int = 1,
                            closure: ClosureResult | None = None,
                            reconstruct: bool = True) -> ConjectureReport:
    res = closure or af_closure(bound, jobs)
    lines = [f"# conjecture-b bound={bound} members={len(res.members)} "
             f"saturated={'yes' if res.saturated else 'no'}"]
    bad = []
    for m in res.members:
        A = m.automaton
        if A.n == 1:
            lines.append(f"SKIP {m.name} trivial")
            continue
        pair = is_subdirectly_reducible(A)
        if pair is not None:
            lines.append(f"REDUCIBLE {m.name} states={A.n}")
            continue
        mins = minimal_nontrivial_congruences(A)
        theta = mins[0]
        blocks = "|".join(",".join(b) for b in theta.named_blocks(A))
        why = ladder_violation(A, theta)
        if why is None:
            extra = ""
            if reconstruct:
                tab = ladder_reconstruction(A, theta)
                extra = " reconstructed=" + ("yes" if tab is not None else "no")
            lines.append(f"LADDER {m.name} states={A.n} congruence={blocks}{extra}")
        else:
            bad.append(m.name)
            lines.append(f"COUNTEREXAMPLE {m.name} states={A.n} congruence={blocks} {why}")
    lines.append(f"# counterexamples={len(bad)}")
    return ConjectureReport(lines, bad, [], res)


def default_jobs() -> int:
    return max(1, min(4, os.cpu_count() or 1))
