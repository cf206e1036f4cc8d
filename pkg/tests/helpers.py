"""Independent brute-force oracles and random-instance builders for the test suite.

Everything here deliberately re-derives semantics from first principles
(exhaustive enumeration, pair enumeration) so it can stand as a cross-check
against the production code paths.
"""

from __future__ import annotations

import random
from itertools import combinations

from seqrules.core import (
    EventSet,
    Pattern,
    Sequence,
    SequenceDatabase,
    SymbolTable,
)


def exhaustive_contains(seq: Sequence, pat: Pattern) -> bool:
    """Containment by enumerating every strictly increasing index mapping."""
    baskets = seq.baskets()
    n = len(pat.elements)
    if n == 0:
        return True
    if n > len(baskets):
        return False
    for positions in combinations(range(len(baskets)), n):
        if all(pat.elements[i].as_set() <= baskets[p] for i, p in enumerate(positions)):
            return True
    return False


def brute_support(db: SequenceDatabase, pat: Pattern) -> int:
    return sum(1 for seq in db if exhaustive_contains(seq, pat))


def brute_sjoin(prefix: list[tuple[int, int]], atom: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """S-join by enumerating every (prefix, atom) entry pair."""
    out = set()
    for sid1, e1 in prefix:
        for sid2, e2 in atom:
            if sid1 == sid2 and e1 < e2:
                out.add((sid2, e2))
    return sorted(out)


def brute_ijoin(a: list[tuple[int, int]], b: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """I-join as a plain set intersection."""
    return sorted(set(a) & set(b))


def make_db(baskets_per_seq: list[list[list[str]]]) -> SequenceDatabase:
    """Build a SequenceDatabase from nested symbol lists, interning on the fly."""
    symbols = SymbolTable()
    sequences = []
    for sid, baskets in enumerate(baskets_per_seq):
        events = []
        for eid, basket in enumerate(baskets):
            events.append((eid, EventSet(symbols.intern(name) for name in basket)))
        sequences.append(Sequence(sid, events))
    return SequenceDatabase(symbols, sequences)


def random_db(
    rng: random.Random,
    max_seqs: int = 25,
    max_items: int = 6,
    max_baskets: int = 5,
    max_basket_size: int = 3,
) -> SequenceDatabase:
    n_items = rng.randint(2, max_items)
    names = [chr(ord("A") + i) for i in range(n_items)]
    n_seqs = rng.randint(1, max_seqs)
    rows = []
    for _ in range(n_seqs):
        n_baskets = rng.randint(1, max_baskets)
        baskets = []
        for _ in range(n_baskets):
            size = rng.randint(1, max_basket_size)
            baskets.append(rng.sample(names, min(size, n_items)))
        rows.append(baskets)
    return make_db(rows)


def random_pattern(rng: random.Random, db: SequenceDatabase, max_len: int = 4) -> Pattern:
    """Random canonical pattern over the database's item universe."""
    universe = sorted({i for seq in db for _, basket in seq.events for i in basket.items})
    total = rng.randint(1, max_len)
    elements: list[list[int]] = []
    remaining = total
    while remaining > 0:
        size = rng.randint(1, min(remaining, len(universe)))
        elements.append(sorted(rng.sample(universe, size)))
        remaining -= size
    return Pattern.from_items(elements)
