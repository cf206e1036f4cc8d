"""Core model: items, event sets, sequences, patterns, support/containment semantics."""

from __future__ import annotations

import threading
from collections.abc import Iterable, Iterator

ItemId = int

# Characters that collide with the delimited file formats; symbols are
# percent-encoded on write and decoded on read.
_ESCAPE_CHARS = "%,|\t\n"

DEMOGRAPHIC_PREFIXES = ("yob:", "gender:")


def escape_symbol(name: str) -> str:
    """Percent-encode the characters that act as delimiters in the file formats."""
    if not any(c in name for c in _ESCAPE_CHARS):
        return name
    out = []
    for c in name:
        out.append(f"%{ord(c):02X}" if c in _ESCAPE_CHARS else c)
    return "".join(out)


def unescape_symbol(text: str) -> str:
    """Inverse of :func:`escape_symbol`."""
    if "%" not in text:
        return text
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "%":
            out.append(chr(int(text[i + 1 : i + 3], 16)))
            i += 3
        else:
            out.append(c)
            i += 1
    return "".join(out)


def is_demographic_symbol(name: str) -> bool:
    return name.startswith(DEMOGRAPHIC_PREFIXES)


class SymbolTable:
    """Bijective string <-> dense ItemId mapping.

    Append-only; concurrent reads are safe, interning is serialized so the
    ingestion phase may run partitioned parsers against one table.
    """

    def __init__(self) -> None:
        self._names: list[str] = []
        self._ids: dict[str, ItemId] = {}
        self._lock = threading.Lock()

    def intern(self, name: str) -> ItemId:
        """Return the id for ``name``, allocating the next dense id if new."""
        name = name.strip()
        if not name:
            raise ValueError("cannot intern an empty symbol")
        existing = self._ids.get(name)
        if existing is not None:
            return existing
        with self._lock:
            existing = self._ids.get(name)
            if existing is not None:
                return existing
            item = len(self._names)
            self._names.append(name)
            self._ids[name] = item
            return item

    def name_of(self, item: ItemId) -> str:
        return self._names[item]

    def id_of(self, name: str) -> ItemId:
        return self._ids[name]

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def demographic_ids(self) -> frozenset[ItemId]:
        return frozenset(
            i for i, name in enumerate(self._names) if is_demographic_symbol(name)
        )


class EventSet:
    """Non-empty set of items occurring together, canonically sorted by id."""

    __slots__ = ("items", "_set")

    def __init__(self, items: Iterable[ItemId]):
        canonical = tuple(sorted(set(items)))
        if not canonical:
            raise ValueError("an event set must contain at least one item")
        self.items: tuple[ItemId, ...] = canonical
        self._set = frozenset(canonical)

    def as_set(self) -> frozenset[ItemId]:
        return self._set

    def issubset_of(self, other: frozenset[ItemId]) -> bool:
        return self._set <= other

    def __len__(self) -> int:
        return len(self.items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, EventSet) and self.items == other.items

    def __lt__(self, other: "EventSet") -> bool:
        return self.items < other.items

    def __hash__(self) -> int:
        return hash(self.items)

    def __repr__(self) -> str:
        return f"EventSet{self.items}"


class Sequence:
    """One subject's ordered, eid-indexed baskets. eid 0 is the demographic basket
    when the sequence was built from patient records."""

    __slots__ = ("sid", "events", "_basket_sets")

    def __init__(self, sid: int, events: Iterable[tuple[int, EventSet]]):
        evs = tuple(events)
        for (a, _), (b, _) in zip(evs, evs[1:]):
            if b <= a:
                raise ValueError(f"eids must be strictly increasing in sid {sid}")
        self.sid = sid
        self.events: tuple[tuple[int, EventSet], ...] = evs
        self._basket_sets = tuple(b.as_set() for _, b in evs)

    def baskets(self) -> tuple[frozenset[ItemId], ...]:
        return self._basket_sets

    def __len__(self) -> int:
        return len(self.events)

    def __repr__(self) -> str:
        return f"Sequence(sid={self.sid}, events={self.events!r})"


class SequenceDatabase:
    """All sequences plus the shared symbol table."""

    def __init__(self, symbols: SymbolTable, sequences: Iterable[Sequence]):
        seqs = sorted(sequences, key=lambda s: s.sid)
        sids = [s.sid for s in seqs]
        if len(set(sids)) != len(sids):
            raise ValueError("duplicate sids in sequence database")
        self.symbols = symbols
        self.sequences: list[Sequence] = seqs

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[Sequence]:
        return iter(self.sequences)


class Pattern:
    """Ordered list of event sets; the candidate/frequent k-sequence shape.

    The empty pattern is representable (vacuously contained everywhere) but is
    never produced by the miner.
    """

    __slots__ = ("elements", "_key")

    def __init__(self, elements: Iterable[EventSet]):
        self.elements: tuple[EventSet, ...] = tuple(elements)
        self._key = tuple(e.items for e in self.elements)

    @classmethod
    def from_items(cls, elements: Iterable[Iterable[ItemId]]) -> "Pattern":
        return cls(EventSet(e) for e in elements)

    def cardinality(self) -> int:
        """Total item count, summed over elements."""
        return sum(len(e) for e in self.elements)

    def key(self) -> tuple[tuple[ItemId, ...], ...]:
        return self._key

    def sort_key(self) -> tuple[int, int, tuple[tuple[ItemId, ...], ...]]:
        """Canonical total order: cardinality, then element count, then item lists."""
        return (self.cardinality(), len(self.elements), self._key)

    def item_ids(self) -> frozenset[ItemId]:
        out: set[ItemId] = set()
        for e in self.elements:
            out.update(e.items)
        return frozenset(out)

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Pattern) and self._key == other._key

    def __lt__(self, other: "Pattern") -> bool:
        return self.sort_key() < other.sort_key()

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Pattern{self._key}"


class SupportedPattern:
    """A pattern with its absolute support and the database size it was counted in."""

    __slots__ = ("pattern", "support", "db_size")

    def __init__(self, pattern: Pattern, support: int, db_size: int):
        if not 0 <= support <= db_size:
            raise ValueError(f"support {support} outside [0, {db_size}]")
        self.pattern = pattern
        self.support = support
        self.db_size = db_size

    @property
    def relative_support(self) -> float:
        # Single float division from exact integer counts.
        return self.support / self.db_size

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SupportedPattern)
            and self.pattern == other.pattern
            and self.support == other.support
            and self.db_size == other.db_size
        )

    def __repr__(self) -> str:
        return f"SupportedPattern({self.pattern!r}, {self.support}/{self.db_size})"


def contains(seq: Sequence, pat: Pattern) -> bool:
    """True iff ``pat``'s elements map to strictly increasing baskets of ``seq``
    with set containment at each position.

    Greedy earliest-match: taking the first basket that covers each element is
    complete for this relation (any later choice only shrinks the remaining
    suffix available to the rest of the pattern).
    """
    baskets = seq.baskets()
    pos = 0
    for element in pat.elements:
        eset = element.as_set()
        while pos < len(baskets) and not eset <= baskets[pos]:
            pos += 1
        if pos == len(baskets):
            return False
        pos += 1
    return True


def support(db: SequenceDatabase, pat: Pattern) -> int:
    """Number of distinct sequences in ``db`` containing ``pat`` (multiple
    embeddings in one sequence count once)."""
    return sum(1 for seq in db if contains(seq, pat))
