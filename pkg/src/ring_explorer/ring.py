"""Value-level model of robot configurations on an anonymous, unoriented ring.

A configuration is the tuple of robot multiplicities per node.  Node indices
are bookkeeping only: two configurations are the same situation whenever one
is a rotation of the other or of its reversal, and every externally
meaningful comparison goes through ``canonical_form``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

Configuration = tuple[int, ...]

_CACHE_SIZE = 1 << 16


@dataclass(frozen=True)
class RingSpec:
    """Ring size and robot count."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"ring needs at least 3 nodes, got n={self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"robot count must satisfy 1 <= k <= n, got k={self.k}")


def as_config(values: Sequence[int] | Iterable[int]) -> Configuration:
    """Normalize any multiplicity sequence into a validated tuple."""
    c = tuple(int(v) for v in values)
    if len(c) < 3:
        raise ValueError("configuration needs at least 3 nodes")
    if any(v < 0 for v in c):
        raise ValueError("multiplicities must be non-negative")
    return c


def parse_config(text: str) -> Configuration:
    """Parse the comma-separated text form, e.g. ``"1,0,2,1,0,0,0,0,0"``."""
    return as_config(int(part) for part in text.split(","))


def format_config(c: Sequence[int]) -> str:
    return ",".join(str(v) for v in c)


def robot_count(c: Sequence[int]) -> int:
    return sum(c)


def occupied_nodes(c: Sequence[int]) -> tuple[int, ...]:
    return tuple(i for i, v in enumerate(c) if v > 0)


def is_towerless(c: Sequence[int]) -> bool:
    return all(v <= 1 for v in c)


def has_tower(c: Sequence[int]) -> bool:
    return any(v >= 2 for v in c)


# ---------------------------------------------------------------------------
# Symmetries
# ---------------------------------------------------------------------------

def rotate(c: Sequence[int], i: int) -> Configuration:
    """Rotation: node j of the result reads node j+i of the input."""
    c = as_config(c)
    n = len(c)
    i %= n
    return c[i:] + c[:i]


def mirror(c: Sequence[int]) -> Configuration:
    """Reversal about node 0; an involution."""
    c = as_config(c)
    n = len(c)
    return tuple(c[(n - j) % n] for j in range(n))


def indistinguishable(a: Sequence[int], b: Sequence[int]) -> bool:
    """True iff b is a rotation of a or of a's mirror."""
    a = as_config(a)
    b = as_config(b)
    if len(a) != len(b):
        raise ValueError("incompatible rings")
    if sum(a) != sum(b):
        return False
    return canonical_form(a) == canonical_form(b)


def canonical_form(c: Sequence[int]) -> Configuration:
    """Lexicographically smallest rotation of c or of its mirror.

    Equal canonical forms characterize indistinguishability, so this is the
    representative to key sets and maps by.
    """
    return _canonical_form(as_config(c))


@lru_cache(maxsize=_CACHE_SIZE)
def _canonical_form(c: Configuration) -> Configuration:
    n = len(c)
    m = mirror(c)
    return min(min(rotate(c, i) for i in range(n)), min(rotate(m, i) for i in range(n)))


# ---------------------------------------------------------------------------
# Views
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class View:
    """The two multiplicity sequences read from a node, one per direction."""

    forward: Configuration
    backward: Configuration

    @property
    def symmetric(self) -> bool:
        return self.forward == self.backward

    def as_pair(self) -> tuple[Configuration, Configuration]:
        """Unordered form: the sorted pair, what an anonymous robot sees."""
        return tuple(sorted((self.forward, self.backward)))  # type: ignore[return-value]


def view_of(c: Sequence[int], i: int) -> View:
    c = as_config(c)
    n = len(c)
    if not 0 <= i < n:
        raise ValueError(f"node index {i} out of range for n={n}")
    forward = tuple(c[(i + j) % n] for j in range(n))
    backward = tuple(c[(i - j) % n] for j in range(n))
    return View(forward, backward)


def canonical_direction(c: Sequence[int], i: int) -> Optional[int]:
    """Direction (+1/-1) whose reading from node i is lexicographically smaller.

    None when the view is symmetric.  Because the rule only looks at the view,
    it is invariant under rotation and flips sign under reflection, which makes
    it a legitimate tie-breaker for anonymous robots.
    """
    v = view_of(c, i)
    if v.symmetric:
        return None
    return 1 if v.forward < v.backward else -1


# ---------------------------------------------------------------------------
# Segments, holes, arrows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """Maximal run of occupied nodes: covers start, start+1, ..., length nodes."""

    start: int
    length: int

    def nodes(self, n: int) -> tuple[int, ...]:
        return tuple((self.start + j) % n for j in range(self.length))


@dataclass(frozen=True)
class Hole:
    """Maximal run of free nodes, with its end nodes and occupied neighbors."""

    start: int
    length: int
    extremities: tuple[int, int]
    neighbors: tuple[int, int]

    def nodes(self, n: int) -> tuple[int, ...]:
        return tuple((self.start + j) % n for j in range(self.length))

    def entry_from(self, node: int) -> int:
        """First hole node seen from an adjacent occupied node."""
        if node == self.neighbors[0]:
            return self.extremities[0]
        if node == self.neighbors[1]:
            return self.extremities[1]
        raise ValueError(f"node {node} is not a neighbor of this hole")


def _maximal_runs(c: Configuration, occupied: bool) -> tuple[tuple[int, int], ...]:
    """(start, length) of maximal circular runs matching the occupancy flag."""
    n = len(c)
    match = [(v > 0) == occupied for v in c]
    anchor = next(i for i in range(n) if not match[i])
    runs = []
    j = anchor + 1
    while j <= anchor + n:
        if match[j % n]:
            start = j % n
            length = 1
            while match[(j + 1) % n] and j + 1 <= anchor + n:
                j += 1
                length += 1
            runs.append((start, length))
        j += 1
    return tuple(runs)


def segments(c: Sequence[int]) -> tuple[Segment, ...]:
    """All maximal occupied runs, in ring order from an arbitrary anchor."""
    return _segments(as_config(c))


@lru_cache(maxsize=_CACHE_SIZE)
def _segments(c: Configuration) -> tuple[Segment, ...]:
    if all(v == 0 for v in c):
        return ()
    if all(v > 0 for v in c):
        raise ValueError("no free node")
    return tuple(Segment(s, l) for s, l in _maximal_runs(c, occupied=True))


def holes(c: Sequence[int]) -> tuple[Hole, ...]:
    """All maximal free runs; each carries its end nodes and occupied neighbors."""
    return _holes(as_config(c))


@lru_cache(maxsize=_CACHE_SIZE)
def _holes(c: Configuration) -> tuple[Hole, ...]:
    if all(v == 0 for v in c):
        raise ValueError("no occupied node")
    if all(v > 0 for v in c):
        return ()
    n = len(c)
    out = []
    for start, length in _maximal_runs(c, occupied=False):
        ext = (start, (start + length - 1) % n)
        nbr = ((start - 1) % n, (start + length) % n)
        out.append(Hole(start, length, ext, nbr))
    return tuple(out)


@dataclass(frozen=True)
class Arrow:
    """One robot (tail), a run of free nodes, a two-robot tower, one robot (head).

    ``size`` counts the free nodes between tail and tower; ``orientation`` is
    the index step that walks the path tail -> frees -> tower -> head.
    """

    tail: int
    head: int
    tower: int
    size: int
    orientation: int

    def path_nodes(self, n: int) -> tuple[int, ...]:
        return tuple((self.tail + j * self.orientation) % n for j in range(self.size + 3))


def find_arrow(c: Sequence[int]) -> Optional[Arrow]:
    """The unique arrow of the configuration, or None.

    Requires exactly one node of multiplicity 2 adjacent to a single robot
    (the head), with at least one free node between the tower and the other
    single robot (the tail).
    """
    return _find_arrow(as_config(c))


@lru_cache(maxsize=_CACHE_SIZE)
def _find_arrow(c: Configuration) -> Optional[Arrow]:
    if sorted(v for v in c if v > 0) != [1, 1, 2]:
        return None
    n = len(c)
    tower = next(i for i, v in enumerate(c) if v == 2)
    for orientation in (1, -1):
        head = (tower + orientation) % n
        if c[head] != 1:
            continue
        size = 0
        j = (tower - orientation) % n
        while c[j] == 0:
            size += 1
            j = (j - orientation) % n
        if size >= 1 and c[j] == 1:
            return Arrow(tail=j, head=head, tower=tower, size=size, orientation=orientation)
    return None


def is_final_arrow(c: Sequence[int]) -> bool:
    """True when the arrow's tail sits adjacent to its head: no hole remains
    between them, i.e. the arrow size is n-3."""
    c = as_config(c)
    a = _find_arrow(c)
    return a is not None and a.size == len(c) - 3
