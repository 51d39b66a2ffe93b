"""Bipartite graphs stored as bit-matrix adjacency, plus neighbourhood algebra.

Rows are Python ints: bit ``j`` of ``rows[i]`` is set when X-vertex ``i`` is
adjacent to Y-vertex ``j``. Ints give arbitrary width, C-speed ``&``/``|``
and ``int.bit_count`` popcounts, which is all the algorithms below need.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

MAX_CELLS = 2**31

X, Y = "X", "Y"


class GraphError(ValueError):
    """Invalid graph construction, selection, or file contents."""


def popcount(v: int) -> int:
    return v.bit_count()


def full_mask(width: int) -> int:
    return (1 << width) - 1


def bits_of(v: int) -> list[int]:
    """Indices of set bits, ascending."""
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def sub_seed(master: int, *counters: int) -> int:
    """Derive an independent 63-bit seed from a master seed and a counter path.

    ``sub_seed(s, 3, 1)`` is the seed of draw 1 inside trial 3; the mapping is
    stable across runs, platforms and worker counts.
    """
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(c) for c in counters))
    return int(ss.generate_state(1, dtype=np.uint64)[0]) >> 1


@dataclass(frozen=True)
class VertexId:
    side: str
    index: int


@dataclass(frozen=True)
class VertexPack:
    """One vertex or a disjoint pair on the same side, with multiset semantics."""

    members: tuple[VertexId, ...]

    def __post_init__(self):
        if not 1 <= len(self.members) <= 2:
            raise GraphError("a pack holds one or two vertices")
        if len({m.side for m in self.members}) != 1:
            raise GraphError("pack members must lie on one side")
        if len(set(self.members)) != len(self.members):
            raise GraphError("pack members must be distinct")

    @classmethod
    def of(cls, side: str, *indices: int) -> "VertexPack":
        return cls(tuple(VertexId(side, i) for i in indices))

    @property
    def side(self) -> str:
        return self.members[0].side

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(m.index for m in self.members)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Selection:
    x_mask: int
    y_mask: int

    @classmethod
    def full(cls, g: "BipartiteGraph") -> "Selection":
        return cls(full_mask(g.x_size), full_mask(g.y_size))

    @classmethod
    def empty(cls) -> "Selection":
        return cls(0, 0)

    @classmethod
    def of(cls, xs: Iterable[int] = (), ys: Iterable[int] = ()) -> "Selection":
        return cls(mask_of(xs), mask_of(ys))

    def union(self, other: "Selection") -> "Selection":
        return Selection(self.x_mask | other.x_mask, self.y_mask | other.y_mask)

    def with_pack(self, pack: VertexPack) -> "Selection":
        m = mask_of(pack.indices)
        if pack.side == X:
            return Selection(self.x_mask | m, self.y_mask)
        return Selection(self.x_mask, self.y_mask | m)

    def size(self) -> int:
        return popcount(self.x_mask) + popcount(self.y_mask)


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    x_size: int
    y_size: int
    rows: tuple[int, ...]
    transposed: bool = False
    _cols: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.x_size < 0 or self.y_size < 0:
            raise GraphError("side sizes must be non-negative")
        if self.x_size * self.y_size > MAX_CELLS:
            raise GraphError(f"graph exceeds {MAX_CELLS} cells")
        if len(self.rows) != self.x_size:
            raise GraphError("adjacency must have one row per X-vertex")
        limit = full_mask(self.y_size)
        for r in self.rows:
            if r < 0 or r & ~limit:
                raise GraphError("adjacency row wider than y_size")
        cols = [0] * self.y_size
        for i, r in enumerate(self.rows):
            bit = 1 << i
            for j in bits_of(r):
                cols[j] |= bit
        object.__setattr__(self, "_cols", tuple(cols))

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.x_size, self.y_size, self.rows) == (other.x_size, other.y_size, other.rows)

    def __hash__(self):
        return hash((self.x_size, self.y_size, self.rows))

    @property
    def cols(self) -> tuple[int, ...]:
        """Adjacency as seen from Y: bit ``i`` of ``cols[j]`` is edge (i, j)."""
        return self._cols

    @property
    def edge_count(self) -> int:
        return sum(popcount(r) for r in self.rows)

    @property
    def m(self) -> int:
        return self.x_size * self.y_size

    @property
    def f(self) -> int:
        return min(self.x_size, self.y_size)

    def has_edge(self, x: int, y: int) -> bool:
        return bool(self.rows[x] >> y & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, r in enumerate(self.rows) for j in bits_of(r)]

    def side_size(self, side: str) -> int:
        return self.x_size if side == X else self.y_size

    def neighbourhood(self, v: VertexId) -> int:
        return self.rows[v.index] if v.side == X else self._cols[v.index]

    def degree(self, v: VertexId) -> int:
        return popcount(self.neighbourhood(v))

    def x_degrees(self) -> list[int]:
        return [popcount(r) for r in self.rows]

    def y_degrees(self) -> list[int]:
        return [popcount(c) for c in self._cols]

    def transpose(self) -> "BipartiteGraph":
        """Swap the roles of X and Y; the ``transposed`` flag records it."""
        return BipartiteGraph(self.y_size, self.x_size, self._cols, not self.transposed)

    def oriented(self) -> "BipartiteGraph":
        """This graph with X the smaller side (transposing only if needed)."""
        return self.transpose() if self.x_size > self.y_size else self

    def to_array(self) -> np.ndarray:
        a = np.zeros((self.x_size, self.y_size), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            a[i, bits_of(r)] = 1
        return a

    @classmethod
    def from_array(cls, a) -> "BipartiteGraph":
        a = np.asarray(a, dtype=bool)
        xs, ys = a.shape
        rows = []
        for row in a:
            rows.append(int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little"))
        return cls(xs, ys, tuple(rows))


def build_graph(x_size: int, y_size: int, edges: Iterable[tuple[int, int]]) -> BipartiteGraph:
    rows = [0] * x_size
    for xi, yi in edges:
        if not (0 <= xi < x_size and 0 <= yi < y_size):
            raise GraphError(f"edge ({xi}, {yi}) out of range for {x_size}x{y_size}")
        bit = 1 << yi
        if rows[xi] & bit:
            raise GraphError(f"duplicate edge ({xi}, {yi})")
        rows[xi] |= bit
    return BipartiteGraph(x_size, y_size, tuple(rows))


def complete_bipartite(a: int, b: int) -> BipartiteGraph:
    return BipartiteGraph(a, b, tuple([full_mask(b)] * a))


def empty_bipartite(a: int, b: int) -> BipartiteGraph:
    return BipartiteGraph(a, b, tuple([0] * a))


def density(g: BipartiteGraph) -> Fraction:
    if g.x_size < 1 or g.y_size < 1:
        raise GraphError("density needs both sides non-empty")
    return Fraction(g.edge_count, g.m)


def _check_selection(g: BipartiteGraph, sel: Selection) -> None:
    if sel.x_mask < 0 or sel.y_mask < 0 or sel.x_mask >> g.x_size or sel.y_mask >> g.y_size:
        raise GraphError("selection mask wider than graph side")


def induced_edge_count(g: BipartiteGraph, sel: Selection) -> int:
    _check_selection(g, sel)
    ym = sel.y_mask
    return sum(popcount(g.rows[i] & ym) for i in bits_of(sel.x_mask))


def _opposite_mask(g: BipartiteGraph, side: str, sel: Selection) -> int:
    return sel.y_mask if side == X else sel.x_mask


def pack_degree_into(g: BipartiteGraph, v: VertexPack, sel: Selection) -> int:
    """Multiset degree of a pack into the opposite side of ``sel``."""
    _check_selection(g, sel)
    into = _opposite_mask(g, v.side, sel)
    return sum(popcount(g.neighbourhood(m) & into) for m in v.members)


def pack_union_inter(g: BipartiteGraph, v: VertexPack) -> tuple[int, int]:
    """Multiset neighbourhood as (union bits, intersection bits)."""
    ns = [g.neighbourhood(m) for m in v.members]
    if len(ns) == 1:
        return ns[0], 0
    return ns[0] | ns[1], ns[0] & ns[1]


def multiset_symdiff(a: tuple[int, int], b: tuple[int, int], within: int = -1) -> int:
    """|A △ B| for multisets given as (union, intersection) bit pairs.

    Multiplicity of a vertex is bit(union) + bit(intersection), so the
    symmetric difference sums |mult_A - mult_B| over vertices.
    """
    ua, ia = a[0] & within, a[1] & within
    ub, ib = b[0] & within, b[1] & within
    return popcount(ua ^ ub) + popcount(ia ^ ib)


def pack_symdiff_size(g: BipartiteGraph, a: VertexPack, b: VertexPack, sel: Selection | None = None) -> int:
    if a.side != b.side:
        raise GraphError("packs must lie on the same side")
    if set(a.members) & set(b.members) and a != b:
        raise GraphError("packs overlap")
    if sel is None:
        within = -1
    else:
        _check_selection(g, sel)
        within = _opposite_mask(g, a.side, sel)
    return multiset_symdiff(pack_union_inter(g, a), pack_union_inter(g, b), within)


def random_bipartite(x_size: int, y_size: int, p: float, seed: int) -> BipartiteGraph:
    if not 0 <= p <= 1:
        raise GraphError("edge probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    return BipartiteGraph.from_array(rng.random((x_size, y_size)) < p)


def random_bipartite_exact_edges(x_size: int, y_size: int, e: int, seed: int) -> BipartiteGraph:
    cells = x_size * y_size
    if not 0 <= e <= cells:
        raise GraphError(f"cannot place {e} edges in {x_size}x{y_size}")
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(cells)[:e]
    a = np.zeros(cells, dtype=bool)
    a[chosen] = True
    return BipartiteGraph.from_array(a.reshape(x_size, y_size))


def relabel(g: BipartiteGraph, x_perm: Sequence[int], y_perm: Sequence[int]) -> BipartiteGraph:
    """Move X-vertex i to x_perm[i] and Y-vertex j to y_perm[j]."""
    return build_graph(g.x_size, g.y_size, [(x_perm[i], y_perm[j]) for i, j in g.edges()])


def shuffled(g: BipartiteGraph, seed: int) -> BipartiteGraph:
    rng = random.Random(seed)
    xp = list(range(g.x_size))
    yp = list(range(g.y_size))
    rng.shuffle(xp)
    rng.shuffle(yp)
    return relabel(g, xp, yp)


HEADER = "bipartite v1"


def serialize_graph(g: BipartiteGraph) -> str:
    lines = [HEADER, f"x {g.x_size}", f"y {g.y_size}", f"e {g.edge_count}"]
    lines += [f"{i} {j}" for i, j in g.edges()]
    return "\n".join(lines) + "\n"


def _header_field(line: str, key: str) -> int:
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise GraphError(f"expected '{key} <count>', got {line!r}")
    try:
        v = int(parts[1])
    except ValueError:
        raise GraphError(f"non-integer {key} count: {parts[1]!r}") from None
    if v < 0:
        raise GraphError(f"negative {key} count")
    return v


def parse_graph(text: str) -> BipartiteGraph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) < 4 or lines[0] != HEADER:
        raise GraphError(f"missing '{HEADER}' header")
    xs = _header_field(lines[1], "x")
    ys = _header_field(lines[2], "y")
    e = _header_field(lines[3], "e")
    body = lines[4:]
    if len(body) != e:
        raise GraphError(f"header declares {e} edges, found {len(body)}")
    edges = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphError(f"malformed edge line {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphError(f"malformed edge line {ln!r}") from None
    return build_graph(xs, ys, edges)


def read_graph(path) -> BipartiteGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(g: BipartiteGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_graph(g))
