"""Domain types for non-uniform multi-hypergraphs and the deterministic
statistics used throughout: w-density, induced subgraphs, subset expansion
counts, and orientation checking.

Conventions.  Vertices are 0..n-1.  An edge is a sorted tuple of vertex ids
*with multiplicity*: degrees and edge sizes count repeats, while orientation
signs always go to distinct vertices.  With arity parameters (h, w), an edge
of size h-j demands w-j signs, so meaningful sizes live in [h-w+1, h].
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence, TextIO

__all__ = [
    "OrientationParams",
    "Hypergraph",
    "Orientation",
    "SubsetStats",
    "w_density",
    "w_induced_subgraph",
    "subset_stats",
    "verify_orientation",
    "check_property_T",
    "check_property_A",
    "DeterministicConditions",
    "check_deterministic_conditions",
    "expansion_condition",
    "recommended_gamma",
    "read_hypergraph",
    "write_hypergraph",
]


@dataclass(frozen=True)
class OrientationParams:
    """Arity/sign/capacity triple: size-h edges, w signs each, indegree cap k."""

    h: int
    w: int
    k: int

    def __post_init__(self):
        if not (isinstance(self.h, int) and isinstance(self.w, int) and isinstance(self.k, int)):
            raise ValueError("h, w, k must be integers")
        if not (self.h > self.w > 0):
            raise ValueError(f"need h > w > 0, got h={self.h}, w={self.w}")
        if self.k < 1:
            raise ValueError(f"need k >= 1, got k={self.k}")

    @property
    def min_edge_size(self) -> int:
        return self.h - self.w + 1

    def sign_demand(self, size: int) -> int:
        """Signs owed by an edge of the given size: w - (h - size)."""
        if not (self.min_edge_size <= size <= self.h):
            raise ValueError(
                f"edge size {size} outside [{self.min_edge_size}, {self.h}]"
            )
        return self.w - (self.h - size)


def _canon_edge(edge: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(edge))


@dataclass(frozen=True)
class Hypergraph:
    """A multi-hypergraph on vertices 0..n-1; edges may repeat vertices."""

    n: int
    edges: tuple[tuple[int, ...], ...]

    def __init__(self, n: int, edges: Iterable[Iterable[int]]):
        if n < 0:
            raise ValueError(f"vertex count must be nonnegative, got {n}")
        canon = tuple(_canon_edge(e) for e in edges)
        for e in canon:
            if len(e) == 0:
                raise ValueError("empty edge")
            if e[0] < 0 or e[-1] >= n:
                raise ValueError(f"edge {e} has a vertex outside 0..{n - 1}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", canon)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def total_degree(self) -> int:
        """d(H): overall ball count, i.e. sum of edge sizes with multiplicity."""
        return sum(len(e) for e in self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for e in self.edges:
            for v in e:
                deg[v] += 1
        return deg

    def degree(self, v: int) -> int:
        return sum(e.count(v) for e in self.edges)

    def edge_size_counts(self) -> Counter:
        """Histogram {size: count} over edges."""
        return Counter(len(e) for e in self.edges)

    def validate_sizes(self, p: OrientationParams) -> None:
        for e in self.edges:
            if not (p.min_edge_size <= len(e) <= p.h):
                raise ValueError(
                    f"edge {e} has size {len(e)}, outside [{p.min_edge_size}, {p.h}]"
                )


@dataclass(frozen=True)
class Orientation:
    """Per-edge sign sets: signs[i] is the tuple of distinct vertices that
    edge i points at."""

    signs: tuple[tuple[int, ...], ...]

    def __init__(self, signs: Iterable[Iterable[int]]):
        object.__setattr__(self, "signs", tuple(tuple(sorted(s)) for s in signs))

    def indegrees(self, n: int) -> list[int]:
        deg = [0] * n
        for s in self.signs:
            for v in s:
                deg[v] += 1
        return deg

    def max_indegree(self, n: int) -> int:
        return max(self.indegrees(n), default=0)


def w_density(H: Hypergraph, p: OrientationParams) -> Fraction:
    """kappa(H) = (sum over edges of their sign demand) / n, exactly.

    Comparisons against the capacity k must not be blurred by floating
    point, hence the Fraction.
    """
    if H.n < 1:
        raise ValueError("w-density needs a nonempty vertex set")
    H.validate_sizes(p)
    demand = sum(p.sign_demand(len(e)) for e in H.edges)
    return Fraction(demand, H.n)


def w_induced_subgraph(H: Hypergraph, S: Iterable[int], p: OrientationParams) -> Hypergraph:
    """Subgraph w-induced by S: keep x∩S (with multiplicity) when it still
    has size >= h-w+1; vertices are relabeled to 0..|S|-1 in sorted order."""
    Ss = sorted(set(S))
    if Ss and (Ss[0] < 0 or Ss[-1] >= H.n):
        raise ValueError("subset contains vertices outside the hypergraph")
    rank = {v: i for i, v in enumerate(Ss)}
    kept = []
    for e in H.edges:
        trimmed = tuple(rank[v] for v in e if v in rank)
        if len(trimmed) >= p.min_edge_size:
            kept.append(trimmed)
    return Hypergraph(len(Ss), kept)


class SubsetStats(NamedTuple):
    """One-pass counts for a vertex subset S.

    m_table[(s, i)] counts size-s edges with exactly i of their balls in S
    (i >= 1 only); q[s] is the degree contribution of size-s edges to d_S;
    dstar is d_S minus the over-demand sum, the expansion functional.
    """

    S: frozenset
    d_S: int
    m_table: dict
    rho: int
    nu: int
    eta: int
    q: dict
    dstar: int


def subset_stats(H: Hypergraph, S: Iterable[int], p: OrientationParams) -> SubsetStats:
    Sset = frozenset(S)
    if any(v < 0 or v >= H.n for v in Sset):
        raise ValueError("subset contains vertices outside the hypergraph")
    H.validate_sizes(p)
    d_S = 0
    m_table: dict[tuple[int, int], int] = {}
    rho = nu = eta = 0
    q: dict[int, int] = {}
    over = 0  # sum over edges of max(0, i - sign_demand) clipped per the table
    for e in H.edges:
        s = len(e)
        i = sum(1 for v in e if v in Sset)
        if i == 0:
            continue
        d_S += i
        m_table[(s, i)] = m_table.get((s, i), 0) + 1
        q[s] = q.get(s, 0) + i
        nu += 1
        if i >= 2:
            rho += 1
        if i < s:
            eta += 1
        demand = p.sign_demand(s)
        if i > demand:
            over += i - demand
    return SubsetStats(Sset, d_S, m_table, rho, nu, eta, q, d_S - over)


def verify_orientation(H: Hypergraph, o: Orientation, p: OrientationParams):
    """Check a candidate orientation; returns (ok, reason).

    Valid means: every size-s edge carries exactly sign_demand(s) signs, all
    distinct and drawn from the edge's own vertices, and no vertex collects
    more than k signs overall.
    """
    if len(o.signs) != H.num_edges:
        raise ValueError(
            f"orientation covers {len(o.signs)} edges, hypergraph has {H.num_edges}"
        )
    for idx, (e, s) in enumerate(zip(H.edges, o.signs)):
        need = p.sign_demand(len(e))
        if len(set(s)) != len(s):
            return False, f"edge {idx}: repeated sign"
        if len(s) != need:
            return False, f"edge {idx}: {len(s)} signs, needs {need}"
        support = set(e)
        for v in s:
            if v not in support:
                return False, f"edge {idx}: sign on {v}, not in the edge"
    indeg = o.indegrees(H.n)
    for v, d in enumerate(indeg):
        if d > p.k:
            return False, f"vertex {v}: indegree {d} > {p.k}"
    return True, ""


def check_property_T(H: Hypergraph, p: OrientationParams) -> bool:
    """True iff the (w, k+1)-core is empty or has w-density <= k."""
    from .peeling import rancore  # local import: peeling depends on these types

    res = rancore(H, p)
    if res.core.num_edges == 0 or res.core.n == 0:
        return True
    return w_density(res.core, p) <= p.k


def check_property_A(
    H: Hypergraph, gamma: float, p: OrientationParams, max_n: int = 20
) -> bool:
    """Exhaustively test the small-set sparsity condition: every nonempty S
    with |S| < gamma*n has rho(S) < k|S|/(2w).  Exponential in n."""
    if H.n > max_n:
        raise ValueError(f"brute-force property check capped at n={max_n}")
    limit = gamma * H.n
    for size in range(1, H.n + 1):
        if size >= limit:
            break
        for S in combinations(range(H.n), size):
            st = subset_stats(H, S, p)
            if st.rho * 2 * p.w >= p.k * size:
                return False
    return True


class DeterministicConditions(NamedTuple):
    """Truth values of the four structural inequalities tested on a subset
    whose complement would have to absorb the flow.  Used as test oracles."""

    dense_complement: bool  # rho(S̄) > k|S̄|/w
    light_contact: bool  # nu(S) < k|S|
    shrink_dominates: bool  # (h-w)·rho(S) > d(S) - k|S|
    thin_boundary: bool | None  # eta(S) < h²·delta·k|S|, if delta given


def check_deterministic_conditions(
    H: Hypergraph,
    S: Iterable[int],
    p: OrientationParams,
    delta: float | None = None,
) -> DeterministicConditions:
    Sset = frozenset(S)
    comp = frozenset(range(H.n)) - Sset
    st = subset_stats(H, Sset, p)
    st_c = subset_stats(H, comp, p)
    size = len(Sset)
    d_S = st.d_S
    c1 = st_c.rho * p.w > p.k * len(comp)
    c2 = st.nu < p.k * size
    c3 = (p.h - p.w) * st.rho > d_S - p.k * size
    c4 = None
    if delta is not None:
        if delta <= 0:
            raise ValueError(f"delta must be positive, got {delta}")
        c4 = st.eta < p.h * p.h * delta * p.k * size
    return DeterministicConditions(c1, c2, c3, c4)


def expansion_condition(H: Hypergraph, S: Iterable[int], p: OrientationParams) -> bool:
    """dstar(S) >= k|S| + (total sign demand) - k·n.

    Holding for every S is equivalent to every w-induced subgraph having
    density <= k, which is the orientability certificate on simple edges.
    """
    st = subset_stats(H, S, p)
    total_demand = sum(p.sign_demand(len(e)) for e in H.edges)
    return st.dstar >= p.k * len(st.S) + total_demand - p.k * H.n


def recommended_gamma(p: OrientationParams) -> float:
    """Small-set cutoff e^-4 h^-6 / 4 under which the sparsity property is
    provable for the random model."""
    return math.exp(-4) / (4 * p.h ** 6)


# ---------------------------------------------------------------------------
# text format: first line "n m", then one edge per line as 0-based ids;
# '#' starts a comment, blank lines are skipped


def read_hypergraph(fh: TextIO) -> Hypergraph:
    rows: list[tuple[int, list[int]]] = []
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append((lineno, [int(tok) for tok in line.split()]))
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer token in {line!r}") from None
    if not rows:
        raise ValueError("empty hypergraph file")
    lineno, header = rows[0]
    if len(header) != 2:
        raise ValueError(f"line {lineno}: header must be 'n m', got {header}")
    n, m = header
    if len(rows) - 1 != m:
        raise ValueError(f"header promises {m} edges, file has {len(rows) - 1}")
    return Hypergraph(n, [row for _, row in rows[1:]])


def write_hypergraph(H: Hypergraph, fh: TextIO) -> None:
    fh.write(f"{H.n} {H.num_edges}\n")
    for e in H.edges:
        fh.write(" ".join(str(v) for v in e) + "\n")
