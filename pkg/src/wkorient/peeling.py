"""Core computation by peeling, with sign bookkeeping for later extension.

A vertex is *light* while its degree (alive-ball count) is at most k.
Peeling removes light vertices' balls; an edge that shrinks to size h-w is
deleted outright, freeing its remaining balls unsigned.  Every ball removed
from a still-alive edge earns its vertex a positive sign for that edge, and
the ball chosen at the moment an edge dies earns the edge's last sign — so a
fully peeled edge hands out exactly its total sign demand, and a surviving
edge of residual size h-j has handed out exactly j of them.

Two modes compute the identical core:

* deterministic — FIFO queue of light vertices, each popped vertex removed
  wholesale.  Production path, linear time.
* randomized — one uniformly random light *ball* per step, matching the
  idealized random process the ODE models; this is the mode that can emit a
  ProcessTrace.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, TextIO

import numpy as np

from .hypergraph import (
    Hypergraph,
    Orientation,
    OrientationParams,
    verify_orientation,
    w_density,
)
from .models import EdgeCountVector

__all__ = [
    "PeelResult",
    "ProcessTrace",
    "CoreStatistics",
    "ExtensionConflictError",
    "rancore",
    "extend_orientation",
    "core_statistics",
]


class ExtensionConflictError(RuntimeError):
    """Merging peel signs with a core orientation would sign the same vertex
    twice for one edge (only possible when an edge repeats a vertex)."""


@dataclass
class ProcessTrace:
    """Sampled counts along the randomized peeling process.

    Counts are raw; scaled() divides by the initial vertex count.  Sizes are
    tracked for every admissible residual size h..h-w+1.
    """

    n_bar: int
    params: OrientationParams
    stride: int
    steps: list
    B: list
    L: list
    HV: list
    A: list
    B_by_size: dict
    L_by_size: dict

    @property
    def sizes(self) -> list[int]:
        p = self.params
        return list(range(p.h, p.h - p.w, -1))

    def scaled(self) -> dict[str, np.ndarray]:
        scale = 1.0 / self.n_bar
        out = {
            "x": np.asarray(self.steps, dtype=float) * scale,
            "z_B": np.asarray(self.B, dtype=float) * scale,
            "z_L": np.asarray(self.L, dtype=float) * scale,
            "z_HV": np.asarray(self.HV, dtype=float) * scale,
            "z_A": np.asarray(self.A, dtype=float) * scale,
        }
        for s in self.sizes:
            zb = np.asarray(self.B_by_size[s], dtype=float) * scale
            zl = np.asarray(self.L_by_size[s], dtype=float) * scale
            out[f"z_B_{s}"] = zb
            out[f"z_L_{s}"] = zl
            out[f"z_H_{s}"] = zb - zl
        return out

    def to_csv(self, fh: TextIO) -> None:
        cols = ["x", "z_L", "z_B", "z_HV"]
        cols += [f"z_L_{s}" for s in self.sizes]
        cols += [f"z_H_{s}" for s in self.sizes]
        data = self.scaled()
        fh.write(",".join(cols) + "\n")
        for i in range(len(self.steps)):
            fh.write(",".join(f"{data[c][i]:.10g}" for c in cols) + "\n")


@dataclass(frozen=True)
class PeelResult:
    """Outcome of peeling: the core (vertices relabeled, rank i of
    core_vertices becomes id i), who got signed for what along the way, and
    what became of each original edge."""

    source: Hypergraph
    core: Hypergraph
    core_vertices: tuple[int, ...]
    # (vertex, edge ids it was signed for at that step), in removal order
    elimination: tuple[tuple[int, tuple[int, ...]], ...]
    # per original edge: (core edge id, residual size), or None if removed
    edge_fate: tuple[Optional[tuple[int, int]], ...]
    # per original edge: vertices signed during peeling, in grant order
    peel_signs: tuple[tuple[int, ...], ...]
    trace: Optional[ProcessTrace] = None


class _Peeler:
    """Shared mutable state for both peeling modes.

    Balls are numbered in edge order; all structures are flat lists.  Trace
    counters are maintained incrementally: B/L per size class move when an
    edge shrinks, and a heavy vertex turning light migrates all its alive
    balls into the light census at once.
    """

    def __init__(self, H: Hypergraph, p: OrientationParams):
        H.validate_sizes(p)
        self.H = H
        self.p = p
        n = H.n
        self.ball_vertex: list[int] = []
        self.ball_edge: list[int] = []
        self.edge_balls: list[list[int]] = []
        self.vertex_balls: list[list[int]] = [[] for _ in range(n)]
        for ei, e in enumerate(H.edges):
            ids = []
            for v in e:
                b = len(self.ball_vertex)
                self.ball_vertex.append(v)
                self.ball_edge.append(ei)
                self.vertex_balls[v].append(b)
                ids.append(b)
            self.edge_balls.append(ids)
        D = len(self.ball_vertex)
        self.ball_alive = [True] * D
        self.esize = [len(e) for e in H.edges]
        self.edge_alive = [True] * len(H.edges)
        self.deg = [len(bs) for bs in self.vertex_balls]
        k = p.k
        self.is_light = [d <= k for d in self.deg]

        # census counters
        self.B = D
        self.B_by_size = {s: 0 for s in range(p.h - p.w + 1, p.h + 1)}
        self.L_by_size = dict(self.B_by_size)
        self.edge_light = [0] * len(H.edges)
        for ei, e in enumerate(H.edges):
            s = self.esize[ei]
            self.B_by_size[s] += s
            nl = sum(1 for v in e if self.is_light[v])
            self.edge_light[ei] = nl
            self.L_by_size[s] += nl
        self.L = sum(self.L_by_size.values())
        self.HV = sum(1 for lt in self.is_light if not lt)
        self.A = sum(
            1 for v in range(n) if not self.is_light[v] and self.deg[v] == k + 1
        )

        # per-edge signs granted so far, and the removal log
        self.signs: list[list[int]] = [[] for _ in range(len(H.edges))]
        self.elimination: list[tuple[int, tuple[int, ...]]] = []

        # light-ball pool with O(1) removal (randomized mode)
        self.pool: list[int] = []
        self.pool_pos = [-1] * D

        self.newly_light: list[int] = []  # migration queue hook for det mode

    # -- pool helpers ------------------------------------------------------

    def pool_add(self, b: int) -> None:
        self.pool_pos[b] = len(self.pool)
        self.pool.append(b)

    def pool_discard(self, b: int) -> None:
        i = self.pool_pos[b]
        if i < 0:
            return
        last = self.pool[-1]
        self.pool[i] = last
        self.pool_pos[last] = i
        self.pool.pop()
        self.pool_pos[b] = -1

    def fill_pool(self) -> None:
        for b in range(len(self.ball_vertex)):
            if self.ball_alive[b] and self.is_light[self.ball_vertex[b]]:
                self.pool_add(b)

    # -- state transitions -------------------------------------------------

    def kill_ball(self, b: int, cls: int) -> None:
        """Remove one alive ball accounted in size class cls; no degree or
        edge-size side effects (callers handle those)."""
        v = self.ball_vertex[b]
        self.ball_alive[b] = False
        self.B -= 1
        self.B_by_size[cls] -= 1
        if self.is_light[v]:
            self.L -= 1
            self.L_by_size[cls] -= 1
            self.edge_light[self.ball_edge[b]] -= 1
            self.pool_discard(b)

    def shift_class(self, ei: int, old: int, new: int) -> None:
        """Move edge ei's remaining alive balls from size class old to new."""
        cnt = self.esize[ei]
        self.B_by_size[old] -= cnt
        self.B_by_size[new] += cnt
        nl = self.edge_light[ei]
        self.L_by_size[old] -= nl
        self.L_by_size[new] += nl

    def drop_degree(self, v: int) -> None:
        """Decrement deg[v] after an unsigned ball loss; handle the
        heavy-to-light migration."""
        old = self.deg[v]
        self.deg[v] = old - 1
        if self.is_light[v]:
            return
        k = self.p.k
        if old == k + 2:
            self.A += 1
        elif old == k + 1:
            self.A -= 1
            self.HV -= 1
            self.is_light[v] = True
            self.newly_light.append(v)
            for b in self.vertex_balls[v]:
                if self.ball_alive[b]:
                    ei = self.ball_edge[b]
                    cls = self.esize[ei]
                    self.L += 1
                    self.L_by_size[cls] += 1
                    self.edge_light[ei] += 1
                    self.pool_add(b)

    def remove_edge(self, ei: int, cls: int) -> None:
        """Delete edge ei whose remaining alive balls sit in class cls; the
        freed balls are unsigned and their bins lose degree."""
        self.edge_alive[ei] = False
        freed = [b for b in self.edge_balls[ei] if self.ball_alive[b]]
        for b in freed:
            self.kill_ball(b, cls)
        self.esize[ei] = 0
        for b in freed:
            self.drop_degree(self.ball_vertex[b])

    # -- the two peeling loops ----------------------------------------------

    def run_deterministic(self) -> None:
        floor = self.p.h - self.p.w
        queue = deque(v for v in range(self.H.n) if self.is_light[v])
        processed = [False] * self.H.n
        while queue:
            while self.newly_light:
                queue.append(self.newly_light.pop())
            if not queue:
                break
            v = queue.popleft()
            if processed[v]:
                continue
            processed[v] = True
            by_edge: dict[int, list[int]] = {}
            for b in self.vertex_balls[v]:
                if self.ball_alive[b]:
                    by_edge.setdefault(self.ball_edge[b], []).append(b)
            granted: list[int] = []
            for ei, balls in by_edge.items():
                s = self.esize[ei]
                c = len(balls)
                demand = s - floor  # signs the edge still owes
                for _ in range(min(c, demand)):
                    self.signs[ei].append(v)
                    granted.append(ei)
                for b in balls:
                    self.kill_ball(b, s)
                self.deg[v] -= c
                if s - c > floor:
                    self.esize[ei] = s - c
                    self.shift_class(ei, s, s - c)
                else:
                    self.esize[ei] = s - c  # transiently, for remove_edge
                    self.remove_edge(ei, s)
            self.elimination.append((v, tuple(granted)))
            while self.newly_light:
                queue.append(self.newly_light.pop())

    def run_randomized(self, rng: np.random.Generator, trace: Optional[ProcessTrace]) -> None:
        floor = self.p.h - self.p.w
        self.fill_pool()
        self.newly_light.clear()
        t = 0
        if trace is not None:
            self.record(trace, t)
        buf = np.empty(0)
        used = 0
        while self.pool:
            if used >= len(buf):
                buf = rng.random(4096)
                used = 0
            idx = int(buf[used] * len(self.pool))
            used += 1
            if idx == len(self.pool):  # guard the u == 1.0 edge
                idx -= 1
            b = self.pool[idx]
            v = self.ball_vertex[b]
            ei = self.ball_edge[b]
            s = self.esize[ei]
            self.signs[ei].append(v)
            self.elimination.append((v, (ei,)))
            self.kill_ball(b, s)
            self.deg[v] -= 1
            self.esize[ei] = s - 1
            if s - 1 > floor:
                self.shift_class(ei, s, s - 1)
            else:
                self.remove_edge(ei, s)
            t += 1
            if trace is not None and (t % trace.stride == 0 or not self.pool):
                self.record(trace, t)

    def record(self, trace: ProcessTrace, t: int) -> None:
        trace.steps.append(t)
        trace.B.append(self.B)
        trace.L.append(self.L)
        trace.HV.append(self.HV)
        trace.A.append(self.A)
        for s in trace.sizes:
            trace.B_by_size[s].append(self.B_by_size[s])
            trace.L_by_size[s].append(self.L_by_size[s])

    # -- harvest -------------------------------------------------------------

    def result(self, trace: Optional[ProcessTrace]) -> PeelResult:
        core_vertices = tuple(v for v in range(self.H.n) if not self.is_light[v])
        rank = {v: i for i, v in enumerate(core_vertices)}
        core_edges = []
        fate: list[Optional[tuple[int, int]]] = []
        for ei in range(len(self.H.edges)):
            if self.edge_alive[ei]:
                balls = [b for b in self.edge_balls[ei] if self.ball_alive[b]]
                core_edges.append(tuple(sorted(rank[self.ball_vertex[b]] for b in balls)))
                fate.append((len(core_edges) - 1, len(balls)))
            else:
                fate.append(None)
        core = Hypergraph(len(core_vertices), core_edges)
        return PeelResult(
            source=self.H,
            core=core,
            core_vertices=core_vertices,
            elimination=tuple(self.elimination),
            edge_fate=tuple(fate),
            peel_signs=tuple(tuple(s) for s in self.signs),
            trace=trace,
        )


def rancore(
    H: Hypergraph,
    p: OrientationParams,
    mode: str = "deterministic",
    rng: Optional[np.random.Generator] = None,
    trace: bool = False,
) -> PeelResult:
    """Peel H down to its (w, k+1)-core.

    mode="deterministic" uses the FIFO vertex queue; mode="randomized"
    removes one uniform light ball per step (rng required) and, with
    trace=True, samples the process census every ceil(n/1000) steps.
    """
    state = _Peeler(H, p)
    if mode == "deterministic":
        if trace:
            raise ValueError("process traces require the randomized mode")
        state.run_deterministic()
        tr = None
    elif mode == "randomized":
        if rng is None:
            raise ValueError("randomized mode needs an rng")
        tr = None
        if trace:
            stride = max(1, -(-H.n // 1000))
            tr = ProcessTrace(
                n_bar=H.n,
                params=p,
                stride=stride,
                steps=[],
                B=[],
                L=[],
                HV=[],
                A=[],
                B_by_size={s: [] for s in range(p.h - p.w + 1, p.h + 1)},
                L_by_size={s: [] for s in range(p.h - p.w + 1, p.h + 1)},
            )
        state.run_randomized(rng, tr)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return state.result(tr)


def extend_orientation(
    pr: PeelResult, core_orientation: Orientation, p: OrientationParams
) -> Orientation:
    """Merge the signs recorded during peeling with a valid orientation of
    the core, giving an orientation of the original hypergraph.

    Raises ExtensionConflictError when some edge would have to sign the same
    vertex twice (a repeated-vertex edge straddling the peel boundary);
    such an instance is non-orientable as far as this certificate goes.
    """
    if pr.core.num_edges > 0 or len(core_orientation.signs) > 0:
        ok, reason = verify_orientation(pr.core, core_orientation, p)
        if not ok:
            raise ValueError(f"core orientation invalid: {reason}")
    merged: list[tuple[int, ...]] = []
    for ei, fate in enumerate(pr.edge_fate):
        sig = list(pr.peel_signs[ei])
        if fate is not None:
            cid, _ = fate
            sig.extend(pr.core_vertices[r] for r in core_orientation.signs[cid])
        if len(set(sig)) != len(sig):
            raise ExtensionConflictError(
                f"edge {ei} would sign a vertex twice: {sorted(sig)}"
            )
        merged.append(tuple(sig))
    out = Orientation(merged)
    ok, reason = verify_orientation(pr.source, out, p)
    if not ok:  # pragma: no cover - internal consistency
        raise RuntimeError(f"extension produced an invalid orientation: {reason}")
    return out


@dataclass(frozen=True)
class CoreStatistics:
    n_core: int
    m_vec: EdgeCountVector
    kappa: Fraction
    mu_hat: float

    @property
    def empty(self) -> bool:
        return self.n_core == 0


def core_statistics(pr: PeelResult, p: OrientationParams) -> CoreStatistics:
    """Vertex count, per-size edge counts, w-density and mean degree of the
    core; all zeros when the core is empty."""
    core = pr.core
    if core.n == 0:
        return CoreStatistics(0, EdgeCountVector({}), Fraction(0), 0.0)
    m_vec = EdgeCountVector(core.edge_size_counts())
    return CoreStatistics(
        n_core=core.n,
        m_vec=m_vec,
        kappa=w_density(core, p),
        mu_hat=core.total_degree / core.n,
    )
