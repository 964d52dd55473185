"""Independent reference implementations used only by the test suite.

Everything here is deliberately written in the most direct style possible
(exhaustive enumeration, plain BFS augmenting paths, mpmath series) so that
agreement with the package is meaningful.  Nothing imports from wkorient.
"""

from __future__ import annotations

import itertools
from collections import Counter, deque
from fractions import Fraction

import mpmath


# ---------------------------------------------------------------------------
# hypergraph statistics, recounted from scratch
# ---------------------------------------------------------------------------

def sign_demand(h: int, w: int, size: int) -> int:
    """Signs a residual edge of the given size still needs: w - (h - size)."""
    return w - (h - size)


def kappa_exact(edges, n: int, h: int, w: int) -> Fraction:
    num = sum(sign_demand(h, w, len(e)) for e in edges)
    return Fraction(num, n)


def w_induced(edges, S, h: int, w: int):
    """Edges x∩S (multiplicity kept) of size >= h-w+1, over original labels."""
    S = set(S)
    out = []
    for e in edges:
        inter = tuple(v for v in e if v in S)
        if len(inter) >= h - w + 1:
            out.append(inter)
    return out


def induced_degrees(edges, S, h: int, w: int) -> Counter:
    deg: Counter = Counter()
    for e in w_induced(edges, S, h, w):
        deg.update(e)
    return deg


def all_subsets_kappa_ok(edges, n: int, h: int, w: int, k: int) -> bool:
    """kappa(w-induced on S) <= k for every nonempty S, exact rationals."""
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            sub = w_induced(edges, S, h, w)
            if sub and kappa_exact(sub, len(S), h, w) > k:
                return False
    return True


def subset_stats_recount(edges, n: int, h: int, w: int, S):
    """Second, independent counting of the S-statistics (different style)."""
    S = set(S)
    comp = set(range(n)) - S
    d_S = 0
    m_table: Counter = Counter()  # (size, i) -> count
    rho = nu = eta = 0
    for e in edges:
        i = sum(1 for v in e if v in S)
        if i == 0:
            continue  # untouched edges appear in no field
        d_S += i
        m_table[(len(e), i)] += 1
        if i >= 2:
            rho += 1
        if i >= 1:
            nu += 1
        if i >= 1 and any(v in comp for v in e):
            eta += 1
    penalty = 0
    for (size, i), cnt in m_table.items():
        demand = sign_demand(h, w, size)
        if i > demand:
            penalty += (i - demand) * cnt
    q = Counter()
    for (size, i), cnt in m_table.items():
        q[size] += i * cnt
    return {
        "d_S": d_S,
        "m_table": dict(m_table),
        "rho": rho,
        "nu": nu,
        "eta": eta,
        "q": dict(q),
        "dstar": d_S - penalty,
    }


# ---------------------------------------------------------------------------
# brute-force core: maximal S whose w-induced subgraph has min degree >= k+1
# ---------------------------------------------------------------------------

def brute_force_core(edges, n: int, h: int, w: int, k: int):
    """Union of all subsets S on which every vertex has induced degree >= k+1.

    Returns (sorted vertex list, sorted tuple of sorted core edges).
    """
    good = []
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            deg = induced_degrees(edges, S, h, w)
            if all(deg[v] >= k + 1 for v in S):
                good.append(set(S))
    core_vs: set = set()
    for S in good:
        core_vs |= S
    if core_vs:
        deg = induced_degrees(edges, core_vs, h, w)
        assert all(deg[v] >= k + 1 for v in core_vs), "union not closed"
    core_edges = tuple(sorted(tuple(sorted(e))
                              for e in w_induced(edges, core_vs, h, w)))
    return sorted(core_vs), core_edges


# ---------------------------------------------------------------------------
# exhaustive orientation search
# ---------------------------------------------------------------------------

def orientation_search(edges, n: int, h: int, w: int, k: int):
    """Backtracking search over all per-edge sign sets; None if impossible.

    A size-s edge needs w-(h-s) distinct signed vertices chosen from its
    distinct vertex support.
    """
    choices = []
    for e in edges:
        need = sign_demand(h, w, len(e))
        support = sorted(set(e))
        if need < 0 or need > len(support):
            return None
        choices.append(list(itertools.combinations(support, need)))
    indeg = [0] * n

    def rec(i: int):
        if i == len(choices):
            return []
        for pick in choices[i]:
            if all(indeg[v] < k for v in pick):
                for v in pick:
                    indeg[v] += 1
                rest = rec(i + 1)
                if rest is not None:
                    return [pick] + rest
                for v in pick:
                    indeg[v] -= 1
        return None

    return rec(0)


def min_max_indegree_search(edges, n: int, h: int, w: int):
    if not edges:
        return 0
    kmax = max(Counter(v for e in edges for v in e).values())
    for k in range(0, kmax + 1):
        if orientation_search(edges, n, h, w, k) is not None:
            return k
    raise AssertionError("max degree must orient")


# ---------------------------------------------------------------------------
# naive max flow (Edmonds-Karp on a dict of dicts)
# ---------------------------------------------------------------------------

def naive_max_flow(cap: dict, s, t):
    """cap: {(u, v): capacity}. Returns (value, {(u,v): flow})."""
    residual: dict = {}
    adj: dict = {}
    for (u, v), c in cap.items():
        residual[(u, v)] = residual.get((u, v), 0) + c
        residual.setdefault((v, u), residual.get((v, u), 0))
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    value = 0
    while True:
        parent = {s: None}
        q = deque([s])
        while q and t not in parent:
            u = q.popleft()
            for v in adj.get(u, ()):
                if v not in parent and residual.get((u, v), 0) > 0:
                    parent[v] = u
                    q.append(v)
        if t not in parent:
            break
        path = []
        v = t
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        aug = min(residual[(u, v)] for u, v in path)
        for u, v in path:
            residual[(u, v)] -= aug
            residual[(v, u)] = residual.get((v, u), 0) + aug
        value += aug
    flow = {}
    for (u, v), c in cap.items():
        f = c - residual[(u, v)]
        if f > 0:
            flow[(u, v)] = f
    return value, flow


# ---------------------------------------------------------------------------
# Poisson tails and the lambda-mu relation in mpmath
# ---------------------------------------------------------------------------

def f_k_mp(k: int, mu, dps: int = 60):
    """P(Poisson(mu) >= k) at high precision (mpmath.mpf result)."""
    if k <= 0:
        return mpmath.mpf(1)
    with mpmath.workdps(dps):
        mu = mpmath.mpf(mu)
        head = mpmath.mpf(0)
        for i in range(k):
            head += mpmath.exp(-mu) * mu**i / mpmath.factorial(i)
        return 1 - head


def truncated_mean_mp(lam, k: int, dps: int = 60):
    """Mean of Poisson(lam) conditioned on >= k: lam*f_{k-1}/f_k."""
    with mpmath.workdps(dps):
        lam = mpmath.mpf(lam)
        return lam * f_k_mp(k - 1, lam, dps) / f_k_mp(k, lam, dps)


def solve_lambda_mp(mu, k: int, dps: int = 60):
    """Bisection for lambda with lambda*f_k = mu*f_{k+1}; needs mu > k+1."""
    with mpmath.workdps(dps):
        mu = mpmath.mpf(mu)

        def g(y):
            return y * f_k_mp(k, y, dps) - mu * f_k_mp(k + 1, y, dps)

        lo, hi = mpmath.mpf("1e-6"), mu
        while g(lo) >= 0:
            lo /= 2
        assert g(hi) >= 0
        for _ in range(dps * 4):
            mid = (lo + hi) / 2
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


# ---------------------------------------------------------------------------
# truncated multinomial Multi(n, D, k+1): exact enumeration (tiny cases)
# ---------------------------------------------------------------------------

def truncated_multinomial_enum(n: int, D: int, kplus1: int):
    """Exact pmf over degree vectors with min >= kplus1 and sum D.

    P(d) is proportional to the multinomial coefficient D!/prod(d_i!).
    Returns {tuple(d): Fraction probability}.
    """
    weights = {}
    def rec(i, left, prefix):
        if i == n - 1:
            if left >= kplus1:
                d = prefix + (left,)
                wgt = Fraction(1)
                for di in d:
                    wgt /= math_factorial(di)
                weights[d] = wgt
            return
        for di in range(kplus1, left - kplus1 * (n - 1 - i) + 1):
            rec(i + 1, left - di, prefix + (di,))
    rec(0, D, ())
    total = sum(weights.values())
    return {d: wgt / total for d, wgt in weights.items()}


def math_factorial(x: int):
    out = 1
    for i in range(2, x + 1):
        out *= i
    return out


# ---------------------------------------------------------------------------
# exact outcome distribution of the core model (tiny cases only)
# ---------------------------------------------------------------------------

def _pairings(items):
    """All partitions of items into unordered groups of the given chunk size
    are produced by group_partitions; this helper does size-2 for clarity."""
    return group_partitions(items, 2)


def group_partitions(items, size):
    """All ways to split `items` (a list) into unordered groups of `size`."""
    items = list(items)
    if not items:
        yield []
        return
    first = items[0]
    for rest in itertools.combinations(items[1:], size - 1):
        group = (first,) + rest
        remaining = [x for x in items[1:] if x not in rest]
        for tail in group_partitions(remaining, size):
            yield [group] + tail


def core_model_enum(n: int, m_by_size: dict, kplus1: int):
    """Exact distribution over labeled multihypergraphs from the
    allocate-then-colour-then-partition construction.

    m_by_size: {edge size: edge count}.  Returns {canonical hypergraph:
    Fraction probability} where the canonical form is a sorted tuple of
    sorted vertex tuples.
    """
    D = sum(s * m for s, m in m_by_size.items())
    degs = truncated_multinomial_enum(n, D, kplus1)
    outcome: dict = {}
    for d, p_d in degs.items():
        balls = []  # ball id -> owning bin
        for v, dv in enumerate(d):
            balls.extend([v] * dv)
        ball_ids = list(range(D))
        sizes = sorted(m_by_size)
        # choose which ball ids get each colour, then partition each class
        def colourings(remaining, si):
            if si == len(sizes):
                yield []
                return
            s = sizes[si]
            cnt = s * m_by_size[s]
            for chosen in itertools.combinations(remaining, cnt):
                rest = [b for b in remaining if b not in set(chosen)]
                for tail in colourings(rest, si + 1):
                    yield [(s, chosen)] + tail
        cases = []
        for col in colourings(ball_ids, 0):
            per_colour = []
            for s, chosen in col:
                per_colour.append(list(group_partitions(list(chosen), s)))
            for combo in itertools.product(*per_colour):
                edges = []
                for groups in combo:
                    for g in groups:
                        edges.append(tuple(sorted(balls[b] for b in g)))
                cases.append(tuple(sorted(edges)))
        share = p_d / len(cases)
        for hg in cases:
            outcome[hg] = outcome.get(hg, Fraction(0)) + share
    return outcome


# ---------------------------------------------------------------------------
# classical (k+1)-core fixed point (the w = 1 specialisation)
# ---------------------------------------------------------------------------

def classical_core_fixed_point(h: int, k: int, mu_bar, dps: int = 40):
    """Largest fixed point of lam = mu_bar * f_k(lam)^(h-1).

    Returns (alpha, mu_hat) = (f_{k+1}(lam), lam*f_k(lam)/f_{k+1}(lam)),
    or (0, 0) when the iteration collapses to ~0 (empty core).
    """
    with mpmath.workdps(dps):
        lam = mpmath.mpf(mu_bar)
        for _ in range(20000):
            new = mu_bar * f_k_mp(k, lam, dps) ** (h - 1)
            if abs(new - lam) < mpmath.mpf(10) ** (-dps + 5):
                lam = new
                break
            lam = new
        if lam < mpmath.mpf("1e-8"):
            return mpmath.mpf(0), mpmath.mpf(0)
        alpha = f_k_mp(k + 1, lam, dps)
        mu_hat = lam * f_k_mp(k, lam, dps) / alpha
        return alpha, mu_hat
