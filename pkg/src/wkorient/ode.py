"""The peeling-process differential equations, core-size prediction, and
threshold bisection.

State vector (w-1 bucket pairs plus three scalars):

    y = [zL_{h-1} .. zL_{h-w+1},  zH_{h-1} .. zH_{h-w+1},  z_L, z_B, z_HV]

where zL_s / zH_s are light/heavy balls (per initial vertex) in residual
edges of size s.  The size-h buckets are algebraic: zL_h = z_L - sum of the
others, zH_h likewise from z_B - z_L.  The rate lambda of the heavy-degree
law is recovered algebraically from mu = (z_B - z_L)/z_HV at every
evaluation; the paper-style lambda' integration is kept behind
lambda_mode="ode" purely as a consistency check.

Integration runs until the first boundary event: z_L hitting 0 (the clean
ending — the light balls run out and what remains is the core), the heavy
ball mass or heavy vertex count hitting 0 (core dissolves), or the mean
heavy degree falling to k+2 (edge of the provable domain; reported, not
guessed at).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .hypergraph import OrientationParams
from .peeling import ProcessTrace
from .poisson import (
    heavy_bucket_fraction,
    initial_conditions,
    log_poisson_tail,
    poisson_tail,
    solve_lambda,
)

__all__ = [
    "OdeParams",
    "OdeState",
    "CoreStats",
    "ThresholdResult",
    "Trajectory",
    "StiffnessError",
    "BracketError",
    "f_star",
    "derivatives",
    "integrate",
    "find_threshold",
    "trajectory_vs_trace",
]


class StiffnessError(RuntimeError):
    """The integrator's step size collapsed before any boundary event."""


class BracketError(RuntimeError):
    """Threshold bisection could not find a sign change to bracket."""


@dataclass(frozen=True)
class OdeParams:
    """Integration controls for one (h, w, k, mu_bar) run."""

    p: OrientationParams
    mu_bar: float
    rtol: float = 1e-12
    atol: float = 1e-14
    first_step: Optional[float] = None  # default: z_L(0)/10
    max_step: float = math.inf
    samples: int = 512

    def __post_init__(self):
        if self.mu_bar <= 0:
            raise ValueError(f"mu_bar must be positive, got {self.mu_bar}")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.samples < 2:
            raise ValueError("need at least two sample points")


def f_star(a: float, b: float, z_l: float) -> float:
    """Extension of (a/z_l)*(a/b) used for the shrink-rate terms.

    Matches the Lipschitz continuation: exact ratio on 0 <= a <= b with
    b > 0; 0 at the double origin; b/z_l when a overshoots b; absolute
    values elsewhere.  z_l <= 0 (outside the domain) contributes 0 — the
    events own that region.
    """
    if z_l <= 0.0:
        return 0.0
    if a == 0.0 and b == 0.0:
        return 0.0
    if 0.0 <= a <= b:
        return a * a / (z_l * b)
    if a > b >= 0.0:
        return b / z_l
    aa, bb = abs(a), abs(b)
    if bb == 0.0:
        return 0.0
    return aa * aa / (z_l * bb)


def _ratio(num: float, den: float) -> float:
    """num/den as a proportion: 0 when either side has vanished, capped at 1."""
    if num <= 0.0 or den <= 0.0:
        return 0.0
    r = num / den
    return r if r < 1.0 else 1.0


def _poisson_logpmf(j: int, lam: float) -> float:
    return j * math.log(lam) - lam - math.lgamma(j + 1)


class _System:
    """RHS and events for one parameter set; keeps a warm-started lambda."""

    def __init__(self, params: OdeParams, lambda_mode: str = "algebraic"):
        if lambda_mode not in ("algebraic", "ode"):
            raise ValueError(f"unknown lambda_mode {lambda_mode!r}")
        self.params = params
        self.p = params.p
        self.lambda_mode = lambda_mode
        self.nb = self.p.w - 1
        self.dim = 2 * self.nb + 3 + (1 if lambda_mode == "ode" else 0)
        self._warm_lambda: Optional[float] = None

    # layout helpers
    @property
    def i_zL(self) -> int:
        return 2 * self.nb

    @property
    def i_zB(self) -> int:
        return 2 * self.nb + 1

    @property
    def i_zHV(self) -> int:
        return 2 * self.nb + 2

    def buckets(self, y) -> tuple[list[float], list[float]]:
        """Full per-size light/heavy ball lists for sizes h, h-1, ..,
        h-w+1 (index i = size h-i), with the algebraic size-h entries."""
        nb = self.nb
        zL = float(y[self.i_zL])
        heavy = float(y[self.i_zB]) - zL
        ZL = [zL - float(sum(y[:nb]))] + [float(v) for v in y[:nb]]
        ZH = [heavy - float(sum(y[nb : 2 * nb]))] + [float(v) for v in y[nb : 2 * nb]]
        return ZL, ZH

    def solve_rate(self, mu: float) -> float:
        k = self.p.k
        mu_eff = max(mu, k + 1 + 1e-9)
        lam = solve_lambda(mu_eff, k, x0=self._warm_lambda)
        self._warm_lambda = lam
        return lam

    def rhs(self, x: float, y: np.ndarray) -> np.ndarray:
        p = self.p
        h, w, k = p.h, p.w, p.k
        nb = self.nb
        zL = float(y[self.i_zL])
        zB = float(y[self.i_zB])
        zHV = float(y[self.i_zHV])
        heavy = zB - zL
        ZL, ZH = self.buckets(y)
        ZB = [l + hh for l, hh in zip(ZL, ZH)]

        # rate of heavy->light migrations: an edge dies (its light ball was
        # drawn from the smallest class), freeing h-w balls, each of which
        # sits in an exactly-(k+1)-ball heavy bin with probability
        # (k+1) z_A / (z_B - z_L)
        if self.lambda_mode == "ode":
            lam = float(y[-1])
        elif zHV > 0.0 and heavy > 0.0:
            lam = self.solve_rate(heavy / zHV)
        else:
            lam = None
        if lam is not None and lam > 0.0 and heavy > 0.0 and zHV > 0.0:
            z_a = heavy_bucket_fraction(lam, k) * zHV
            hit_small = _ratio((k + 1) * z_a, heavy)
        else:
            z_a = 0.0
            hit_small = 0.0
        pick_last = _ratio(ZL[-1], zL)
        G = pick_last * (h - w) * _ratio(ZH[-1], ZB[-1]) * hit_small

        dy = np.empty(self.dim)
        for j in range(1, w):  # residual size s = h - j
            s = h - j
            pick = _ratio(ZL[j], zL)
            dy[j - 1] = (
                -pick
                - (s - 1) * f_star(ZL[j], ZB[j], zL)
                + G * k * _ratio(ZH[j], heavy)
                + s * f_star(ZL[j - 1], ZB[j - 1], zL)
            )
            dy[nb + j - 1] = (
                -pick * (s - 1) * _ratio(ZH[j], ZB[j])
                - G * k * _ratio(ZH[j], heavy)
                + _ratio(ZL[j - 1], zL) * s * _ratio(ZH[j - 1], ZB[j - 1])
            )
        dy[self.i_zL] = -1.0 - (h - w) * f_star(ZL[-1], ZB[-1], zL) + k * G
        dy[self.i_zB] = -1.0 - (h - w) * pick_last
        dy[self.i_zHV] = -G

        if self.lambda_mode == "ode":
            dy[-1] = self._lambda_prime(lam, zL, zB, zHV, dy)
        return dy

    def _lambda_prime(self, lam, zL, zB, zHV, dy) -> float:
        """Differentiated form of the defining identity
        lambda f_k(lambda) = mu(x) f_{k+1}(lambda)."""
        k = self.p.k
        if zHV <= 0.0 or lam <= 0.0:
            return 0.0
        heavy = zB - zL
        mu = heavy / zHV
        mu_prime = (
            (dy[self.i_zB] - dy[self.i_zL]) * zHV - heavy * dy[self.i_zHV]
        ) / (zHV * zHV)
        pmf_km1 = math.exp(_poisson_logpmf(k - 1, lam)) if k >= 1 else 0.0
        pmf_k = math.exp(_poisson_logpmf(k, lam))
        denom = poisson_tail(k, lam) + lam * pmf_km1 - mu * pmf_k
        return mu_prime * poisson_tail(k + 1, lam) / denom

    def events(self) -> list[Callable]:
        k = self.p.k

        def ev_zl(x, y):
            return y[self.i_zL]

        def ev_heavy(x, y):
            return y[self.i_zB] - y[self.i_zL]

        def ev_hv(x, y):
            return y[self.i_zHV]

        def ev_mu(x, y):
            # linear form of mu > k+2, safe when z_HV crosses zero
            return (y[self.i_zB] - y[self.i_zL]) - (k + 2) * y[self.i_zHV]

        evs = [ev_zl, ev_heavy, ev_hv, ev_mu]
        for ev in evs:
            ev.terminal = True
            ev.direction = -1
        return evs


_EVENT_NAMES = ("z_L", "z_B_minus_z_L", "z_HV", "mu_floor")


@dataclass(frozen=True)
class OdeState:
    """One point of the system, with the derived quantities unpacked."""

    x: float
    z_L_by_size: dict
    z_H_by_size: dict
    z_L: float
    z_B: float
    z_HV: float
    lam: float
    mu: float
    z_A: float

    @classmethod
    def from_vector(cls, x: float, y: np.ndarray, params: OdeParams) -> "OdeState":
        sys = _System(params)
        ZL, ZH = sys.buckets(y)
        zL = float(y[sys.i_zL])
        zB = float(y[sys.i_zB])
        zHV = float(y[sys.i_zHV])
        heavy = zB - zL
        sizes = list(range(params.p.h, params.p.h - params.p.w, -1))
        mu = heavy / zHV if zHV > 0 else math.inf
        lam = sys.solve_rate(mu) if zHV > 0 and heavy > 0 else 0.0
        z_a = heavy_bucket_fraction(lam, params.p.k) * zHV if lam > 0 else 0.0
        return cls(
            x=x,
            z_L_by_size=dict(zip(sizes, ZL)),
            z_H_by_size=dict(zip(sizes, ZH)),
            z_L=zL,
            z_B=zB,
            z_HV=zHV,
            lam=lam,
            mu=mu,
            z_A=z_a,
        )

    def to_vector(self, params: OdeParams) -> np.ndarray:
        sizes = list(range(params.p.h - 1, params.p.h - params.p.w, -1))
        parts = [self.z_L_by_size[s] for s in sizes]
        parts += [self.z_H_by_size[s] for s in sizes]
        parts += [self.z_L, self.z_B, self.z_HV]
        return np.asarray(parts)


def derivatives(state: OdeState, params: OdeParams) -> np.ndarray:
    """Derivative vector at a state point (bucket pairs, z_L, z_B, z_HV)."""
    sys = _System(params)
    return sys.rhs(state.x, state.to_vector(params))


@dataclass(frozen=True)
class CoreStats:
    """Predicted core: alpha = surviving vertex fraction, beta[s] = edges
    of size s per initial vertex, kappa/mu_hat its density and mean degree."""

    x_star: float
    alpha: float
    beta: dict
    kappa: float
    mu_hat: float
    terminated_by: str

    @property
    def empty(self) -> bool:
        return self.alpha <= 0.0


@dataclass(frozen=True)
class Trajectory:
    params: OdeParams
    lambda_mode: str
    x: np.ndarray
    y: np.ndarray  # state x len(x), rows per _System layout
    lam: np.ndarray
    mu: np.ndarray
    dense: object  # OdeSolution over [0, x_end]

    @property
    def sizes(self) -> list[int]:
        p = self.params.p
        return list(range(p.h, p.h - p.w, -1))

    def columns(self) -> dict[str, np.ndarray]:
        sys = _System(self.params)
        nb = sys.nb
        zL = self.y[sys.i_zL]
        zB = self.y[sys.i_zB]
        zHV = self.y[sys.i_zHV]
        heavy = zB - zL
        out = {"x": self.x, "z_L": zL, "z_B": zB, "z_HV": zHV}
        sizes = self.sizes
        bucketsL = [zL - self.y[:nb].sum(axis=0)] + [self.y[i] for i in range(nb)]
        bucketsH = [heavy - self.y[nb : 2 * nb].sum(axis=0)] + [
            self.y[nb + i] for i in range(nb)
        ]
        for s, colL, colH in zip(sizes, bucketsL, bucketsH):
            out[f"z_L_{s}"] = colL
            out[f"z_H_{s}"] = colH
        out["lambda"] = self.lam
        out["mu"] = self.mu
        k = self.params.p.k
        out["z_A"] = np.array(
            [
                heavy_bucket_fraction(l, k) * v if l > 0 and v > 0 else 0.0
                for l, v in zip(self.lam, zHV)
            ]
        )
        return out

    def eval_state(self, x: float) -> np.ndarray:
        return self.dense(x)

    def to_csv(self, fh) -> None:
        cols = self.columns()
        names = ["x", "z_L", "z_B", "z_HV"]
        names += [f"z_L_{s}" for s in self.sizes]
        names += [f"z_H_{s}" for s in self.sizes]
        names += ["lambda", "mu"]
        fh.write(",".join(names) + "\n")
        for i in range(len(self.x)):
            fh.write(",".join(f"{cols[c][i]:.12g}" for c in names) + "\n")


def _initial_vector(params: OdeParams, lambda_mode: str) -> np.ndarray:
    p = params.p
    z_l0, z_b0, z_hv0, lam0 = initial_conditions(params.mu_bar, p.k)
    nb = p.w - 1
    y0 = np.zeros(2 * nb + 3 + (1 if lambda_mode == "ode" else 0))
    y0[2 * nb] = z_l0
    y0[2 * nb + 1] = z_b0
    y0[2 * nb + 2] = z_hv0
    if lambda_mode == "ode":
        y0[-1] = lam0
    return y0


def _stats_from_state(
    params: OdeParams, x_star: float, y: np.ndarray, terminated_by: str
) -> CoreStats:
    p = params.p
    sys = _System(params)
    if terminated_by != "z_L":
        sizes = list(range(p.h, p.h - p.w, -1))
        return CoreStats(
            x_star=x_star,
            alpha=0.0,
            beta={s: 0.0 for s in sizes},
            kappa=0.0,
            mu_hat=0.0,
            terminated_by=terminated_by,
        )
    ZL, ZH = sys.buckets(y)
    alpha = float(y[sys.i_zHV])
    sizes = list(range(p.h, p.h - p.w, -1))
    beta = {s: max(zh, 0.0) / s for s, zh in zip(sizes, ZH)}
    demand = sum(p.sign_demand(s) * b for s, b in beta.items())
    balls = sum(s * b for s, b in beta.items())
    kappa = demand / alpha if alpha > 0 else 0.0
    mu_hat = balls / alpha if alpha > 0 else 0.0
    return CoreStats(
        x_star=x_star,
        alpha=alpha,
        beta=beta,
        kappa=kappa,
        mu_hat=mu_hat,
        terminated_by=terminated_by,
    )


def integrate(
    params: OdeParams, lambda_mode: str = "algebraic"
) -> tuple[Trajectory, CoreStats]:
    """Run the system from its initial conditions to the first boundary
    event and read off the core prediction.

    Raises ValueError when the start already sits outside the domain
    (no heavy vertices, or mean heavy degree <= k+2) and StiffnessError when
    the integrator stalls.
    """
    p = params.p
    z_l0, z_b0, z_hv0, _ = initial_conditions(params.mu_bar, p.k)
    heavy0 = z_b0 - z_l0
    if z_hv0 <= 0.0:
        raise ValueError(f"no heavy vertices at mu_bar={params.mu_bar}")
    if heavy0 - (p.k + 2) * z_hv0 <= 0.0:
        raise ValueError(
            f"initial mean heavy degree {heavy0 / z_hv0:.6g} is not above k+2"
        )
    sys = _System(params, lambda_mode)
    y0 = _initial_vector(params, lambda_mode)

    if z_l0 <= 0.0:
        # mu_bar so large that no vertex starts light (the complement tail
        # underflows): the whole graph is its own core
        stats = _stats_from_state(params, 0.0, y0, "z_L")
        xgrid = np.zeros(1)
        ymat = y0[: 2 * sys.nb + 3].reshape(-1, 1)
        lam = np.array([params.mu_bar])
        mu = np.array([heavy0 / z_hv0])
        return (
            Trajectory(params, lambda_mode, xgrid, ymat, lam, mu, dense=None),
            stats,
        )

    first = params.first_step if params.first_step is not None else z_l0 / 10.0
    sol = solve_ivp(
        sys.rhs,
        (0.0, params.mu_bar),
        y0,
        method="DOP853",
        events=sys.events(),
        dense_output=True,
        rtol=params.rtol,
        atol=params.atol,
        first_step=min(first, params.mu_bar / 2),
        max_step=params.max_step,
    )
    if sol.status == -1:
        raise StiffnessError(f"integrator failed: {sol.message}; last x={sol.t[-1]}")
    if sol.status != 1:
        raise StiffnessError(
            f"no boundary event before x={params.mu_bar}; final state {sol.y[:, -1]}"
        )
    fired = [i for i, te in enumerate(sol.t_events) if len(te)]
    idx = min(fired, key=lambda i: sol.t_events[i][0])
    # simultaneous crossings: prefer the z_L root, it defines the core
    x_star = float(sol.t_events[idx][0])
    for i in fired:
        if _EVENT_NAMES[i] == "z_L" and sol.t_events[i][0] <= x_star + 1e-15:
            idx = i
            break
    x_star = float(sol.t_events[idx][0])
    y_star = sol.y_events[idx][0]
    terminated_by = _EVENT_NAMES[idx]

    xgrid = np.linspace(0.0, x_star, params.samples)
    ymat = sol.sol(xgrid)
    nstate = 2 * sys.nb + 3
    lam = np.empty(len(xgrid))
    mu = np.empty(len(xgrid))
    warm = None
    for i in range(len(xgrid)):
        zL = ymat[sys.i_zL, i]
        zB = ymat[sys.i_zB, i]
        zHV = ymat[sys.i_zHV, i]
        heavy = zB - zL
        if lambda_mode == "ode":
            mu[i] = heavy / zHV if zHV > 0 else math.nan
            lam[i] = ymat[-1, i]
        elif zHV > 0 and heavy > 0 and heavy / zHV > p.k + 1 + 1e-9:
            mu[i] = heavy / zHV
            lam[i] = solve_lambda(mu[i], p.k, x0=warm)
            warm = lam[i]
        else:
            mu[i] = math.nan
            lam[i] = math.nan
    traj = Trajectory(
        params, lambda_mode, xgrid, ymat[:nstate], lam, mu, dense=sol.sol
    )
    stats = _stats_from_state(params, x_star, y_star, terminated_by)
    return traj, stats


@dataclass(frozen=True)
class ThresholdResult:
    mu_tilde: float
    bracket: tuple[float, float]
    kappa_lo: float
    kappa_hi: float
    iterations: int
    stats_lo: Optional[CoreStats]
    stats_hi: Optional[CoreStats]
    stats_at_threshold: Optional[CoreStats]

    @property
    def mu_hat(self) -> float:
        return self.stats_at_threshold.mu_hat if self.stats_at_threshold else 0.0


def find_threshold(
    p: OrientationParams,
    tol: float = 1e-4,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> ThresholdResult:
    """Bisection on mu_bar for the core density kappa(mu_bar) = k.

    Runs that never produce a core (domain violated at the start, or the
    trajectory exits through a non-z_L boundary) count as kappa = 0.  The
    seed bracket is [k, hk/w]; hk/w is the hard counting bound above which
    density must exceed k, but both ends are expanded a few times if the
    sign change isn't there yet.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")

    def kappa_of(mu_bar: float) -> tuple[float, Optional[CoreStats]]:
        try:
            _, stats = integrate(OdeParams(p, mu_bar, rtol=rtol, atol=atol))
        except ValueError:
            return 0.0, None
        return stats.kappa, stats

    lo = float(p.k)
    hi = p.h * p.k / p.w
    kappa_lo, stats_lo = kappa_of(lo)
    tries = 0
    while kappa_lo > p.k:
        lo *= 0.8
        kappa_lo, stats_lo = kappa_of(lo)
        tries += 1
        if tries > 8:
            raise BracketError(f"no lower bracket below mu_bar={lo}")
    kappa_hi, stats_hi = kappa_of(hi)
    tries = 0
    while kappa_hi <= p.k:
        hi += max(0.5, 0.1 * hi)
        kappa_hi, stats_hi = kappa_of(hi)
        tries += 1
        if tries > 8:
            raise BracketError(f"no upper bracket up to mu_bar={hi}")
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        kappa_mid, stats_mid = kappa_of(mid)
        if kappa_mid <= p.k:
            lo, kappa_lo, stats_lo = mid, kappa_mid, stats_mid
        else:
            hi, kappa_hi, stats_hi = mid, kappa_mid, stats_mid
        iterations += 1
        if iterations > 200:  # pragma: no cover - tol>0 guarantees exit
            raise BracketError("bisection failed to converge")
    mu_tilde = 0.5 * (lo + hi)
    _, stats_mid = kappa_of(mu_tilde)
    return ThresholdResult(
        mu_tilde=mu_tilde,
        bracket=(lo, hi),
        kappa_lo=kappa_lo,
        kappa_hi=kappa_hi,
        iterations=iterations,
        stats_lo=stats_lo,
        stats_hi=stats_hi,
        stats_at_threshold=stats_mid,
    )


def trajectory_vs_trace(traj: Trajectory, trace: ProcessTrace) -> dict[str, float]:
    """Sup-norm deviation between the solved trajectory and a scaled
    simulation trace, per variable, relative to the variable's sup over the
    trace.  Only the overlap of the two x-ranges is compared."""
    if traj.dense is None:
        raise ValueError("single-point trajectory has nothing to compare")
    scaled = trace.scaled()
    xs = scaled["x"]
    mask = xs <= traj.x[-1]
    if not mask.any():
        raise ValueError("trace and trajectory share no x-range")
    xs = xs[mask]
    sys = _System(traj.params)
    nb = sys.nb
    ymat = traj.dense(xs)
    zL = ymat[sys.i_zL]
    zB = ymat[sys.i_zB]
    zHV = ymat[sys.i_zHV]
    heavy = zB - zL
    cols = {"z_L": zL, "z_B": zB, "z_HV": zHV}
    sizes = traj.sizes
    bucketsL = [zL - ymat[:nb].sum(axis=0)] + [ymat[i] for i in range(nb)]
    bucketsH = [heavy - ymat[nb : 2 * nb].sum(axis=0)] + [
        ymat[nb + i] for i in range(nb)
    ]
    for s, colL, colH in zip(sizes, bucketsL, bucketsH):
        cols[f"z_L_{s}"] = colL
        cols[f"z_H_{s}"] = colH
    k = traj.params.p.k
    lam = np.empty(len(xs))
    warm = None
    for i in range(len(xs)):
        mu_i = heavy[i] / zHV[i] if zHV[i] > 0 else 0.0
        if mu_i > k + 1 + 1e-9:
            warm = solve_lambda(mu_i, k, x0=warm)
            lam[i] = warm
        else:
            lam[i] = 0.0
    cols["z_A"] = np.array(
        [
            heavy_bucket_fraction(l, k) * v if l > 0 and v > 0 else 0.0
            for l, v in zip(lam, zHV)
        ]
    )
    out = {}
    for name, series in cols.items():
        ref = scaled[name][mask]
        scale = max(float(np.max(np.abs(ref))), 1e-9)
        out[name] = float(np.max(np.abs(series - ref))) / scale
    return out
