"""Independent numerical checks: RK4 trajectories, conservation drift, the action
functional and first-order action-variation estimates for finite maps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DimensionMismatch, DomainError, StepLimitExceeded
from .expr import (ZERO, Expr, add, as_expr, compile_expr, coord, diff, evaluate_array, mul, param,
                   pow_, substitute, time, vel)
from .mechanics import DynamicalSystem, _as_lagrangian

MAX_STEPS = 10_000_000
ALPHA = param("alpha")


def _state_names(n):
    return ["t"] + [f"q{i}" for i in range(1, n + 1)] + [f"v{i}" for i in range(1, n + 1)]


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid solution; ``q`` and ``v`` have shape (len(times), n)."""

    times: np.ndarray
    q: np.ndarray
    v: np.ndarray
    h: float
    params: dict = field(default_factory=dict)
    method: str = "RK4"

    @property
    def n(self):
        return self.q.shape[1]

    @property
    def states(self):
        return list(zip(map(tuple, self.q), map(tuple, self.v)))

    def __len__(self):
        return len(self.times)

    def env(self) -> dict:
        """Name -> array bindings for vectorized evaluation along the grid."""
        out = {"t": self.times}
        for i in range(self.n):
            out[f"q{i + 1}"] = self.q[:, i]
            out[f"v{i + 1}"] = self.v[:, i]
        for name, value in self.params.items():
            out[name] = np.full(len(self.times), float(value))
        return out

    def to_csv(self, path=None) -> str:
        """Header ``t,q1..qn,v1..vn`` and 17 significant digits per value."""
        data = np.column_stack([self.times, self.q, self.v])
        lines = [",".join(_state_names(self.n))]
        lines += [",".join(f"{x:.17g}" for x in row) for row in data]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def integrate(sys: DynamicalSystem, q0, v0, t0: float, t1: float, h: float, params=None) -> Trajectory:
    """Classic fourth-order Runge-Kutta for q' = v, v' = f(q, v, t).

    The grid has N = ceil((t1 - t0)/h) equal steps; the step actually used
    (at most ``h``) is stored on the trajectory.
    """
    n = sys.n
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    if q0.shape != (n,) or v0.shape != (n,):
        raise DimensionMismatch(f"initial data must have length {n}")
    if not h > 0:
        raise ValueError("step h must be positive")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    steps = math.ceil((t1 - t0) / h - 1e-9)
    if steps > MAX_STEPS:
        raise StepLimitExceeded(f"{steps} steps exceed the limit of {MAX_STEPS}")
    h = (t1 - t0) / steps
    params = dict(params or {})
    names = _state_names(n)
    fs = [compile_expr(fi, names, params) for fi in sys.f]

    def rhs(t, y):
        args = (t, *y)
        return np.concatenate([y[n:], [f(*args) for f in fs]])

    ts = t0 + h * np.arange(steps + 1)
    ys = np.empty((steps + 1, 2 * n))
    y = np.concatenate([q0, v0])
    ys[0] = y
    for k in range(steps):
        t = ts[k]
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise DomainError(f"solution left the finite range at t = {ts[k + 1]:.6g}")
        ys[k + 1] = y
    return Trajectory(ts, ys[:, :n].copy(), ys[:, n:].copy(), h, params)


def _along(e, traj: Trajectory) -> np.ndarray:
    vals = evaluate_array(as_expr(e), traj.env())
    if vals.shape != traj.times.shape:
        vals = np.broadcast_to(vals, traj.times.shape)
    if np.isnan(vals).any():
        k = int(np.argmax(np.isnan(vals)))
        raise DomainError(f"expression not evaluable at t = {traj.times[k]:.6g}")
    return vals


def conservation_drift(C, traj: Trajectory) -> float:
    """max_k |C(t_k) - C(t_0)| / max(1, |C(t_0)|)."""
    C = getattr(C, "C", C)
    vals = _along(C, traj)
    return float(np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0])))


def simpson(y, h: float):
    """Composite Simpson; an odd interval count ends with a 3/8 panel.

    Returns ``(value, adjusted)`` where ``adjusted`` says the 3/8 panel was used.
    """
    y = np.asarray(y, dtype=float)
    m = len(y) - 1
    if m < 1:
        return 0.0, False
    if m == 1:
        return h * (y[0] + y[1]) / 2, True
    if m % 2 == 0:
        return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())), False
    if m == 3:
        head = 0.0
    else:
        head, _ = simpson(y[:-3], h)
    tail = 3 * h / 8 * (y[-4] + 3 * y[-3] + 3 * y[-2] + y[-1])
    return float(head + tail), True


def action(L, traj: Trajectory, with_note: bool = False):
    """Simpson quadrature of L(q(t), v(t), t) over the trajectory grid."""
    lag = _as_lagrangian(L, traj.n)
    value, adjusted = simpson(_along(lag.L, traj), traj.h)
    return (value, adjusted) if with_note else value


@dataclass(frozen=True)
class FiniteTransformation:
    """t' = t_map(t, q, alpha), q'^i = q_maps[i](t, q, alpha); ``alpha`` is the parameter symbol."""

    t_map: Expr
    q_maps: tuple
    alpha: Expr = ALPHA

    def __post_init__(self):
        object.__setattr__(self, "t_map", as_expr(self.t_map))
        object.__setattr__(self, "q_maps", tuple(as_expr(x) for x in self.q_maps))
        for e in (self.t_map, *self.q_maps):
            if any(s.kind in ("vel", "accel") for s in e.free_symbols):
                raise ValueError("a point transformation may not depend on velocities")

    @property
    def n(self):
        return len(self.q_maps)

    def at(self, alpha: float):
        """Maps with the parameter fixed to ``alpha``."""
        b = {self.alpha: alpha}
        return substitute(self.t_map, b), tuple(substitute(x, b) for x in self.q_maps)

    def apply(self, t, q, alpha: float, params=None):
        """Image of one point (t, q)."""
        env = {"t": np.atleast_1d(float(t)), self.alpha.name: np.atleast_1d(float(alpha))}
        env.update({f"q{i + 1}": np.atleast_1d(float(x)) for i, x in enumerate(q)})
        env.update({k: np.atleast_1d(float(x)) for k, x in (params or {}).items()})
        tt = float(evaluate_array(self.t_map, env)[0])
        qq = tuple(float(evaluate_array(m, env)[0]) for m in self.q_maps)
        if not all(map(math.isfinite, (tt, *qq))):
            raise DomainError(f"transformation undefined at t = {t}, alpha = {alpha}")
        return tt, qq

    def identity_defect(self, points, params=None) -> float:
        """max deviation from the identity at alpha = 0 over ``points`` = [(t, q), ...]."""
        worst = 0.0
        for t, q in points:
            tt, qq = self.apply(t, q, 0.0, params)
            worst = max(worst, abs(tt - t), *(abs(a - b) for a, b in zip(qq, q)))
        return worst

    def composition_defect(self, a: float, b: float, points, params=None) -> float:
        """max |T_b(T_a(x)) - T_{a+b}(x)|: zero when alpha is an additive group parameter."""
        worst = 0.0
        for t, q in points:
            t1, q1 = self.apply(t, q, a, params)
            t2, q2 = self.apply(t1, q1, b, params)
            t3, q3 = self.apply(t, q, a + b, params)
            worst = max(worst, abs(t2 - t3), *(abs(x - y) for x, y in zip(q2, q3)))
        return worst


@dataclass(frozen=True)
class VariationCheck:
    alphas: tuple
    defects: tuple
    slope: float
    classification: str
    noise_floor: float
    quadrature_adjusted: bool

    def to_dict(self):
        return {
            "alphas": list(self.alphas),
            "defects": list(self.defects),
            "slope": self.slope if math.isfinite(self.slope) else "inf",
            "classification": self.classification,
            "noise_floor": self.noise_floor,
            "odd_interval_adjustment": self.quadrature_adjusted,
        }


def _mapped_state(ft: FiniteTransformation, alpha: float, n: int):
    """(tau, Q, V, dtau): image time, image coordinates and image velocities
    V = (dQ/dt)/(dtau/dt) as expressions along the original curve."""
    tau, Q = ft.at(alpha)

    def along(e):
        return add(diff(e, time()), *(mul(vel(j), diff(e, coord(j))) for j in range(1, n + 1)))

    dtau = along(tau)
    V = tuple(mul(along(Qi), pow_(dtau, -1)) for Qi in Q)
    return tau, Q, V, dtau


def transformed_action(L, ft: FiniteTransformation, traj: Trajectory, alpha: float):
    """Action of the mapped curve, computed on the original grid by change of variables.

    With t' = tau(t, q(t)) and q'(t') = Q(t, q(t)), the transformed action is
    the integral over t of L(Q, (dQ/dt)/(dtau/dt), tau) dtau/dt, where d/dt
    is taken along the original curve.  No interpolation is needed.
    """
    lag = _as_lagrangian(L, traj.n)
    tau, Q, V, dtau = _mapped_state(ft, alpha, traj.n)
    binding = {time(): tau}
    for i in range(traj.n):
        binding[coord(i + 1)] = Q[i]
        binding[vel(i + 1)] = V[i]
    integrand = mul(substitute(lag.L, binding), dtau)
    return simpson(_along(integrand, traj), traj.h)


def transformed_action_resampled(L, ft: FiniteTransformation, traj: Trajectory, alpha: float):
    """Same quantity by the direct route: map the grid points, resample the image
    curve on a uniform t' grid with cubic Hermite interpolation and integrate.

    Accuracy is limited by the interpolation (O(h^3) in the velocities), so
    this serves as an independent cross-check of :func:`transformed_action`.
    """
    lag = _as_lagrangian(L, traj.n)
    tau, Q, V, _ = _mapped_state(ft, alpha, traj.n)
    tn = _along(tau, traj)
    if np.any(np.diff(tn) <= 0):
        raise DomainError("mapped time is not increasing along the trajectory")
    qn = np.column_stack([_along(x, traj) for x in Q])
    vn = np.column_stack([_along(x, traj) for x in V])
    grid = np.linspace(tn[0], tn[-1], len(tn))
    env = {"t": grid}
    for i in range(traj.n):
        spline = CubicHermiteSpline(tn, qn[:, i], vn[:, i])
        env[f"q{i + 1}"] = spline(grid)
        env[f"v{i + 1}"] = spline.derivative()(grid)
    for name, value in traj.params.items():
        env[name] = np.full(len(grid), float(value))
    vals = evaluate_array(lag.L, env)
    if np.isnan(vals).any():
        raise DomainError("Lagrangian not evaluable along the mapped curve")
    return simpson(np.broadcast_to(vals, grid.shape), grid[1] - grid[0])


def action_variation_check(L, ft: FiniteTransformation, F, traj: Trajectory, alphas,
                           floor_rel: float = 1e-12) -> VariationCheck:
    """D(alpha) = [S(mapped) - S(original)] - alpha [F(t1) - F(t0)] and its log-log slope.

    Defects at or below ``floor_rel * max(1, |S|)`` are treated as exact
    zeros.  If every defect is at that floor the map is an exact symmetry
    (slope reported as inf); otherwise the slope is the least-squares fit
    over the defects above it.  Slope near 2 means the first-order terms
    cancel; near 1 means they do not.
    """
    lag = _as_lagrangian(L, traj.n)
    S, adj0 = simpson(_along(lag.L, traj), traj.h)
    Fvals = _along(as_expr(F), traj) if as_expr(F) != ZERO else np.zeros(len(traj))
    dF = float(Fvals[-1] - Fvals[0])
    floor = floor_rel * max(1.0, abs(S))
    defects = []
    adjusted = adj0
    for a in alphas:
        S2, adj = transformed_action(lag, ft, traj, float(a))
        adjusted = adjusted or adj
        defects.append(float(S2 - S - a * dF))
    big = [(a, abs(d)) for a, d in zip(alphas, defects) if abs(d) > floor]
    if not big:
        slope, cls = math.inf, "exact"
    elif len(big) == 1:
        slope, cls = math.nan, "inconclusive"
    else:
        x = np.log([a for a, _ in big])
        y = np.log([d for _, d in big])
        slope = float(np.polyfit(x, y, 1)[0])
        cls = "second-order" if slope >= 1.9 else "first-order"
    return VariationCheck(tuple(float(a) for a in alphas), tuple(defects), slope, cls, floor, adjusted)


__all__ = ["Trajectory", "integrate", "conservation_drift", "simpson", "action",
           "FiniteTransformation", "VariationCheck", "transformed_action",
           "transformed_action_resampled",
           "action_variation_check"]
