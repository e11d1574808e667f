"""Composite proximal gradient descent with pluggable stepsize schedules.

The solver is deliberately scalar-generic: points are plain Python lists
whose entries may be floats (benchmark mode) or exact rationals /
Q(sqrt2) numbers (verification mode).  The same update loop

    x_{t+1} = prox_{a_t h}(x_t - a_t grad f(x_t)),   a_t = alpha_t / M,

therefore runs both the floating-point benchmarks and the exact-arithmetic
runs used to reproduce the worst-case gap of the tight lower-bound
instance.  Subgradients of the nonsmooth part are recovered from the
update itself: s_{t+1} = (x_t - a_t g_t - x_{t+1}) / a_t.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .certificate import rate_from_certificate
from .exactnum import ONE, ZERO, rho_pow
from .schedule import silver_schedule

Vector = list


def _sub(u: Vector, v: Vector) -> Vector:
    return [a - b for a, b in zip(u, v)]


def _dot(u: Vector, v: Vector):
    total = 0
    for a, b in zip(u, v):
        total = total + a * b
    return total


def _norm2(u: Vector):
    return _dot(u, u)


# ---------------------------------------------------------------------------
# Oracles and problem instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothOracle:
    """Value/gradient access to the smooth part, with its constants."""

    value: Callable[[Vector], object]
    gradient: Callable[[Vector], Vector]
    smoothness: object  # M > 0
    strong_convexity: object = 0  # m >= 0, 0 = not strongly convex


@dataclass(frozen=True)
class ProxOracle:
    """Value/prox access to the nonsmooth part.

    ``value`` may return math.inf outside the domain (indicators);
    ``prox(x, a)`` minimizes h(z) + ||z - x||^2 / (2a).
    """

    value: Callable[[Vector], object]
    prox: Callable[[Vector, object], Vector]


@dataclass(frozen=True)
class ProblemInstance:
    smooth: SmoothOracle
    nonsmooth: ProxOracle
    dimension: int
    optimum: Vector | None = None
    optimal_value: object | None = None
    name: str = ""


@dataclass
class Trace:
    """Per-iteration record of a proximal gradient run.

    ``ss[t]`` holds the recovered subgradient s_{t+1}; optimum data is
    attached when the instance knows its minimizer (s_* = -grad f(x_*)).
    """

    steps: list
    xs: list[Vector]
    gs: list[Vector]
    ss: list[Vector]
    fs: list
    hs: list
    Fs: list
    x_star: Vector | None = None
    s_star: Vector | None = None
    f_star: object | None = None
    h_star: object | None = None
    F_star: object | None = None

    @property
    def n(self) -> int:
        return len(self.ss)


def _total(fv, hv):
    if isinstance(hv, float) and math.isinf(hv):
        return math.inf
    return fv + hv


def proximal_gd_run(problem: ProblemInstance, steps, x0: Vector) -> Trace:
    """Run proximal gradient descent for len(steps) iterations.

    Stepsizes are in unit-normalized form and are divided by the declared
    smoothness constant internally.  Raises on empty or nonpositive steps
    and on non-finite floating-point iterates.
    """
    steps = list(steps)
    if not steps:
        raise ValueError("stepsize schedule is empty")
    big_m = problem.smooth.smoothness
    fval, grad = problem.smooth.value, problem.smooth.gradient
    hval, prox = problem.nonsmooth.value, problem.nonsmooth.prox

    x = list(x0)
    xs, gs, ss = [x], [], []
    fs, hs = [fval(x)], [hval(x)]
    Fs = [_total(fs[0], hs[0])]
    for t, step in enumerate(steps):
        if not step > 0:
            raise ValueError(f"stepsize {t} is not positive: {step}")
        a = step if big_m == 1 else step / big_m  # keep exact scalars exact
        g = grad(x)
        y = [xv - a * gv for xv, gv in zip(x, g)]
        x_next = prox(y, a)
        if isinstance(x_next[0], float) and not all(math.isfinite(v) for v in x_next):
            raise ArithmeticError(f"non-finite iterate at iteration {t + 1}")
        gs.append(g)
        ss.append([(yv - xv) / a for yv, xv in zip(y, x_next)])
        xs.append(x_next)
        fs.append(fval(x_next))
        hs.append(hval(x_next))
        Fs.append(_total(fs[-1], hs[-1]))
        x = x_next
    gs.append(grad(x))  # gradient at the final iterate, needed by the trace

    trace = Trace(steps=steps, xs=xs, gs=gs, ss=ss, fs=fs, hs=hs, Fs=Fs)
    if problem.optimum is not None:
        x_star = list(problem.optimum)
        g_star = grad(x_star)
        trace.x_star = x_star
        trace.s_star = [-v for v in g_star]
        trace.f_star = fval(x_star)
        trace.h_star = hval(x_star)
        trace.F_star = (
            problem.optimal_value
            if problem.optimal_value is not None
            else _total(trace.f_star, trace.h_star)
        )
    return trace


# ---------------------------------------------------------------------------
# Prox oracle library
# ---------------------------------------------------------------------------


def prox_library(name: str, **params) -> ProxOracle:
    """Closed-form prox oracles: zero, l1, box, halfline, ball.

    All but ``ball`` are scalar-generic and work in exact arithmetic; the
    Euclidean ball needs a square root and is float-only.
    """
    if name == "zero":
        _reject_extra(params)
        return ProxOracle(value=lambda x: 0, prox=lambda x, a: list(x))

    if name == "l1":
        weight = params.pop("weight", 1)
        _reject_extra(params)
        if weight < 0:
            raise ValueError(f"l1 weight must be nonnegative, got {weight}")

        def value(x):
            return weight * sum(abs(v) for v in x)

        def prox(x, a):
            thr = a * weight
            out = []
            for v in x:
                if v > thr:
                    out.append(v - thr)
                elif v < -thr:
                    out.append(v + thr)
                else:
                    out.append(v * 0)
            return out

        return ProxOracle(value=value, prox=prox)

    if name == "box":
        lo = params.pop("lo", -1)
        hi = params.pop("hi", 1)
        _reject_extra(params)
        if not lo <= hi:
            raise ValueError(f"box bounds out of order: lo={lo}, hi={hi}")

        def value(x):
            return 0 if all(lo <= v <= hi for v in x) else math.inf

        def prox(x, a):
            return [lo if v < lo else hi if v > hi else v for v in x]

        return ProxOracle(value=value, prox=prox)

    if name == "halfline":
        _reject_extra(params)

        def value(x):
            return 0 if all(v >= 0 for v in x) else math.inf

        def prox(x, a):
            return [v if v > 0 else v * 0 for v in x]

        return ProxOracle(value=value, prox=prox)

    if name == "ball":
        radius = params.pop("radius", 1.0)
        _reject_extra(params)
        if not radius > 0:
            raise ValueError(f"ball radius must be positive, got {radius}")

        def value(x):
            r = math.sqrt(sum(v * v for v in x))
            return 0 if r <= radius * (1 + 1e-9) + 1e-12 else math.inf

        def prox(x, a):
            r = math.sqrt(sum(v * v for v in x))
            if r <= radius:
                return list(x)
            scale = radius / r
            return [v * scale for v in x]

        return ProxOracle(value=value, prox=prox)

    raise ValueError(f"unknown prox oracle {name!r}")


def _reject_extra(params: dict) -> None:
    if params:
        raise ValueError(f"unexpected prox parameters: {sorted(params)}")


# ---------------------------------------------------------------------------
# Co-coercivity evaluation on traces
# ---------------------------------------------------------------------------


def _trace_point(trace: Trace, i):
    if i == "*":
        if trace.x_star is None:
            raise ValueError("trace has no optimum data")
        return trace.x_star
    return trace.xs[i]


def _trace_grad(trace: Trace, i):
    if i == "*":
        if trace.s_star is None:
            raise ValueError("trace has no optimum data")
        return [-v for v in trace.s_star]
    return trace.gs[i]


def _trace_subgrad(trace: Trace, i):
    if i == "*":
        if trace.s_star is None:
            raise ValueError("trace has no optimum data")
        return trace.s_star
    if not 1 <= i <= trace.n:
        raise ValueError(f"no subgradient recorded at index {i}")
    return trace.ss[i - 1]


def _trace_f(trace: Trace, i):
    return trace.f_star if i == "*" else trace.fs[i]


def _trace_h(trace: Trace, i):
    if i == "*":
        return trace.h_star
    if not 1 <= i <= trace.n:
        raise ValueError(f"no usable nonsmooth value at index {i}")
    return trace.hs[i]


def cocoercivity_f(trace: Trace, i, j):
    """Smooth interpolation slack between trace indices i and j (or "*")."""
    if i == j:
        return 0
    xi, xj = _trace_point(trace, i), _trace_point(trace, j)
    gi, gj = _trace_grad(trace, i), _trace_grad(trace, j)
    fi, fj = _trace_f(trace, i), _trace_f(trace, j)
    return fi - fj - _dot(gj, _sub(xi, xj)) - _norm2(_sub(gi, gj)) / 2


def cocoercivity_h(trace: Trace, i, j):
    """Convex interpolation slack of the nonsmooth part (indices 1..n, "*")."""
    if i == j:
        return 0
    xi, xj = _trace_point(trace, i), _trace_point(trace, j)
    sj = _trace_subgrad(trace, j)
    _trace_subgrad(trace, i)  # both endpoints need subgradient data
    hi, hj = _trace_h(trace, i), _trace_h(trace, j)
    return hi - hj - _dot(sj, _sub(xi, xj))


# ---------------------------------------------------------------------------
# Rate constants and the tight lower-bound instance
# ---------------------------------------------------------------------------


def rate_bound(k: int, big_m: float, dist2: float) -> tuple[float, float]:
    """(headline bound, sharper certificate bound) for n = 2**k - 1 steps."""
    if big_m <= 0 or dist2 < 0:
        raise ValueError("need M > 0 and dist2 >= 0")
    n = 2**k - 1
    rho = rho_pow(1).to_float()
    display = rho / (4.0 * math.sqrt(2.0) * n ** math.log2(rho)) * big_m * dist2
    sharp = float(rate_from_certificate(k)) * big_m * dist2
    return display, sharp


def constant_baseline(n: int, big_m: float, dist2: float) -> float:
    """Tight worst-case gap of n constant unit steps: M dist2 / (4n)."""
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    return big_m * dist2 / (4 * n)


def lower_bound_instance(k: int, exact: bool = True):
    """Worst-case 1-D instance for n = 2**k - 1 silver steps.

    Linear objective with slope 1 / (2 (rho**k - 1)) constrained to the
    half-line x >= 0; from x_0 = 1 the final gap equals 1 / (4 rho**k - 4)
    exactly, which the exact-mode solver reproduces bit for bit.

    Returns (instance, expected_gap) with the gap always exact.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    gap = ONE / ((rho_pow(k) - ONE) * 4)
    slope = ONE / ((rho_pow(k) - ONE) * 2)
    if exact:
        a = slope
        optimum = [ZERO]
        optimal_value = ZERO
        smoothness = 1
    else:
        a = slope.to_float()
        optimum = [0.0]
        optimal_value = 0.0
        smoothness = 1.0
    smooth = SmoothOracle(
        value=lambda x: a * x[0],
        gradient=lambda x: [a],
        smoothness=smoothness,
        strong_convexity=0,
    )
    problem = ProblemInstance(
        smooth=smooth,
        nonsmooth=prox_library("halfline"),
        dimension=1,
        optimum=optimum,
        optimal_value=optimal_value,
        name=f"lower-bound-k{k}",
    )
    return problem, gap


# ---------------------------------------------------------------------------
# Strongly convex restarts
# ---------------------------------------------------------------------------


def restart_epoch_order(kappa: float) -> int:
    """Smallest k whose certificate bound halves the distance per epoch.

    Contraction per epoch of n = 2**k - 1 silver steps follows from the
    rate bound and strong convexity: ||x_n - x_*||^2 <= 2 kappa B_k
    ||x_0 - x_*||^2, so 2 kappa B_k <= 1/4 guarantees halving.  Ties go to
    the smaller k.
    """
    if kappa < 1:
        raise ValueError(f"condition number must be >= 1, got {kappa}")
    k = 1
    while 2.0 * kappa * float(rate_from_certificate(k)) > 0.25:
        k += 1
    return k


def restart_solve(
    problem: ProblemInstance,
    epsilon: float,
    x0: Vector,
    r0: float | None = None,
    epoch_log: list | None = None,
):
    """Silver-schedule epochs with guaranteed distance halving.

    Runs epochs of n = 2**k - 1 silver steps with k sized from the
    condition number, halving the guaranteed distance to the optimum each
    epoch, and stops once the guarantee reaches epsilon.  Returns
    (final point, total iteration count).
    """
    m = problem.smooth.strong_convexity
    if m is None or not m > 0:
        raise ValueError("restart_solve needs strong convexity m > 0")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    kappa = problem.smooth.smoothness / m
    k = restart_epoch_order(kappa)
    sched = [v.to_float() for v in silver_schedule(k)]
    if r0 is None:
        if problem.optimum is None:
            raise ValueError("need r0 or an instance with known optimum")
        r0 = math.sqrt(_norm2(_sub(x0, problem.optimum)))

    x = list(x0)
    guaranteed = float(r0)
    total = 0
    while guaranteed > epsilon:
        trace = proximal_gd_run(problem, sched, x)
        x = trace.xs[-1]
        total += len(sched)
        guaranteed /= 2
        if epoch_log is not None:
            measured = (
                math.sqrt(_norm2(_sub(x, problem.optimum)))
                if problem.optimum is not None
                else None
            )
            epoch_log.append(
                {"k": k, "iterations": len(sched), "guaranteed": guaranteed,
                 "distance": measured}
            )
    return x, total


# ---------------------------------------------------------------------------
# Random composite test instances (known minimizer by construction)
# ---------------------------------------------------------------------------


@dataclass
class _Quadratic:
    rows: list[list[float]]
    lin: list[float]

    def value(self, x: Vector) -> float:
        acc = 0.0
        for i, row in enumerate(self.rows):
            acc += x[i] * _dot(row, x)
        return 0.5 * acc + _dot(self.lin, x)

    def gradient(self, x: Vector) -> Vector:
        return [_dot(row, x) + b for row, b in zip(self.rows, self.lin)]


def random_quadratic_instance(
    dim: int,
    m_strong: float,
    m_smooth: float,
    h_kind: str,
    rng: np.random.Generator,
    weight: float = 1.0,
    box_lo: float = -1.0,
    box_hi: float = 1.0,
):
    """Random composite instance f + h with a known minimizer.

    f is a quadratic with spectrum in [m_strong, m_smooth] (both endpoints
    attained, so the declared constants are exact).  The minimizer x_* is
    drawn first together with a subgradient s_* of h at x_*, and the linear
    term is back-solved so that grad f(x_*) = -s_*, which makes x_* the
    global minimizer of the composite objective.

    Returns (instance, x0).
    """
    if not 0 <= m_strong <= m_smooth or m_smooth <= 0:
        raise ValueError("need 0 <= m_strong <= m_smooth and m_smooth > 0")
    eigs = rng.uniform(m_strong, m_smooth, size=dim)
    eigs[0] = m_strong
    eigs[-1] = m_smooth
    basis, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    mat = basis @ np.diag(eigs) @ basis.T
    mat = (mat + mat.T) / 2.0

    if h_kind == "zero":
        nonsmooth = prox_library("zero")
        x_star = rng.normal(size=dim)
        s_star = np.zeros(dim)
        h_at_star = 0.0
    elif h_kind == "l1":
        nonsmooth = prox_library("l1", weight=weight)
        x_star = rng.normal(size=dim) * (rng.random(size=dim) < 0.6)
        s_star = np.where(
            x_star != 0,
            weight * np.sign(x_star),
            rng.uniform(-weight, weight, size=dim),
        )
        h_at_star = weight * float(np.abs(x_star).sum())
    elif h_kind == "box":
        nonsmooth = prox_library("box", lo=box_lo, hi=box_hi)
        mid = (box_lo + box_hi) / 2.0
        x_star = np.clip(
            rng.normal(loc=mid, scale=(box_hi - box_lo), size=dim), box_lo, box_hi
        )
        s_star = np.where(
            x_star >= box_hi,
            rng.uniform(0.0, 1.0, size=dim),
            np.where(x_star <= box_lo, rng.uniform(-1.0, 0.0, size=dim), 0.0),
        )
        h_at_star = 0.0
    else:
        raise ValueError(f"unknown nonsmooth kind {h_kind!r}")

    lin = -(mat @ x_star + s_star)
    quad = _Quadratic(rows=mat.tolist(), lin=lin.tolist())
    x_star_list = [float(v) for v in x_star]
    f_at_star = quad.value(x_star_list)
    smooth = SmoothOracle(
        value=quad.value,
        gradient=quad.gradient,
        smoothness=float(m_smooth),
        strong_convexity=float(m_strong),
    )
    problem = ProblemInstance(
        smooth=smooth,
        nonsmooth=nonsmooth,
        dimension=dim,
        optimum=x_star_list,
        optimal_value=f_at_star + h_at_star,
        name=f"quadratic-{h_kind}-d{dim}",
    )
    radius = rng.uniform(0.5, 2.0)
    direction = rng.normal(size=dim)
    direction *= radius / np.linalg.norm(direction)
    x0 = [float(a + d) for a, d in zip(x_star, direction)]
    return problem, x0


# ---------------------------------------------------------------------------
# Oracle spot checks
# ---------------------------------------------------------------------------


def check_gradient_lipschitz(
    oracle: SmoothOracle, dim: int, seed: int = 0, pairs: int = 50
) -> float:
    """Largest violation of ||g(x) - g(y)|| <= M ||x - y|| on random pairs."""
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(pairs):
        x = [rng.uniform(-3, 3) for _ in range(dim)]
        y = [rng.uniform(-3, 3) for _ in range(dim)]
        lhs = math.sqrt(_norm2(_sub(oracle.gradient(x), oracle.gradient(y))))
        rhs = oracle.smoothness * math.sqrt(_norm2(_sub(x, y)))
        worst = max(worst, lhs - rhs)
    return worst


def check_prox_nonexpansive(
    oracle: ProxOracle, dim: int, seed: int = 0, pairs: int = 50
) -> float:
    """Largest violation of ||prox(x) - prox(y)|| <= ||x - y|| on random pairs."""
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(pairs):
        x = [rng.uniform(-3, 3) for _ in range(dim)]
        y = [rng.uniform(-3, 3) for _ in range(dim)]
        a = rng.uniform(0.1, 3.0)
        lhs = math.sqrt(_norm2(_sub(oracle.prox(x, a), oracle.prox(y, a))))
        worst = max(worst, lhs - math.sqrt(_norm2(_sub(x, y))))
    return worst


def check_optimality(problem: ProblemInstance, steps=(0.5, 1.0, 2.0)) -> float:
    """Largest prox fixed-point residual at the declared optimum."""
    if problem.optimum is None:
        raise ValueError("instance has no declared optimum")
    x_star = list(problem.optimum)
    g = problem.smooth.gradient(x_star)
    worst = 0.0
    for a in steps:
        moved = problem.nonsmooth.prox([x - a * gv for x, gv in zip(x_star, g)], a)
        worst = max(worst, math.sqrt(_norm2(_sub(moved, x_star))))
    return worst
