"""Exact construction and verification of the multi-step descent certificate.

For a horizon n = 2**k - 1 the certificate consists of

  * multipliers for the smooth part (a dense grid ``lambda_bar`` over
    iterate pairs plus a separate row for the optimum),
  * multipliers for the nonsmooth part (``mu_bar`` plus its optimum row),
  * a slack matrix S whose positive semidefiniteness makes the residual
    quadratic form a sum of squares, and
  * the coefficients of the single extra square u.

All objects are built by a doubling recursion: a certificate of order k+1
glues two copies of the order-k certificate and adds a sparse correction
(O(1) entries) plus a low-rank correction (O(1) rows built from the
stepsizes and their companion sequence).  Everything lives in Q(sqrt2) and
every check below is an exact computation: no floating point is involved
unless explicitly requested (the optional eigenvalue probe of S).

The descent identity states that the multiplier-weighted sum of
co-coercivities equals

    (2 rho**k - 1)(F_* - F_n) + rho/(2 sqrt2) ||x_0 - x_*||^2
        - (||u||^2 + Tr(V S V^T)) / 2,

identically in the free variables (gradients, subgradients, function
values, and the initial offset).  Because both sides are polynomials in
those variables, evaluating them on random rational points and comparing
exactly is a sound identity test: a wrong coefficient survives undetected
only on a measure-zero set.

Note on the slack matrix: S is stored symmetric, with first row and column
(1/sqrt2, -1, 0, ..., 0, +1).  An equivalent presentation elsewhere lists
the first row with opposite signs; expanding the two squared terms of the
order-1 certificate confirms the symmetric form used here.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

from .exactnum import ONE, RHO, SQRT2, ZERO, RadicalScalar, rho_pow
from .schedule import c_sequence, silver_schedule

INV_SQRT2 = RadicalScalar(0, Fraction(1, 2))  # 1/sqrt2 = sqrt2/2
RHO_OVER_2SQRT2 = RadicalScalar(Fraction(1, 2), Fraction(1, 4))  # rho/(2 sqrt2)

Matrix = list[list[RadicalScalar]]


@dataclass(frozen=True)
class MultiplierF:
    """Multipliers for the smooth co-coercivities.

    ``bar[i][j]`` weights the pair (iterate i, iterate j) for
    0 <= i, j <= n; ``star_row[j]`` weights (optimum, iterate j).
    """

    k: int
    bar: Matrix
    star_row: list[RadicalScalar]


@dataclass(frozen=True)
class MultiplierH:
    """Multipliers for the nonsmooth co-coercivities.

    ``bar[i][j]`` weights (iterate i+1, iterate j+1) for 0 <= i, j <= n-1
    (subgradients only exist from iterate 1 on); ``star_row[j]`` weights
    (optimum, iterate j+1).
    """

    k: int
    bar: Matrix
    star_row: list[RadicalScalar]


@dataclass(frozen=True)
class SlackMatrix:
    """Slack quadratic-form matrices.

    ``bar_l`` is the n x n core, ``lap`` the (n+1) x (n+1) Laplacian with
    border -c and corner 2(rho**k - 1), and ``s`` the (n+2) x (n+2) matrix
    with corner 1/sqrt2 whose positive semidefiniteness is certified via a
    Schur complement.
    """

    k: int
    bar_l: Matrix
    lap: Matrix
    s: Matrix


@dataclass(frozen=True)
class UCoefficients:
    """Coefficients of the extra square u over the labeled directions.

    u = init*(x_0 - x_*) + sum_i g[i]*g_i + sum_j s[j]*s_{j+1} + s_star*s_*.
    """

    init: RadicalScalar
    g: tuple[RadicalScalar, ...]  # coefficients of g_0 .. g_n
    s: tuple[RadicalScalar, ...]  # coefficients of s_1 .. s_n
    s_star: RadicalScalar


@dataclass(frozen=True)
class CertificateBundle:
    k: int
    n: int
    pi: list[RadicalScalar]
    c: list[RadicalScalar]
    lam: MultiplierF
    mu: MultiplierH
    slack: SlackMatrix
    u_coeffs: UCoefficients


def _zeros(rows: int, cols: int) -> Matrix:
    return [[ZERO] * cols for _ in range(rows)]


def build_lambda(k: int) -> MultiplierF:
    """Smooth-part multipliers of order k."""
    bar: Matrix = [[ZERO, RHO], [ONE, ZERO]]
    rho2 = rho_pow(2)
    for j in range(1, k):
        n = 2**j - 1
        pi = silver_schedule(j)
        new = _zeros(2 * n + 2, 2 * n + 2)
        # glue two copies, the second scaled by rho^2
        for i in range(n + 1):
            src = bar[i]
            lo, hi = new[i], new[n + 1 + i]
            for jj in range(n + 1):
                v = src[jj]
                if v:
                    lo[jj] = v
                    hi[n + 1 + jj] = rho2 * v
        # sparse correction: two entries coupling the copies
        new[n][2 * n + 1] = new[n][2 * n + 1] + RHO
        new[2 * n + 1][n] = new[2 * n + 1][n] + rho_pow(j)
        # low-rank correction: two rows proportional to the stepsizes
        for jj in range(n + 1, 2 * n + 1):
            add = RHO * pi[jj - n - 1]
            new[n][jj] = new[n][jj] + add
            new[2 * n + 1][jj] = new[2 * n + 1][jj] + add
        bar = new
    star = silver_schedule(k) + [rho_pow(k)]
    return MultiplierF(k=k, bar=bar, star_row=star)


def build_mu(k: int) -> MultiplierH:
    """Nonsmooth-part multipliers of order k."""
    bar: Matrix = [[ZERO]]
    rho2 = rho_pow(2)
    for j in range(1, k):
        n = 2**j - 1
        pi = silver_schedule(j)
        c = c_sequence(j)
        new = _zeros(2 * n + 1, 2 * n + 1)
        for i in range(n):
            src = bar[i]
            lo, hi = new[i], new[n + 1 + i]
            for jj in range(n):
                v = src[jj]
                if v:
                    lo[jj] = v
                    hi[n + 1 + jj] = rho2 * v
        # sparse correction (rows/cols here are 0-based: iterate i+1)
        new[n - 1][n] = new[n - 1][n] + rho_pow(j)
        new[n][n + 1] = new[n][n + 1] + rho2
        new[2 * n][n] = new[2 * n][n] + (RHO - rho_pow(-j)) * (rho_pow(j - 1) + ONE)
        # low-rank correction
        mid = rho_pow(j - 1) + ONE
        w_hi = rho_pow(j) / mid
        w_lo = ONE - w_hi
        w_rho = RHO / mid
        for jj in range(n):
            gap = c[jj] - pi[jj]
            if gap:
                new[n - 1][jj] = new[n - 1][jj] + w_lo * gap
                new[n][jj] = new[n][jj] + w_hi * gap
        for jj in range(n + 1, 2 * n + 1):
            p = pi[jj - n - 1]
            new[n - 1][jj] = new[n - 1][jj] + w_hi * p
            new[n][jj] = new[n][jj] + w_rho * p
            new[2 * n][jj] = (
                new[2 * n][jj] + (RHO + ONE) * c[jj - n - 1] - (ONE + rho_pow(-j)) * p
            )
        bar = new
    c = c_sequence(k)
    star = [c[0] + ONE] + c[1:]
    return MultiplierH(k=k, bar=bar, star_row=star)


def build_slack(k: int) -> SlackMatrix:
    """Slack matrices of order k."""
    bar: Matrix = [[SQRT2 * 2]]  # 2(rho - 1)
    rho2 = rho_pow(2)
    for j in range(1, k):
        n = 2**j - 1
        pi = silver_schedule(j)
        c = c_sequence(j)
        gap = [c[t] - pi[t] for t in range(n)]
        core = [[bar[r][s] + gap[r] * gap[s] for s in range(n)] for r in range(n)]
        new = _zeros(2 * n + 1, 2 * n + 1)
        for r in range(n):
            for s in range(n):
                new[r][s] = core[r][s]
                new[n + 1 + r][n + 1 + s] = rho2 * core[r][s]
        rk = rho_pow(j)
        for r in range(n):
            v = -(rk * gap[r])
            new[r][n] = v
            new[n][r] = v
            w = -(RHO * pi[r])
            new[n + 1 + r][n] = w
            new[n][n + 1 + r] = w
        new[n][n] = (rho_pow(j - 1) + ONE) * (rho_pow(j + 1) + ONE)
        # subtract the outer product of the next-level companion gap
        pi_next = silver_schedule(j + 1)
        c_next = c_sequence(j + 1)
        big_gap = [c_next[t] - pi_next[t] for t in range(2 * n + 1)]
        for r in range(2 * n + 1):
            gr = big_gap[r]
            if gr:
                row = new[r]
                for s in range(2 * n + 1):
                    if big_gap[s]:
                        row[s] = row[s] - gr * big_gap[s]
        bar = new
    n = 2**k - 1
    c = c_sequence(k)
    lap = [[bar[r][s] for s in range(n)] + [-c[r]] for r in range(n)]
    lap.append([-c[s] for s in range(n)] + [(rho_pow(k) - ONE) * 2])
    s_mat = _zeros(n + 2, n + 2)
    s_mat[0][0] = INV_SQRT2
    s_mat[0][1] = -ONE
    s_mat[1][0] = -ONE
    s_mat[0][n + 1] = ONE
    s_mat[n + 1][0] = ONE
    for r in range(n + 1):
        for s in range(n + 1):
            s_mat[1 + r][1 + s] = lap[r][s]
    return SlackMatrix(k=k, bar_l=bar, lap=lap, s=s_mat)


def build_u_coeffs(k: int) -> UCoefficients:
    pi = silver_schedule(k)
    c = c_sequence(k)
    return UCoefficients(
        init=ONE,
        g=tuple(-a for a in pi) + (-rho_pow(k),),
        s=tuple(-cj for cj in c),
        s_star=-ONE,
    )


@lru_cache(maxsize=None)
def build_bundle(k: int) -> CertificateBundle:
    """Full certificate of order k (memoized; treat as read-only)."""
    if k < 1:
        raise ValueError(f"certificate order k must be >= 1, got {k}")
    return CertificateBundle(
        k=k,
        n=2**k - 1,
        pi=silver_schedule(k),
        c=c_sequence(k),
        lam=build_lambda(k),
        mu=build_mu(k),
        slack=build_slack(k),
        u_coeffs=build_u_coeffs(k),
    )


# ---------------------------------------------------------------------------
# Tamper hooks (negative controls for the verification suite)
# ---------------------------------------------------------------------------

TAMPER_TARGETS = ("lambda", "mu", "slack", "u")


def tamper_bundle(bundle: CertificateBundle, target: str) -> CertificateBundle:
    """Return a copy of the bundle with one entry perturbed by +1.

    Used as a negative control: each perturbation must make the descent
    identity fail on random inputs.
    """
    if target == "lambda":
        bar = [row[:] for row in bundle.lam.bar]
        bar[0][1] = bar[0][1] + ONE
        return replace(bundle, lam=replace(bundle.lam, bar=bar))
    if target == "mu":
        star = bundle.mu.star_row[:]
        star[0] = star[0] + ONE
        return replace(bundle, mu=replace(bundle.mu, star_row=star))
    if target == "slack":
        s_mat = [row[:] for row in bundle.slack.s]
        s_mat[0][0] = s_mat[0][0] + ONE
        return replace(bundle, slack=replace(bundle.slack, s=s_mat))
    if target == "u":
        g = list(bundle.u_coeffs.g)
        g[-1] = g[-1] + ONE
        return replace(bundle, u_coeffs=replace(bundle.u_coeffs, g=tuple(g)))
    raise ValueError(f"unknown tamper target {target!r}; choose from {TAMPER_TARGETS}")


# ---------------------------------------------------------------------------
# Exact checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    detail: str = ""


def check_multipliers_nonneg(bundle: CertificateBundle) -> CheckReport:
    """Exact sign check of every off-diagonal multiplier entry.

    Also cross-checks the last row of mu_bar against its closed form
    (rho**k - 1) * (c_j - pi_j), which is how the one non-obviously
    nonnegative block is controlled.
    """
    lam, mu = bundle.lam, bundle.mu
    n = bundle.n
    for i in range(n + 1):
        row = lam.bar[i]
        for j in range(n + 1):
            if i != j and row[j].sign() < 0:
                return CheckReport(
                    "nonneg", False, f"lambda_bar[{i}][{j}] = {row[j]} < 0"
                )
    for j, v in enumerate(lam.star_row):
        if v.sign() < 0:
            return CheckReport("nonneg", False, f"lambda_star[{j}] = {v} < 0")
    for i in range(n):
        row = mu.bar[i]
        for j in range(n):
            if i != j and row[j].sign() < 0:
                return CheckReport("nonneg", False, f"mu_bar[{i}][{j}] = {row[j]} < 0")
    for j, v in enumerate(mu.star_row):
        if v.sign() < 0:
            return CheckReport("nonneg", False, f"mu_star[{j}] = {v} < 0")
    scale = rho_pow(bundle.k) - ONE
    for j in range(n - 1):
        expected = scale * (bundle.c[j] - bundle.pi[j])
        if mu.bar[n - 1][j] != expected:
            return CheckReport(
                "nonneg",
                False,
                f"mu_bar[{n - 1}][{j}] = {mu.bar[n - 1][j]} deviates from "
                f"closed form {expected}",
            )
    return CheckReport("nonneg", True)


def check_laplacian(bundle: CertificateBundle) -> CheckReport:
    """Exact Laplacian structure of the bordered slack matrix.

    Verifies (a) the core plus the companion-gap outer product has
    nonpositive off-diagonal entries, and (b) every row of the bordered
    matrix sums to exactly zero with nonpositive off-diagonal entries.
    """
    n = bundle.n
    gap = [bundle.c[t] - bundle.pi[t] for t in range(n)]
    bar = bundle.slack.bar_l
    for r in range(n):
        for s in range(n):
            if r != s and (bar[r][s] + gap[r] * gap[s]).sign() > 0:
                return CheckReport(
                    "laplacian",
                    False,
                    f"core-plus-outer entry [{r}][{s}] is positive",
                )
    lap = bundle.slack.lap
    for r in range(n + 1):
        total = ZERO
        row = lap[r]
        for s in range(n + 1):
            v = row[s]
            total = total + v
            if r != s and v.sign() > 0:
                return CheckReport(
                    "laplacian", False, f"off-diagonal L[{r}][{s}] = {v} > 0"
                )
        if total:
            return CheckReport("laplacian", False, f"row {r} sums to {total}, not 0")
    return CheckReport("laplacian", True)


def check_schur_psd(bundle: CertificateBundle, float_eig_probe: bool = False) -> CheckReport:
    """Certify S >= 0 exactly via its Schur complement.

    The corner of S is 1/sqrt2 > 0, so S is positive semidefinite iff
    L - sqrt2 * v v^T with v = -e_1 + e_{n+1} is.  That matrix is shown to
    be Laplacian: zero row sums and nonpositive off-diagonals (the only
    entries that change are the four in rows/columns 1 and n+1, and the
    off-diagonal one needs c_1 >= sqrt2).  Optionally also probes the
    minimum eigenvalue of S in floating point.
    """
    n = bundle.n
    lap = bundle.slack.lap
    schur = [row[:] for row in lap]
    schur[0][0] = schur[0][0] - SQRT2
    schur[n][n] = schur[n][n] - SQRT2
    schur[0][n] = schur[0][n] + SQRT2
    schur[n][0] = schur[n][0] + SQRT2
    for r in range(n + 1):
        total = ZERO
        row = schur[r]
        for s in range(n + 1):
            v = row[s]
            total = total + v
            if r != s and v.sign() > 0:
                return CheckReport(
                    "schur", False, f"Schur complement off-diagonal [{r}][{s}] = {v} > 0"
                )
        if total:
            return CheckReport(
                "schur", False, f"Schur complement row {r} sums to {total}, not 0"
            )
    detail = f"corner entry (1,{n + 1}) = {schur[0][n]} <= 0 since c_1 >= sqrt2"
    if float_eig_probe:
        import numpy as np

        s_float = [[v.to_float() for v in row] for row in bundle.slack.s]
        min_eig = float(np.linalg.eigvalsh(np.array(s_float)).min())
        if min_eig < -1e-9:
            return CheckReport("schur", False, f"float min eigenvalue {min_eig:.3e}")
        detail += f"; float min eigenvalue {min_eig:.3e}"
    return CheckReport("schur", True, detail)


# ---------------------------------------------------------------------------
# Randomized exact test of the multi-step descent identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    k: int
    trials: int
    dim: int
    failures: tuple[int, ...]
    first_residual: str = ""

    @property
    def passed(self) -> bool:
        return not self.failures


def sample_free_trace(pi: list[RadicalScalar], dim: int, rng: random.Random):
    """Random assignment of the identity's free variables, as a solver trace.

    Gradient/subgradient coordinates and all function values are small
    random integers (as exact rationals); the iterates are then forced by
    the update x_{t+1} = x_t - alpha_t (g_t + s_{t+1}), the optimum sits at
    the origin, and g_* = -s_*.  Both sides of the descent identity are
    polynomials in these free variables, so exact evaluation on random
    rational points is a sound identity test.
    """
    from .solver import Trace

    n = len(pi)

    def coord():
        return Fraction(rng.randint(-5, 5))

    def vec():
        return [coord() for _ in range(dim)]

    gs = [vec() for _ in range(n + 1)]
    ss = [vec() for _ in range(n)]
    s_star = vec()
    fs = [coord() for _ in range(n + 1)]
    hs = [coord() for _ in range(n + 1)]  # h_0 never enters the identity
    f_star, h_star = coord(), coord()
    xs = [[RadicalScalar(c) for c in vec()]]
    for t in range(n):
        a = pi[t]
        xs.append(
            [xv - a * (gv + sv) for xv, gv, sv in zip(xs[-1], gs[t], ss[t])]
        )
    return Trace(
        steps=list(pi),
        xs=xs,
        gs=gs,
        ss=ss,
        fs=fs,
        hs=hs,
        Fs=[fv + hv for fv, hv in zip(fs, hs)],
        x_star=[ZERO] * dim,
        s_star=s_star,
        f_star=f_star,
        h_star=h_star,
        F_star=f_star + h_star,
    )


def _dot(u, v):
    total = 0
    for a, b in zip(u, v):
        total = total + a * b
    return total


def evaluate_identity(bundle: CertificateBundle, trace) -> tuple[RadicalScalar, RadicalScalar]:
    """Evaluate both sides of the descent identity on one trace, exactly.

    The left side weights the trace's co-coercivities (evaluated by the
    solver module) with the bundle's multipliers; the right side combines
    the objective gap, the initial distance, and the sum of squares built
    from u and the slack matrix S.
    """
    from .solver import cocoercivity_f, cocoercivity_h

    n = bundle.n
    lhs = ZERO
    lam = bundle.lam
    for i in range(n + 1):
        row = lam.bar[i]
        for j in range(n + 1):
            v = row[j]
            if v and i != j:
                lhs = lhs + v * cocoercivity_f(trace, i, j)
    for j, v in enumerate(lam.star_row):
        if v:
            lhs = lhs + v * cocoercivity_f(trace, "*", j)
    mu = bundle.mu
    for i in range(n):
        row = mu.bar[i]
        for j in range(n):
            v = row[j]
            if v and i != j:
                lhs = lhs + v * cocoercivity_h(trace, i + 1, j + 1)
    for j, v in enumerate(mu.star_row):
        if v:
            lhs = lhs + v * cocoercivity_h(trace, "*", j + 1)

    gap_term = (rho_pow(bundle.k) * 2 - ONE) * (trace.F_star - trace.Fs[n])
    w = trace.xs[0]  # x_0 - x_* since the optimum is at the origin
    w_norm2 = _dot(w, w)

    uc = bundle.u_coeffs
    u_norm2 = ZERO
    for l in range(len(w)):
        acc = uc.init * w[l]
        for i in range(n + 1):
            acc = acc + uc.g[i] * trace.gs[i][l]
        for j in range(n):
            acc = acc + uc.s[j] * trace.ss[j][l]
        acc = acc + uc.s_star * trace.s_star[l]
        u_norm2 = u_norm2 + acc * acc

    # Tr(V S V^T) with V columns [x_0 - x_*, s_1, ..., s_n, s_*]
    cols = [w] + trace.ss + [trace.s_star]
    m = n + 2
    gram = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            gram[i][j] = gram[j][i] = _dot(cols[i], cols[j])
    trace_term = ZERO
    s_mat = bundle.slack.s
    for i in range(m):
        row = s_mat[i]
        for j in range(m):
            v = row[j]
            if v:
                trace_term = trace_term + v * gram[i][j]

    rhs = gap_term + RHO_OVER_2SQRT2 * w_norm2 - (u_norm2 + trace_term) / 2
    return lhs, rhs


def verify_descent_identity(
    k: int,
    trials: int = 20,
    dim: int = 4,
    seed: int = 0,
    tamper: str | None = None,
    bundle: CertificateBundle | None = None,
) -> IdentityReport:
    """Test the descent identity on random rational inputs, exactly.

    Every trial must give a residual of exactly zero; any nonzero residual
    is reported with the offending trial.  ``tamper`` perturbs one
    certificate entry first and is expected to make trials fail.
    """
    if trials < 1 or dim < 1:
        raise ValueError("trials and dim must be positive")
    if bundle is None:
        bundle = build_bundle(k)
    if tamper is not None:
        bundle = tamper_bundle(bundle, tamper)
    rng = random.Random(seed)
    failures = []
    first_residual = ""
    for t in range(trials):
        trace = sample_free_trace(bundle.pi, dim, rng)
        lhs, rhs = evaluate_identity(bundle, trace)
        if lhs != rhs:
            failures.append(t)
            if not first_residual:
                first_residual = (lhs - rhs).exact_str()
    return IdentityReport(
        k=k,
        trials=trials,
        dim=dim,
        failures=tuple(failures),
        first_residual=first_residual,
    )


# ---------------------------------------------------------------------------
# Rate constants
# ---------------------------------------------------------------------------


def rate_from_certificate(k: int) -> RadicalScalar:
    """Sharp per-unit rate constant rho / (sqrt2 (4 rho**k - 2)), exact.

    After n = 2**k - 1 steps, F(x_n) - F_* is at most this constant times
    M ||x_0 - x_*||^2.
    """
    if k < 1:
        raise ValueError(f"certificate order k must be >= 1, got {k}")
    return RHO / (SQRT2 * (rho_pow(k) * 4 - 2))


def display_rate(k: int) -> float:
    """Looser headline constant rho / (4 sqrt2 n**log2(rho)), as a float."""
    n = 2**k - 1
    rho = RHO.to_float()
    return rho / (4.0 * math.sqrt(2.0) * n ** math.log2(rho))
