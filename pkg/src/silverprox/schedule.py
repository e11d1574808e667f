"""The silver stepsize schedule and its companion sequence.

Stepsizes are unit-normalized (smoothness constant 1); the solver rescales
by 1/M at the oracle boundary.  The closed form is

    alpha_t = rho**(nu(t+1) - 1) + 1,

where nu is the 2-adic valuation, and the block of the first 2**k - 1
entries doubles by inserting one long middle step:

    pi(k+1) = [pi(k), rho**(k-1) + 1, pi(k)].

The companion sequence c(k) weights the nonsmooth subgradients inside the
rate certificate.  It starts from c(1) = [2(rho-1)] and doubles as

    c(k+1) = [pi(k), (1 + rho**-k)(rho**(k-1) + 1),
              rho*c(k) - (rho - 1 - rho**-k)*pi(k)],

which keeps sum(pi(k)) = rho**k - 1, sum(c(k)) = 2(rho**k - 1), and
c(k) >= pi(k) entrywise -- all exactly, and all checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactnum import ONE, RHO, SQRT2, RadicalScalar, rho_pow


def two_adic_valuation(i: int) -> int:
    """Largest j such that 2**j divides i, for i >= 1."""
    if i <= 0:
        raise ValueError(f"2-adic valuation needs a positive integer, got {i}")
    return (i & -i).bit_length() - 1


def silver_step(t: int) -> RadicalScalar:
    """Closed-form stepsize alpha_t for t >= 0."""
    if t < 0:
        raise ValueError(f"stepsize index must be nonnegative, got {t}")
    return rho_pow(two_adic_valuation(t + 1) - 1) + ONE


def _require_order(k: int) -> None:
    if k < 1:
        raise ValueError(f"schedule order k must be >= 1, got {k}")


def silver_schedule(k: int) -> list[RadicalScalar]:
    """First 2**k - 1 stepsizes, built by the doubling recursion."""
    _require_order(k)
    pi = [SQRT2]
    for j in range(1, k):
        pi = pi + [rho_pow(j - 1) + ONE] + pi
    return pi


def c_sequence(k: int) -> list[RadicalScalar]:
    """Companion sequence c(k) of length 2**k - 1."""
    _require_order(k)
    pi = [SQRT2]
    c = [SQRT2 * 2]
    for j in range(1, k):
        mid = (ONE + rho_pow(-j)) * (rho_pow(j - 1) + ONE)
        drag = RHO - ONE - rho_pow(-j)
        c = pi + [mid] + [RHO * cj - drag * pj for cj, pj in zip(c, pi)]
        pi = pi + [rho_pow(j - 1) + ONE] + pi
    return c


@dataclass(frozen=True)
class StepSchedule:
    """Silver stepsizes pi and companion weights c for horizon n = 2**k - 1."""

    k: int
    n: int
    pi: tuple[RadicalScalar, ...]
    c: tuple[RadicalScalar, ...]

    @classmethod
    def build(cls, k: int) -> "StepSchedule":
        _require_order(k)
        return cls(
            k=k,
            n=2**k - 1,
            pi=tuple(silver_schedule(k)),
            c=tuple(c_sequence(k)),
        )

    def pi_floats(self) -> list[float]:
        return [v.to_float() for v in self.pi]

    def c_floats(self) -> list[float]:
        return [v.to_float() for v in self.c]
