"""Closed-form scalar sequences for the step parameters.

Only families whose tail behavior is known in closed form are admitted:
series convergence is never decided numerically.  Every family here is
nonnegative and nonincreasing in n, so its supremum is the value at n = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PredicateReport:
    tends_to_zero: bool
    sum_diverges: bool
    sum_converges: bool
    indeterminate: bool = False

    def as_dict(self):
        return {
            "tends_to_zero": self.tends_to_zero,
            "sum_diverges": self.sum_diverges,
            "sum_converges": self.sum_converges,
            "indeterminate": self.indeterminate,
        }


# Tail order used for ratio limits.  Smaller key decays slower:
# (0, rho) for c/n^rho, (1, -log r) for geometric, (2,) for zero.
def _power_order(rho):
    return (0, float(rho))


def _geom_order(r):
    return (1, -math.log(r))


_ZERO_ORDER = (2,)


@dataclass(frozen=True)
class Tail:
    """Asymptotic form coefficient * rate(n) of a schedule."""

    order: tuple
    coeff: float

    @property
    def is_zero(self):
        return self.order == _ZERO_ORDER or self.coeff == 0.0


class Schedule:
    family = "schedule"
    clamp: tuple | None = None

    def raw(self, n):
        raise NotImplementedError

    def __call__(self, n) -> float:
        if isinstance(n, (int, np.integer)):
            v = self._scalar(int(n))
            if self.clamp is not None:
                v = min(max(v, self.clamp[0]), self.clamp[1])
            return v
        return float(self.values(n)) if np.ndim(n) == 0 else self.values(n)

    def _scalar(self, n: int) -> float:
        return float(self.raw(np.asarray(float(n))))

    def values(self, n):
        v = self.raw(np.asarray(n, dtype=float))
        if self.clamp is not None:
            v = np.clip(v, self.clamp[0], self.clamp[1])
        return v

    def sup(self) -> float:
        return float(self(0))

    def _raw_tail(self) -> Tail:
        raise NotImplementedError

    def tail(self) -> Tail:
        t = self._raw_tail()
        if self.clamp is None:
            return t
        lo, hi = self.clamp
        limit = 0.0 if t.order != (0, 0.0) else t.coeff
        if t.is_zero:
            limit = 0.0
        if limit < lo:
            return Tail(_power_order(0.0), lo)
        if limit > hi:
            return Tail(_power_order(0.0), hi) if hi > 0 else Tail(_ZERO_ORDER, 0.0)
        return t

    def predicates(self) -> PredicateReport:
        return predicate_report(self)

    def _check_range(self):
        if self.clamp is not None:
            lo, hi = self.clamp
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"clamp range {self.clamp!r} must lie inside [0, 1]")
            object.__setattr__(self, "clamp", (float(lo), float(hi)))
            return
        top = float(self.raw(np.asarray(0.0)))
        if not 0.0 <= top <= 1.0:
            raise ValueError(
                f"{self.family} schedule takes value {top!r} outside [0, 1] at n=0; "
                "add a clamp range or rescale"
            )

    def to_json(self) -> dict:
        d = self._params()
        if self.clamp is not None:
            d["clamp"] = list(self.clamp)
        return d


@dataclass(frozen=True)
class Power(Schedule):
    """c / (n + offset)^rho."""

    c: float = 1.0
    rho: float = 1.0
    offset: int = 1
    clamp: tuple | None = None
    family = "power"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("power schedule needs c > 0")
        if not self.rho >= 0:
            raise ValueError("power schedule needs rho >= 0")
        if int(self.offset) != self.offset or self.offset < 1:
            raise ValueError("power schedule needs an integer offset >= 1")
        self._check_range()

    def raw(self, n):
        return self.c / (n + self.offset) ** self.rho

    def _scalar(self, n):
        return self.c / float(n + self.offset) ** self.rho

    def _raw_tail(self):
        return Tail(_power_order(self.rho), self.c)

    def _params(self):
        return {"family": "power", "c": self.c, "rho": self.rho, "offset": self.offset}


@dataclass(frozen=True)
class Constant(Schedule):
    c: float = 0.0
    clamp: tuple | None = None
    family = "constant"

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError("constant schedule needs c >= 0")
        self._check_range()

    def raw(self, n):
        return np.full(np.shape(n), float(self.c)) if np.ndim(n) else np.float64(self.c)

    def _scalar(self, n):
        return float(self.c)

    def _raw_tail(self):
        if self.c == 0:
            return Tail(_ZERO_ORDER, 0.0)
        return Tail(_power_order(0.0), self.c)

    def _params(self):
        return {"family": "constant", "c": self.c}


@dataclass(frozen=True)
class Geometric(Schedule):
    """c * r^n."""

    c: float = 1.0
    r: float = 0.5
    clamp: tuple | None = None
    family = "geometric"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("geometric schedule needs c > 0")
        if not 0 < self.r < 1:
            raise ValueError("geometric schedule needs 0 < r < 1")
        self._check_range()

    def raw(self, n):
        return self.c * self.r**n

    def _scalar(self, n):
        return self.c * self.r ** float(n)

    def _raw_tail(self):
        return Tail(_geom_order(self.r), self.c)

    def _params(self):
        return {"family": "geometric", "c": self.c, "r": self.r}


@dataclass(frozen=True)
class Zero(Schedule):
    clamp: tuple | None = None
    family = "zero"

    def raw(self, n):
        return np.zeros(np.shape(n)) if np.ndim(n) else np.float64(0.0)

    def _scalar(self, n):
        return 0.0

    def _raw_tail(self):
        return Tail(_ZERO_ORDER, 0.0)

    def _params(self):
        return {"family": "zero"}


@dataclass(frozen=True)
class Sum(Schedule):
    """Pointwise sum of two schedules; used for the composite step sizes
    (alpha + gamma and friends) of the reductions.  Not range-checked at
    construction: callers validate ``sup() <= 1``."""

    a: Schedule = None
    b: Schedule = None
    family = "sum"

    def values(self, n):
        return self.a.values(n) + self.b.values(n)

    def raw(self, n):
        return self.values(n)

    def __call__(self, n):
        if isinstance(n, (int, np.integer)):
            return self.a(n) + self.b(n)
        return self.values(n)

    def _raw_tail(self):
        ta, tb = self.a.tail(), self.b.tail()
        if ta.is_zero:
            return tb
        if tb.is_zero:
            return ta
        if ta.order == tb.order:
            return Tail(ta.order, ta.coeff + tb.coeff)
        return ta if ta.order < tb.order else tb

    def _params(self):
        return {"family": "sum", "a": self.a.to_json(), "b": self.b.to_json()}


def eval_schedule(s: Schedule, n):
    return s(n)


def predicate_report(s: Schedule) -> PredicateReport:
    """Tail predicates decided from the family parameters."""
    t = s.tail()
    if t.is_zero:
        return PredicateReport(True, False, True)
    kind = t.order[0]
    if kind == 1:  # geometric
        return PredicateReport(True, False, True)
    rho = t.order[1]
    return PredicateReport(rho > 0, rho <= 1, rho > 1)


def ratio_tends_to_zero(num: Schedule, other: Schedule) -> bool:
    """Whether num_n / (other_n + num_n) -> 0."""
    tn, to = num.tail(), other.tail()
    if tn.is_zero:
        return not to.is_zero
    if to.is_zero:
        return False
    return tn.order > to.order


def ratio_limit(num: Schedule, other: Schedule) -> float:
    """lim num_n / (num_n + other_n) for the admitted families."""
    tn, to = num.tail(), other.tail()
    if tn.is_zero and to.is_zero:
        return float("nan")
    if tn.is_zero:
        return 0.0
    if to.is_zero:
        return 1.0
    if tn.order == to.order:
        return tn.coeff / (tn.coeff + to.coeff)
    return 0.0 if tn.order > to.order else 1.0


def from_json(d: dict) -> Schedule:
    d = dict(d)
    fam = d.pop("family")
    clamp = d.pop("clamp", None)
    if clamp is not None:
        clamp = tuple(clamp)
    if fam == "power":
        return Power(float(d.get("c", 1.0)), float(d.get("rho", 1.0)), int(d.get("offset", 1)), clamp)
    if fam == "constant":
        return Constant(float(d["c"]), clamp)
    if fam == "geometric":
        return Geometric(float(d["c"]), float(d["r"]), clamp)
    if fam == "zero":
        return Zero(clamp)
    raise ValueError(f"unknown schedule family {fam!r}")


SCHEDULE_FAMILIES = {
    "power": "c / (n + offset)^rho",
    "constant": "c",
    "geometric": "c * r^n",
    "zero": "0",
}
