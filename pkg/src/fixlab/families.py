"""Indexed families of self-maps f_n, g_n and bounded error sequences."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .banach import LpSpace, sample_ball
from .domains import Domain
from .operators import Constant, ConvexCombination, Identity, Operator, lerp
from .schedules import Schedule, ratio_limit

_BLOCK = 256


class DegenerateIndexError(ValueError):
    """Raised when a reduction would divide by a vanishing parameter sum."""

    def __init__(self, n, what):
        super().__init__(f"degenerate index n={n}: {what} = 0")
        self.n = n


class BoundedSequence:
    """Deterministic bounded sequence u_0, u_1, ... confined to a closed ball.

    ``radius == 0`` gives the constant sequence ``center``.  Draws are
    generated in seeded blocks so random access by index is cheap and
    reproducible.
    """

    def __init__(self, space: LpSpace, center, radius=0.0, seed=0):
        if radius < 0:
            raise ValueError("sequence radius must be nonnegative")
        self.space = space
        self.center = space.element(center)
        self.radius = float(radius)
        self.seed = int(seed)
        self._block = lru_cache(maxsize=64)(self._make_block)

    @property
    def bound(self) -> float:
        """Certified sup_n ||u_n||."""
        return self.space.norm(self.center) + self.radius

    @property
    def is_constant(self):
        return self.radius == 0.0

    def _make_block(self, k):
        rng = np.random.default_rng([self.seed, k])
        return sample_ball(self.space, rng, _BLOCK, self.radius, self.center)

    def __call__(self, n: int) -> np.ndarray:
        if self.radius == 0.0:
            return self.center
        return self._block(n // _BLOCK)[n % _BLOCK]

    def to_json(self):
        return {"center": self.center.tolist(), "radius": self.radius, "seed": self.seed}


class Family:
    kind = "family"

    def __init__(self, space):
        self.space = space

    def __call__(self, n: int, x):
        raise NotImplementedError

    def lipschitz_certificate(self) -> float | None:
        """Common Lipschitz bound over all n (None when no claim)."""
        return None

    def limit(self) -> Operator | None:
        """Uniform limit f of f_n, when the family names one."""
        return None

    def perturbation_constant(self) -> float | None:
        """M with beta_n ||g_n(x) - x|| <= delta_n (||x|| + M), when known."""
        return None

    def to_json(self) -> dict:
        raise NotImplementedError


class ConstantFamily(Family):
    kind = "constant_family"

    def __init__(self, f: Operator):
        super().__init__(f.space)
        self.f = f

    def __call__(self, n, x):
        return self.f(x)

    def lipschitz_certificate(self):
        return self.f.lipschitz

    def limit(self):
        return self.f

    def to_json(self):
        return {"kind": self.kind, "f": self.f.to_json()}


class DecayingPerturbation(Family):
    """f_n(x) = f(x) + rate(n) h(x), h with bounded range."""

    kind = "decaying_perturbation"

    def __init__(self, base: Operator, direction: Operator, rate: Schedule):
        super().__init__(base.space)
        if direction.range_bound() is None:
            raise ValueError("decaying_perturbation needs a direction with bounded range")
        self.base, self.direction, self.rate = base, direction, rate

    @property
    def direction_bound(self):
        return self.direction.range_bound()

    def __call__(self, n, x):
        return self.base(x) + self.rate(n) * self.direction(x)

    def lipschitz_certificate(self):
        if self.base.lipschitz is None or self.direction.lipschitz is None:
            return None
        return self.base.lipschitz + self.rate.sup() * self.direction.lipschitz

    def limit(self):
        return self.base

    def to_json(self):
        return {
            "kind": self.kind,
            "base": self.base.to_json(),
            "direction": self.direction.to_json(),
            "rate": self.rate.to_json(),
        }


class ErrorsFamily(Family):
    """f_n(x) = (alpha_n u + gamma_n u_n) / (alpha_n + gamma_n), constant in x.

    Evaluated as u + s_n (u_n - u) with s_n = gamma_n / (alpha_n + gamma_n).
    """

    kind = "errors_family"

    def __init__(self, u, u_seq: BoundedSequence, alpha: Schedule, gamma: Schedule):
        super().__init__(u_seq.space)
        self.u = u_seq.space.element(u)
        self.u_seq, self.alpha, self.gamma = u_seq, alpha, gamma

    def weight(self, n):
        a, g = self.alpha(n), self.gamma(n)
        if a + g == 0.0:
            raise DegenerateIndexError(n, "alpha_n + gamma_n")
        return g / (a + g)

    def __call__(self, n, x):
        v = lerp(self.u, self.u_seq(n), self.weight(n))
        x = np.asarray(x)
        return v if x.ndim == 1 else np.broadcast_to(v, x.shape).copy()

    def lipschitz_certificate(self):
        return 0.0

    def limit(self):
        return Constant(self.space, self.u)

    def to_json(self):
        return {"kind": self.kind, "u": self.u.tolist(), "u_seq": self.u_seq.to_json()}


class ErrorsStateFamily(Family):
    """g_n(x) = (beta_n x + delta_n v_n) / (beta_n + delta_n).

    Evaluated as x + s_n (v_n - x) with s_n = delta_n / (beta_n + delta_n).
    """

    kind = "errors_state_family"

    def __init__(self, v_seq: BoundedSequence, beta: Schedule, delta: Schedule):
        super().__init__(v_seq.space)
        self.v_seq, self.beta, self.delta = v_seq, beta, delta

    def weight(self, n):
        b, d = self.beta(n), self.delta(n)
        if b + d == 0.0:
            raise DegenerateIndexError(n, "beta_n + delta_n")
        return d / (b + d)

    def __call__(self, n, x):
        return lerp(np.asarray(x, dtype=float), self.v_seq(n), self.weight(n))

    def lipschitz_certificate(self, horizon=10_000):
        """sup_n beta_n / (beta_n + delta_n): prefix maximum joined with the limit."""
        n = np.arange(horizon, dtype=float)
        b, d = self.beta.values(n), self.delta.values(n)
        tot = b + d
        if np.any(tot == 0):
            return 1.0
        lim = ratio_limit(self.beta, self.delta)
        return float(max(np.max(b / tot), 0.0 if np.isnan(lim) else lim))

    def limit(self):
        if not self.v_seq.is_constant:
            return None
        s = ratio_limit(self.delta, self.beta)
        if np.isnan(s):
            return None
        return ConvexCombination(s, Constant(self.space, self.v_seq.center), Identity(self.space))

    def perturbation_constant(self):
        return self.v_seq.bound if self.v_seq.bound > 0 else 1.0

    def to_json(self):
        return {"kind": self.kind, "v_seq": self.v_seq.to_json()}


class IdentityFamily(Family):
    kind = "identity_family"

    def __call__(self, n, x):
        return np.asarray(x, dtype=float)

    def lipschitz_certificate(self):
        return 1.0

    def limit(self):
        return Identity(self.space)

    def perturbation_constant(self):
        return 1.0

    def to_json(self):
        return {"kind": self.kind}


def family_eval(fam: Family, n: int, x):
    if n < 0:
        raise ValueError("family index must be >= 0")
    return fam(n, x)


FAMILY_KINDS = {
    "constant_family": "f_n = f for every n",
    "decaying_perturbation": "f_n(x) = f(x) + rate(n) h(x), h bounded",
    "errors_family": "f_n(x) = (alpha_n u + gamma_n u_n)/(alpha_n + gamma_n)",
    "errors_state_family": "g_n(x) = (beta_n x + delta_n v_n)/(beta_n + delta_n)",
    "identity_family": "f_n(x) = x",
}


# -- sampled checks ---------------------------------------------------------


def check_uniform_convergence(fam: Family, limit: Operator, domain: Domain, sample_n, samples=1000, seed=0):
    """Sampled sup_x ||f_n(x) - f(x)|| for each n in ``sample_n``."""
    sample_n = list(sample_n)
    if not sample_n:
        raise ValueError("sample_n must be nonempty")
    rng = np.random.default_rng(seed)
    x = domain.sample(rng, samples)
    fx = limit(x)
    return [float(np.max(domain.space.norm(fam(n, x) - fx))) for n in sample_n]


def is_nonincreasing(values, slack=1e-12) -> bool:
    return all(b <= a + slack for a, b in zip(values, values[1:]))


@dataclass
class PerturbationReport:
    """Margins delta_n (||x|| + M) - beta_n ||g_n(x) - x|| over sampled n, x."""

    min_margin: float
    per_n: dict = field(default_factory=dict)
    samples: int = 0
    seed: int = 0

    @property
    def passed(self):
        return self.min_margin >= -1e-12


def check_perturbation_bound(g: Family, beta: Schedule, delta: Schedule, M: float, domain: Domain,
                             sample_n, samples=1000, seed=0, points=None) -> PerturbationReport:
    if not M > 0:
        raise ValueError("M must be positive")
    rng = np.random.default_rng(seed)
    x = domain.sample(rng, samples)
    if points is not None:
        x = np.vstack([x, np.asarray(points, dtype=float)])
    sp = domain.space
    nx = sp.norm(x)
    per_n = {}
    for n in sample_n:
        lhs = beta(n) * sp.norm(g(n, x) - x)
        per_n[int(n)] = float(np.min(delta(n) * (nx + M) - lhs))
    return PerturbationReport(min(per_n.values()), per_n, samples, seed)
