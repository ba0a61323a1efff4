"""Catalog of self-maps: nonexpansive mappings and contractions.

Every operator carries the space it acts on and a claimed Lipschitz bound.
A claim is only made where it is analytically justified; ``None`` means
"no claim", which validators treat as unverified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .banach import LpSpace, sample_ball
from .domains import Domain

FIXED_TOL = 1e-12


def lerp(a, b, s):
    """a + s (b - a), exact at s = 0 and s = 1."""
    if s == 0.0:
        return a
    if s == 1.0:
        return b
    return a + s * (b - a)


class Operator:
    kind = "operator"
    lipschitz: float | None = None

    def __init__(self, space: LpSpace):
        self.space = space

    def __call__(self, x):
        raise NotImplementedError

    def fixed_set(self) -> "FixedSet":
        return FixedSet.unknown(self.space)

    def range_bound(self) -> float | None:
        """sup ||T(x)|| over the whole space, when finite and known."""
        return None

    @property
    def claims_nonexpansive(self) -> bool:
        return self.lipschitz is not None and self.lipschitz <= 1.0

    @property
    def claims_contraction(self) -> bool:
        return self.lipschitz is not None and self.lipschitz < 1.0

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_json()})"


def _exact_trig(theta):
    k = 2.0 * theta / math.pi
    if abs(k - round(k)) < 1e-12:
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(round(k)) % 4]
    return math.cos(theta), math.sin(theta)


class Rotation2D(Operator):
    """Rotation by ``theta`` about ``center`` in the coordinate plane ``plane``.

    Other coordinates are left untouched.  Only an isometry for p = 2, so
    the nonexpansive claim is made only there.
    """

    kind = "rotation2d"

    def __init__(self, space, theta, center=None, plane=(0, 1)):
        super().__init__(space)
        if space.dim < 2:
            raise ValueError("rotation2d needs dim >= 2")
        i, j = (int(k) for k in plane)
        if i == j or not (0 <= i < space.dim and 0 <= j < space.dim):
            raise ValueError(f"invalid rotation plane {plane!r}")
        self.theta = float(theta)
        self.center = space.zero() if center is None else space.element(center)
        self.plane = (i, j)
        self._cs = _exact_trig(self.theta)
        self.lipschitz = 1.0 if space.p == 2.0 else None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i, j = self.plane
        c, s = self._cs
        di = x[..., i] - self.center[i]
        dj = x[..., j] - self.center[j]
        out = x.copy()
        out[..., i] = self.center[i] + (c * di - s * dj)
        out[..., j] = self.center[j] + (s * di + c * dj)
        return out

    def fixed_set(self):
        c, s = self._cs
        if c == 1.0 and s == 0.0:
            return FixedSet.whole(self.space)
        i, j = self.plane
        others = [k for k in range(self.space.dim) if k not in (i, j)]
        if not others:
            return FixedSet.point(self.center)
        basis = np.eye(self.space.dim)[others]
        return FixedSet.subspace(self.center, basis)

    def to_json(self):
        return {"kind": self.kind, "theta": self.theta, "center": self.center.tolist(), "plane": list(self.plane)}


class BoxClamp(Operator):
    """Componentwise clamp onto [lo, hi]; 1-Lipschitz in every l_p."""

    kind = "box_clamp"

    def __init__(self, space, lo, hi):
        super().__init__(space)
        self.lo = space.element(lo)
        self.hi = space.element(hi)
        if np.any(self.lo > self.hi):
            raise ValueError("box_clamp needs lo <= hi")
        self.lipschitz = 1.0

    def __call__(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def fixed_set(self):
        return FixedSet.box(self.lo, self.hi)

    def range_bound(self):
        return self.space.norm(np.maximum(np.abs(self.lo), np.abs(self.hi)))

    def to_json(self):
        return {"kind": self.kind, "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class SegmentProjection(Operator):
    """Euclidean orthogonal projection onto the segment [a, b].

    Nonexpansive (metric projection onto a closed convex set) only for p = 2.
    """

    kind = "segment_projection"

    def __init__(self, space, a, b):
        super().__init__(space)
        self.a = space.element(a)
        self.b = space.element(b)
        self._dir = self.b - self.a
        self._len2 = float(self._dir @ self._dir)
        self.lipschitz = 1.0 if space.p == 2.0 else None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self._len2 == 0.0:
            return np.broadcast_to(self.a, x.shape).copy()
        s = np.clip(((x - self.a) @ self._dir) / self._len2, 0.0, 1.0)
        return self.a + np.expand_dims(s, -1) * self._dir

    def fixed_set(self):
        return FixedSet.segment(self.a, self.b)

    def range_bound(self):
        return max(self.space.norm(self.a), self.space.norm(self.b))

    def to_json(self):
        return {"kind": self.kind, "a": self.a.tolist(), "b": self.b.tolist()}


class Affine(Operator):
    """x -> M x + b with a caller-supplied operator-norm certificate."""

    kind = "affine"

    def __init__(self, space, matrix, offset=None, lipschitz=None):
        super().__init__(space)
        m = np.array(matrix, dtype=float)
        if m.ndim == 0:
            m = m * np.eye(space.dim)
        if m.shape != (space.dim, space.dim) or not np.all(np.isfinite(m)):
            raise ValueError(f"affine matrix must be finite {space.dim}x{space.dim}")
        self.matrix = m
        self.offset = space.zero() if offset is None else space.element(offset)
        self.lipschitz = None if lipschitz is None else float(lipschitz)
        if self.lipschitz is not None and self.lipschitz < 0:
            raise ValueError("lipschitz certificate must be nonnegative")

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T + self.offset

    def operator_norm_estimate(self, samples=2000, seed=0) -> float:
        """Cross-check of the certificate: power iteration for p = 2, sampling otherwise."""
        if self.space.p == 2.0:
            return _spectral_norm(self.matrix)
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((samples, self.space.dim))
        g = np.vstack([g, np.eye(self.space.dim)])
        return float(np.max(self.space.norm(g @ self.matrix.T) / self.space.norm(g)))

    @property
    def certificate_consistent(self) -> bool:
        if self.lipschitz is None:
            return False
        return self.operator_norm_estimate() <= self.lipschitz * (1 + 1e-9) + 1e-12

    def fixed_set(self):
        a = np.eye(self.space.dim) - self.matrix
        try:
            if np.linalg.cond(a) > 1e12:
                return FixedSet.unknown(self.space)
            z = np.linalg.solve(a, self.offset)
        except np.linalg.LinAlgError:
            return FixedSet.unknown(self.space)
        return FixedSet.point(z).verified(self)

    def range_bound(self):
        if not np.any(self.matrix):
            return self.space.norm(self.offset)
        return None

    def to_json(self):
        return {
            "kind": self.kind,
            "matrix": self.matrix.tolist(),
            "offset": self.offset.tolist(),
            "lipschitz": self.lipschitz,
        }


def _spectral_norm(m, iters=500, tol=1e-14):
    a = m.T @ m
    v = np.ones(a.shape[0]) / math.sqrt(a.shape[0])
    v = v + 1e-3 * np.arange(a.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = a @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(v @ (a @ v))
        if abs(new - lam) <= tol * max(1.0, new):
            lam = new
            break
        lam = new
    return math.sqrt(max(lam, 0.0))


class ConvexCombination(Operator):
    """weight * op1 + (1 - weight) * op2."""

    kind = "convex_combination"

    def __init__(self, weight, op1: Operator, op2: Operator):
        if op1.space != op2.space:
            raise ValueError("convex_combination operands live in different spaces")
        super().__init__(op1.space)
        if not 0.0 <= weight <= 1.0:
            raise ValueError("convex_combination weight must lie in [0, 1]")
        self.weight = float(weight)
        self.op1, self.op2 = op1, op2
        if op1.lipschitz is not None and op2.lipschitz is not None:
            self.lipschitz = self.weight * op1.lipschitz + (1 - self.weight) * op2.lipschitz

    def __call__(self, x):
        return lerp(self.op2(x), self.op1(x), self.weight)

    def fixed_set(self):
        return self.op1.fixed_set().intersect(self.op2.fixed_set()).verified(self)

    def range_bound(self):
        b1, b2 = self.op1.range_bound(), self.op2.range_bound()
        if b1 is None or b2 is None:
            return None
        return self.weight * b1 + (1 - self.weight) * b2

    def to_json(self):
        return {"kind": self.kind, "weight": self.weight, "op1": self.op1.to_json(), "op2": self.op2.to_json()}


class Composition(Operator):
    """op1 after op2: x -> op1(op2(x))."""

    kind = "composition"

    def __init__(self, op1: Operator, op2: Operator):
        if op1.space != op2.space:
            raise ValueError("composition operands live in different spaces")
        super().__init__(op1.space)
        self.op1, self.op2 = op1, op2
        if op1.lipschitz is not None and op2.lipschitz is not None:
            self.lipschitz = op1.lipschitz * op2.lipschitz

    def __call__(self, x):
        return self.op1(self.op2(x))

    def fixed_set(self):
        return self.op1.fixed_set().intersect(self.op2.fixed_set()).verified(self)

    def range_bound(self):
        return self.op1.range_bound()

    def to_json(self):
        return {"kind": self.kind, "op1": self.op1.to_json(), "op2": self.op2.to_json()}


class Constant(Operator):
    kind = "constant"

    def __init__(self, space, u):
        super().__init__(space)
        self.u = space.element(u)
        self.lipschitz = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.u
        return np.broadcast_to(self.u, x.shape).copy()

    def fixed_set(self):
        return FixedSet.point(self.u)

    def range_bound(self):
        return self.space.norm(self.u)

    def to_json(self):
        return {"kind": self.kind, "u": self.u.tolist()}


class Identity(Operator):
    kind = "identity"

    def __init__(self, space):
        super().__init__(space)
        self.lipschitz = 1.0

    def __call__(self, x):
        return np.asarray(x, dtype=float)

    def fixed_set(self):
        return FixedSet.whole(self.space)

    def to_json(self):
        return {"kind": self.kind}


# -- fixed-point sets -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FixedSet:
    """Known fixed points of an operator.

    ``point``, ``segment``, ``box`` and ``subspace`` (affine: origin + span of
    basis rows) descriptors are produced only when every element is a fixed
    point; ``unknown`` makes no statement.
    """

    kind: str
    dim: int
    data: tuple = ()

    @classmethod
    def unknown(cls, space):
        return cls("unknown", space.dim)

    @classmethod
    def point(cls, p):
        p = np.asarray(p, dtype=float)
        return cls("point", p.size, (p,))

    @classmethod
    def segment(cls, a, b):
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        return cls("segment", a.size, (a, b))

    @classmethod
    def box(cls, lo, hi):
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        return cls("box", lo.size, (lo, hi))

    @classmethod
    def subspace(cls, origin, basis):
        origin = np.asarray(origin, dtype=float)
        return cls("subspace", origin.size, (origin, np.atleast_2d(np.asarray(basis, dtype=float))))

    @classmethod
    def whole(cls, space):
        return cls.subspace(space.zero(), np.eye(space.dim))

    @property
    def known(self) -> bool:
        return self.kind != "unknown"

    def contains(self, x, tol=1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        if self.kind == "point":
            return bool(np.max(np.abs(x - self.data[0])) <= tol)
        if self.kind == "segment":
            a, b = self.data
            d = b - a
            l2 = float(d @ d)
            s = 0.0 if l2 == 0 else min(1.0, max(0.0, float((x - a) @ d) / l2))
            return bool(np.max(np.abs(a + s * d - x)) <= tol)
        if self.kind == "box":
            lo, hi = self.data
            return bool(np.all(x >= lo - tol) and np.all(x <= hi + tol))
        if self.kind == "subspace":
            origin, basis = self.data
            coef, *_ = np.linalg.lstsq(basis.T, x - origin, rcond=None)
            return bool(np.max(np.abs(origin + basis.T @ coef - x)) <= tol)
        return False

    def intersect(self, other: "FixedSet") -> "FixedSet":
        """A descriptor contained in both sets (``unknown`` when not derivable)."""
        a, b = self, other
        if not (a.known and b.known):
            return FixedSet("unknown", a.dim)
        for s, t in ((a, b), (b, a)):
            if s.kind == "subspace" and s.data[1].shape[0] == s.dim:
                return t
        for s, t in ((a, b), (b, a)):
            if s.kind == "point":
                return s if t.contains(s.data[0]) else FixedSet("unknown", a.dim)
        for s, t in ((a, b), (b, a)):
            if s.kind == "segment" and t.kind in ("box", "segment", "subspace"):
                if t.contains(s.data[0]) and t.contains(s.data[1]):
                    return s
        if a.kind == "box" and b.kind == "box":
            lo = np.maximum(a.data[0], b.data[0])
            hi = np.minimum(a.data[1], b.data[1])
            if np.all(lo <= hi):
                return FixedSet.box(lo, hi)
        return FixedSet("unknown", a.dim)

    def grid(self, n: int = 101) -> np.ndarray:
        """Finite sample of the set (endpoints and corners included)."""
        if self.kind == "point":
            return self.data[0][None, :]
        if self.kind == "segment":
            a, b = self.data
            s = np.linspace(0.0, 1.0, n)
            return a + s[:, None] * (b - a)
        if self.kind == "box":
            lo, hi = self.data
            per = max(2, int(math.floor(n ** (1.0 / self.dim))))
            axes = [np.linspace(l, h, per) for l, h in zip(lo, hi)]
            mesh = np.meshgrid(*axes, indexing="ij")
            return np.stack([m.ravel() for m in mesh], axis=-1)
        if self.kind == "subspace":
            origin, basis = self.data
            k = basis.shape[0]
            per = max(2, int(math.floor(n ** (1.0 / k))))
            axes = [np.linspace(-1.0, 1.0, per)] * k
            mesh = np.meshgrid(*axes, indexing="ij")
            coef = np.stack([m.ravel() for m in mesh], axis=-1)
            return origin + coef @ basis
        return np.empty((0, self.dim))

    def verified(self, op: Operator, n: int = 101, tol: float = FIXED_TOL) -> "FixedSet":
        """Self if every grid element is fixed by ``op`` to ``tol``, else unknown."""
        if not self.known:
            return self
        pts = self.grid(n)
        res = op.space.norm(op(pts) - pts)
        if np.all(res <= tol):
            return self
        return FixedSet("unknown", self.dim)

    def to_json(self):
        keys = {
            "point": ("p",),
            "segment": ("a", "b"),
            "box": ("lo", "hi"),
            "subspace": ("origin", "basis"),
            "unknown": (),
        }[self.kind]
        out = {"kind": self.kind}
        out.update({k: np.asarray(v).tolist() for k, v in zip(keys, self.data)})
        return out


def fixed_set(op: Operator) -> FixedSet:
    return op.fixed_set()


# -- sampled Lipschitz checks ----------------------------------------------


@dataclass(frozen=True)
class LipschitzCheck:
    """Largest sampled ratio ||T x - T y|| / ||x - y||.

    A falsifier, not a proof: a small ratio only means no violation was
    found for this seed and sample size.
    """

    ratio: float
    samples: int
    seed: int
    worst_pair: tuple | None = None

    def __float__(self):
        return self.ratio

    @property
    def is_nonexpansive(self) -> bool:
        return self.ratio <= 1.0 + 1e-9

    @property
    def is_contraction(self) -> bool:
        return self.ratio < 1.0 - 1e-12


def sample_pairs(domain: Domain, samples: int, seed: int):
    """Seeded pairs in the domain: half far apart, half nearly coincident."""
    rng = np.random.default_rng(seed)
    x = domain.sample(rng, samples)
    y = domain.sample(rng, samples)
    k = samples // 2
    # convex combination keeps the close pairs inside the domain
    y[:k] = x[:k] + 1e-3 * (y[:k] - x[:k])
    return x, y


def lipschitz_ratio(op, domain: Domain, samples: int, seed: int, pairs=None) -> LipschitzCheck:
    if samples < 2:
        raise ValueError("need at least 2 samples")
    x, y = sample_pairs(domain, samples, seed)
    if pairs is not None:
        px = np.array([p[0] for p in pairs], dtype=float)
        py = np.array([p[1] for p in pairs], dtype=float)
        x, y = np.vstack([x, px]), np.vstack([y, py])
    sp = domain.space
    den = sp.norm(x - y)
    ok = den > 0
    if not np.any(ok):
        return LipschitzCheck(0.0, samples, seed)
    ratio = sp.norm(op(x[ok]) - op(y[ok])) / den[ok]
    k = int(np.argmax(ratio))
    return LipschitzCheck(float(ratio[k]), samples, seed, (x[ok][k], y[ok][k]))


def check_nonexpansive(op, domain, samples=10_000, seed=0, pairs=None) -> LipschitzCheck:
    """Sampled Lipschitz ratio; optional ``pairs`` are appended adversarial pairs."""
    return lipschitz_ratio(op, domain, samples, seed, pairs)


def check_contraction(op, domain, samples=10_000, seed=0, pairs=None) -> LipschitzCheck:
    return lipschitz_ratio(op, domain, samples, seed, pairs)


def check_self_map(op, domain: Domain, samples=2000, seed=0, tol=1e-12) -> bool:
    """Sampled check that ``op`` maps the domain into itself."""
    rng = np.random.default_rng(seed)
    x = domain.sample(rng, samples)
    return bool(np.all(domain.contains(op(x), tol)))


OPERATOR_KINDS = {
    "rotation2d": "rotation by theta about a center in one coordinate plane (nonexpansive only for p=2)",
    "box_clamp": "componentwise clamp onto a box (nonexpansive in every l_p)",
    "segment_projection": "Euclidean projection onto a segment (nonexpansive for p=2)",
    "affine": "x -> M x + b with a supplied operator-norm certificate",
    "convex_combination": "w*op1 + (1-w)*op2",
    "composition": "op1(op2(x))",
    "constant": "x -> u (contraction with constant 0)",
    "identity": "x -> x",
}
