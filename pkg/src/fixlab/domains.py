"""Closed convex domains: boxes, l_p balls and the whole space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .banach import LpSpace, sample_ball

# radius used to sample the unbounded whole space
WHOLE_SPACE_SAMPLE_RADIUS = 10.0


@dataclass(frozen=True, eq=False)
class Domain:
    space: LpSpace
    kind: str = "whole_space"
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None
    sample_radius: float = field(default=WHOLE_SPACE_SAMPLE_RADIUS)

    def __post_init__(self):
        sp = self.space
        if self.kind == "box":
            lo, hi = sp.element(self.lo), sp.element(self.hi)
            if np.any(lo > hi):
                raise ValueError("box domain needs lo <= hi componentwise")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "ball":
            object.__setattr__(self, "center", sp.element(self.center))
            if not self.radius > 0:
                raise ValueError("ball domain needs radius > 0")
            object.__setattr__(self, "radius", float(self.radius))
        elif self.kind != "whole_space":
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def box(cls, space, lo, hi):
        return cls(space, "box", lo=lo, hi=hi)

    @classmethod
    def ball(cls, space, center, radius):
        return cls(space, "ball", center=center, radius=radius)

    @classmethod
    def whole(cls, space, sample_radius=WHOLE_SPACE_SAMPLE_RADIUS):
        return cls(space, "whole_space", sample_radius=sample_radius)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        if self.kind == "box":
            return np.all((x >= self.lo - tol) & (x <= self.hi + tol), axis=-1)
        if self.kind == "ball":
            return self.space.norm(x - self.center) <= self.radius + tol
        return np.all(np.isfinite(x), axis=-1)

    def contains_ball(self, center, radius, tol=1e-12):
        """Whether the closed l_p ball B(center, radius) lies in the domain."""
        center = np.asarray(center, dtype=float)
        if self.kind == "box":
            # the l_p ball sits inside the sup-norm ball of the same radius
            return bool(np.all(center - radius >= self.lo - tol) and np.all(center + radius <= self.hi + tol))
        if self.kind == "ball":
            return bool(self.space.norm(center - self.center) + radius <= self.radius + tol)
        return True

    def diameter(self) -> float:
        if self.kind == "box":
            return self.space.norm(self.hi - self.lo)
        if self.kind == "ball":
            return 2.0 * self.radius
        return 2.0 * self.sample_radius

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "box":
            return self.lo + rng.random((n, self.space.dim)) * (self.hi - self.lo)
        if self.kind == "ball":
            return sample_ball(self.space, rng, n, self.radius, self.center)
        return sample_ball(self.space, rng, n, self.sample_radius)

    def to_json(self):
        if self.kind == "box":
            return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        if self.kind == "ball":
            return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}
        return {"kind": "whole_space"}
