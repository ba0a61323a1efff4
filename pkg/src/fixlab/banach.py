"""Finite-dimensional real l_p spaces.

The dual space is identified with R^d under the Euclidean dot product and
carries the conjugate q-norm.  All vector functions accept either a single
point of shape ``(dim,)`` or a batch of shape ``(..., dim)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LpSpace:
    """Real l_p^dim with 1 < p < inf (uniformly smooth)."""

    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        p = float(self.p)
        if not np.isfinite(p) or p <= 1.0:
            raise ValueError(
                f"exponent p={self.p!r} rejected: l_p is uniformly smooth only "
                "for 1 < p < inf (p = 1 and p = inf are not supported)"
            )
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        """Conjugate exponent, 1/p + 1/q = 1."""
        return self.p / (self.p - 1.0)

    @property
    def dual(self) -> "LpSpace":
        return LpSpace(self.dim, self.q)

    def element(self, coords) -> np.ndarray:
        """Validate ``coords`` as a point of this space and return a float array."""
        x = np.array(coords, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("vector coordinates must be finite")
        return x

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise ValueError(
                f"dimension mismatch: space has dim {self.dim}, got shape {x.shape}"
            )
        return x

    def norm(self, x):
        """(sum |x_i|^p)^(1/p), evaluated with max-abs scaling."""
        return _pnorm(self._check(x), self.p)

    def dual_norm(self, f):
        return _pnorm(self._check(f), self.q)

    def pairing(self, x, f):
        """<x, f> = sum x_i f_i."""
        x = self._check(x)
        f = self._check(f)
        return np.sum(x * f, axis=-1)

    def duality_map(self, x):
        """Normalized duality map J; J(0) = 0."""
        return self.generalized_duality_map(x, 2.0)

    def generalized_duality_map(self, x, gauge: float):
        """Duality map with gauge t^(gauge-1).

        ``<x, J(x)> = ||x||^gauge`` and ``||J(x)||_q = ||x||^(gauge-1)``.
        """
        if not gauge > 1.0:
            raise ValueError(f"gauge exponent must be > 1, got {gauge!r}")
        x = self._check(x)
        p = self.p
        if p == 2.0 and gauge == 2.0:
            return x.copy()
        nx = np.expand_dims(_pnorm(x, p), -1)
        safe = np.where(nx > 0, nx, 1.0)
        # ||x||^(gauge-1) (|x_i|/||x||)^(p-1): no intermediate over/underflow
        r = np.abs(x) / safe
        mag = r if p == 2.0 else r ** (p - 1.0)
        out = np.sign(x) * mag * safe ** (gauge - 1.0)
        return np.where(nx > 0, out, 0.0)


def _pnorm(x, p):
    ax = np.abs(x)
    if ax.ndim == 1:
        m = float(ax.max())
        if m == 0.0 or m != m:
            return m
        r = ax / m
        if p == 2.0:
            return m * math.sqrt(float(r @ r))
        return m * float(np.sum(r**p)) ** (1.0 / p)
    m = np.max(ax, axis=-1)
    safe = np.where(m > 0, m, 1.0)
    r = ax / np.expand_dims(safe, -1)
    if p == 2.0:
        s = np.sqrt(np.sum(r * r, axis=-1))
    else:
        s = np.sum(r**p, axis=-1) ** (1.0 / p)
    out = m * s
    if np.ndim(out) == 0:
        return float(out)
    return out


def sample_ball(space: LpSpace, rng: np.random.Generator, n: int, radius=1.0, center=None):
    """Draw ``n`` points from the closed l_p ball (not uniform in volume)."""
    g = rng.standard_normal((n, space.dim))
    nrm = space.norm(g)
    nrm = np.where(nrm > 0, nrm, 1.0)
    u = rng.random(n) ** (1.0 / space.dim)
    pts = g / nrm[:, None] * (radius * u)[:, None]
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


# geometric grid of displacement lengths, shared by every pair so that the
# probe is monotone in delta by set inclusion
_PROBE_GRID = np.geomspace(1e-12, 1.0, 128)


def continuity_probe(space: LpSpace, radius: float, delta: float, samples: int, seed: int) -> float:
    """Empirical modulus of continuity of J on the ball of the given radius.

    Returns the largest ``||J(x) - J(y)||_q`` found over seeded pairs with
    ``||x||, ||y|| <= radius`` and ``||x - y|| <= delta``.  Each pair is a base
    point, a unit direction, and a fixed grid of step lengths; only the
    grid steps not exceeding ``delta`` are used, so the result is
    non-decreasing in ``delta`` for a fixed seed.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if delta == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    base = sample_ball(space, rng, samples, radius)
    d = rng.standard_normal((samples, space.dim))
    d /= np.where(space.norm(d) > 0, space.norm(d), 1.0)[:, None]
    steps = _PROBE_GRID * (2.0 * radius)
    steps = steps[steps <= delta]
    if steps.size == 0:
        return 0.0
    jb = space.duality_map(base)
    best = 0.0
    for s in steps:
        y = base + s * d
        ok = space.norm(y) <= radius
        if not np.any(ok):
            continue
        gap = space.dual_norm(space.duality_map(y[ok]) - jb[ok])
        best = max(best, float(np.max(gap)))
    return best
