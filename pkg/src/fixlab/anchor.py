"""Implicit anchor path z_t = t f(z_t) + (1 - t) T z_t and its limit as t -> 0.

For a contraction f with constant L and nonexpansive T the map
G(z) = t f(z) + (1 - t) T z contracts with factor 1 - t (1 - L), so the
path point at each t is unique.  The limit of the path is a fixed point of
T which solves the variational inequality checked by :func:`vi_residual`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .families import Family
from .operators import Operator
from .schedules import Schedule


class AnchorNonConvergence(RuntimeError):
    """Inner solver ran out of iterations; carries the best iterate."""

    def __init__(self, message, best, residual):
        super().__init__(message)
        self.best = best
        self.residual = residual


@dataclass(frozen=True)
class ImplicitSolution:
    z: np.ndarray
    iters: int
    residual: float
    picard_budget: int
    steps: tuple = ()


def picard_budget(residual0, inner_tol, kappa) -> int:
    """Iterations after which plain Picard iteration is guaranteed below tolerance."""
    if residual0 <= inner_tol:
        return 0
    if kappa <= 0.0:
        return 1
    return int(math.ceil(math.log(inner_tol / residual0) / math.log(kappa)))


def _contraction_constant(f: Operator):
    if f.lipschitz is None or not f.lipschitz < 1.0:
        raise ValueError("anchor map needs f with a contraction certificate (lipschitz < 1)")
    return f.lipschitz


def solve_implicit(T: Operator, f: Operator, t: float, z_init=None, inner_tol=1e-12, max_inner=None,
                   method="anderson", memory=5) -> ImplicitSolution:
    """Solve z = t f(z) + (1 - t) T(z) to ``||z - G(z)|| <= inner_tol``.

    ``method="picard"`` iterates G directly and records the step lengths;
    ``"anderson"`` applies safeguarded Anderson mixing to the same map,
    falling back to a plain step whenever mixing fails to reduce the
    residual.  Either way the returned point carries the certified
    residual.  ``max_inner`` defaults to twice the Picard budget.
    """
    L = _contraction_constant(f)
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    sp = T.space
    norm = sp.norm
    z = sp.zero() if z_init is None else sp.element(z_init)
    kappa = 1.0 - t * (1.0 - L)

    def G(v):
        if t == 1.0:
            return f(v)
        return t * f(v) + (1.0 - t) * T(v)

    g = G(z)
    r = g - z
    rn = norm(r)
    budget = picard_budget(rn, inner_tol, kappa)
    if max_inner is None:
        max_inner = max(10, min(2 * budget, 10_000_000))
    it = 0
    steps = []
    dG, dR = [], []
    while rn > inner_tol:
        if it >= max_inner:
            raise AnchorNonConvergence(
                f"inner solver hit max_inner={max_inner} at t={t:g} with residual {rn:.3e}", z, rn
            )
        if method == "anderson" and dR:
            A = np.array(dR).T
            coef, *_ = np.linalg.lstsq(A, r, rcond=None)
            cand = g - np.array(dG).T @ coef
        else:
            cand = g
        gc = G(cand)
        rc = gc - cand
        rcn = norm(rc)
        it += 1
        if dR and not rcn < rn:
            # mixing did not help: plain step, drop the history
            dG.clear()
            dR.clear()
            cand = g
            gc = G(cand)
            rc = gc - cand
            rcn = norm(rc)
            it += 1
        if method == "picard":
            steps.append(norm(cand - z))
        else:
            dG.append(gc - g)
            dR.append(rc - r)
            if len(dR) > memory:
                dG.pop(0)
                dR.pop(0)
        z, g, r, rn = cand, gc, rc, rcn
    return ImplicitSolution(z, it, rn, budget, tuple(steps))


@dataclass(frozen=True)
class PathStage:
    t: float
    z: np.ndarray
    inner_iters: int
    inner_residual: float
    fixed_residual: float


@dataclass
class AnchorResult:
    """Estimate of the path limit and the evidence behind it.

    ``eps`` is ||T q_hat - q_hat||; ``residual_rate`` is the largest
    ||T z_t - z_t|| / t seen along the path; ``error_estimate`` bounds the
    distance to the limit to first order (remaining geometric path tail
    plus the inner-solver error at the last stage).
    """

    q_hat: np.ndarray
    path: list
    converged: bool
    eps: float
    residual_rate: float
    error_estimate: float
    lipschitz: float
    vi_residual_max: float | None = None
    tol_vi: float | None = None

    @property
    def t_last(self):
        return self.path[-1].t

    @property
    def accepted(self) -> bool:
        """True when the path converged and the variational inequality check passed."""
        return bool(self.converged and self.vi_residual_max is not None and self.vi_residual_max <= self.tol_vi)


def estimate_Q(T: Operator, f: Operator, t0=0.5, sigma=0.5, path_tol=1e-8, inner_tol=1e-12, max_stages=60,
               z_init=None, method="anderson") -> AnchorResult:
    """Follow the anchor path at t_j = t0 sigma^j with warm starts."""
    if not 0.0 < t0 < 1.0:
        raise ValueError("t0 must lie in (0, 1)")
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0, 1)")
    L = _contraction_constant(f)
    sp = T.space
    z = sp.zero() if z_init is None else sp.element(z_init)
    path = []
    converged = False
    step = float("inf")
    for j in range(max_stages):
        t = t0 * sigma**j
        sol = solve_implicit(T, f, t, z, inner_tol=inner_tol, method=method)
        path.append(PathStage(t, sol.z, sol.iters, sol.residual, sp.norm(T(sol.z) - sol.z)))
        if j > 0:
            step = sp.norm(sol.z - z)
        z = sol.z
        if step <= path_tol:
            converged = True
            break
    last = path[-1]
    tail = 0.0 if not np.isfinite(step) else step * sigma / (1.0 - sigma)
    err = tail + last.inner_residual / (last.t * (1.0 - L))
    return AnchorResult(
        q_hat=z,
        path=path,
        converged=converged,
        eps=sp.norm(T(z) - z),
        residual_rate=max(s.fixed_residual / s.t for s in path),
        error_estimate=err,
        lipschitz=L,
    )


def vi_residual(q_hat, f: Operator, fixed_points, space) -> float:
    """max over p of <q_hat - f(q_hat), J(q_hat - p)>; the limit point makes this <= 0."""
    pts = np.atleast_2d(np.asarray(fixed_points, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("need at least one fixed point")
    q = np.asarray(q_hat, dtype=float)
    w = q - f(q)
    return float(np.max(space.pairing(w, space.duality_map(q - pts))))


def attach_vi(result: AnchorResult, f: Operator, fixed_points, space) -> AnchorResult:
    """Fill ``vi_residual_max`` and the tolerance it is judged against."""
    pts = np.atleast_2d(np.asarray(fixed_points, dtype=float))
    q = result.q_hat
    diam = float(np.max(space.norm(q - pts))) if len(pts) else 0.0
    w = space.norm(q - f(q))
    result.vi_residual_max = vi_residual(q, f, pts, space)
    result.tol_vi = result.error_estimate * ((1.0 + result.lipschitz) * diam + w) + 1e-12
    return result


@dataclass(frozen=True)
class FamilyGap:
    n: int
    t: float
    z_n: np.ndarray
    z_limit: np.ndarray
    gap: float
    lhs: float
    rhs: float
    slack: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.slack


def solve_implicit_family(T: Operator, family: Family, f: Operator, t: Schedule, n_list, inner_tol=1e-12,
                          z_init=None) -> list:
    """Solve the anchor equation with f_n and with its limit f for each n.

    Checks (1 - L) ||z_n - z'_n|| <= ||f_n(z_n) - f(z_n)|| where L is the
    contraction constant of f.  Inexact inner solves add
    (rho_n + rho'_n) / t_n to the right side, rho being the certified
    residuals, plus 4 inner_tol for rounding.
    """
    L = _contraction_constant(f)
    sp = T.space
    out = []
    for n in n_list:
        tn = float(t(int(n)))
        if not 0.0 < tn < 1.0:
            raise ValueError(f"t_n must lie in (0, 1), got {tn} at n={n}")
        fn = _IndexedMap(family, int(n), sp)
        s1 = solve_implicit(T, fn, tn, z_init, inner_tol=inner_tol)
        s2 = solve_implicit(T, f, tn, z_init, inner_tol=inner_tol)
        gap = sp.norm(s1.z - s2.z)
        rhs = sp.norm(family(int(n), s1.z) - f(s1.z))
        slack = (s1.residual + s2.residual) / tn + 4.0 * inner_tol
        out.append(FamilyGap(int(n), tn, s1.z, s2.z, gap, (1.0 - L) * gap, rhs, slack))
    return out


class _IndexedMap(Operator):
    """f_n frozen at one index, seen as an operator."""

    kind = "indexed_family_member"

    def __init__(self, family: Family, n: int, space):
        super().__init__(space)
        self.family, self.n = family, n
        cert = family.lipschitz_certificate()
        self.lipschitz = cert

    def __call__(self, x):
        return self.family(self.n, x)

    def to_json(self):
        return {"kind": self.kind, "n": self.n, "family": self.family.to_json()}
