"""Property suites and direct-recursion oracles.

Each suite returns a :class:`SuiteResult` with the largest violation
found and the tolerance it is judged against.  The oracles evaluate the
classical recursions literally (``a u + (1 - a) T x`` and so on), with no
use of the engine, so agreement with :func:`fixlab.engine.run` checks the
reductions rather than restating them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import check_gauge_inequality, scalar_recursion
from .banach import LpSpace
from .domains import Domain
from .engine import (
    StopRule,
    make_ishikawa,
    make_ishikawa_with_errors,
    make_mann,
    make_mann_with_errors,
    make_viscosity,
    make_yao_three_term,
    run,
)
from .families import BoundedSequence, ErrorsFamily
from .operators import (
    Affine,
    BoxClamp,
    Composition,
    Constant,
    ConvexCombination,
    Identity,
    Rotation2D,
    SegmentProjection,
    check_nonexpansive,
)
from .schedules import Geometric, Power, Zero

DUALITY_GRID = [(p, d) for p in (1.5, 2.0, 3.0, 4.0) for d in (2, 10)]
GAUGE_INEQUALITY_GRID = [(2.0, 2.0), (2.0, 3.0), (3.0, 3.0), (1.5, 2.0)]


@dataclass
class SuiteResult:
    name: str
    max_violation: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_violation <= self.tolerance)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: max violation {self.max_violation:.3e} (tolerance {self.tolerance:.1e})"


# -- duality ---------------------------------------------------------------------


def duality_violation(space: LpSpace, samples=10_000, seed=0):
    """Largest relative error of <x, Jx> = ||x||^2 and ||Jx||_q = ||x|| over seeded x."""
    rng = np.random.default_rng(seed)
    scale = 10.0 ** rng.uniform(-3, 3, samples)
    x = rng.standard_normal((samples, space.dim)) * scale[:, None]
    j = space.duality_map(x)
    nx = space.norm(x)
    e1 = np.abs(space.pairing(x, j) - nx**2) / nx**2
    e2 = np.abs(space.dual_norm(j) - nx) / nx
    return float(max(e1.max(), e2.max()))


def suite_duality(seed=0, samples=10_000) -> SuiteResult:
    per = {f"p={p:g},d={d}": duality_violation(LpSpace(d, p), samples, seed) for p, d in DUALITY_GRID}
    return SuiteResult("duality", max(per.values()), 1e-10, per)


def suite_lemma12(seed=0, samples=10_000, radius=10.0) -> SuiteResult:
    per = {}
    worst = 0.0
    for p, g in GAUGE_INEQUALITY_GRID:
        chk = check_gauge_inequality(LpSpace(3, p), g, samples, seed, radius)
        per[f"p={p:g},gauge={g:g}"] = chk.max_value
        # normalise so a single tolerance applies to every gauge
        worst = max(worst, chk.max_value / chk.scale)
    return SuiteResult("lemma12", worst, 1e-9, per)


def suite_lemma13(N=100_000) -> SuiteResult:
    """a0 = 1, t_n = 1/(n+2), b_n = 1/(n+1)^2, c_n = 2^-n; a_N must fall below 1e-2."""
    a = scalar_recursion(1.0, Power(1.0, 1.0, 2), Power(1.0, 2.0, 1), Geometric(1.0, 0.5), N)
    return SuiteResult("lemma13", float(a[-1]), 1e-2, {"N": N, "a_N": float(a[-1])})


# -- operators ---------------------------------------------------------------------


def catalog_samples(p=2.0):
    """Representative catalog operators in the plane, with the domain they are checked on."""
    sp = LpSpace(2, p)
    box = Domain.box(sp, [-2.0, -2.0], [2.0, 2.0])
    ops = {
        "box_clamp": BoxClamp(sp, [0.0, 0.0], [1.0, 1.0]),
        "identity": Identity(sp),
        "constant": Constant(sp, [0.3, -0.2]),
        "affine": Affine(sp, [[0.6, -0.3], [0.2, 0.5]], [0.1, 0.0], lipschitz=0.8),
    }
    if p == 2.0:
        ops["rotation2d"] = Rotation2D(sp, 0.7, [0.5, -0.5])
        ops["segment_projection"] = SegmentProjection(sp, [0.0, 0.0], [1.0, 0.5])
    ops["convex_combination"] = ConvexCombination(0.3, ops["box_clamp"], ops.get("rotation2d", ops["identity"]))
    ops["composition"] = Composition(ops.get("segment_projection", ops["box_clamp"]), ops["box_clamp"])
    return sp, box, ops


def suite_operators(seed=0, samples=10_000) -> SuiteResult:
    """Nonexpansive claims (ratio <= 1 + 1e-9) and fixed-set residuals (<= 1e-12).

    The reported violation is normalised by each item's own tolerance, so
    the suite passes when it is at most 1.
    """
    worst = 0.0
    per = {}
    for p in (2.0, 3.0):
        sp, dom, ops = catalog_samples(p)
        for name, op in ops.items():
            if op.claims_nonexpansive:
                r = check_nonexpansive(op, dom, samples, seed).ratio
                per[f"{name}@p={p:g}:ratio"] = r
                worst = max(worst, (r - 1.0) / 1e-9)
            fs = op.fixed_set()
            if fs.known:
                pts = fs.grid(21)
                res = float(np.max(sp.norm(op(pts) - pts))) if len(pts) else 0.0
                per[f"{name}@p={p:g}:fixed_residual"] = res
                worst = max(worst, res / 1e-12)
    sp = LpSpace(2, 2.0)
    u = np.array([0.25, 0.75])
    fam = ErrorsFamily(u, BoundedSequence(sp, [0.0, 0.0], 1.0, seed), Power(1.0, 1.0, 1), Zero())
    bitwise = all(np.array_equal(fam(n, np.zeros(2)), u) for n in range(100))
    per["errors_family_gamma0_bitwise"] = bitwise
    if not bitwise:
        worst = math.inf
    return SuiteResult("operators", worst, 1.0, per)


# -- reductions ------------------------------------------------------------------------


def _direct(step, x0, N):
    xs = [np.asarray(x0, dtype=float)]
    for n in range(N):
        xs.append(step(n, xs[-1]))
    return np.array(xs)


def reduction_cases(seed=0, N=1000):
    """(name, ProcessConfig, direct trajectory) for each reduction, with seeded generic parameters."""
    rng = np.random.default_rng(seed)
    sp = LpSpace(2, 2.0)
    T = ConvexCombination(
        float(rng.uniform(0.2, 0.8)),
        Rotation2D(sp, float(rng.uniform(0.3, 3.0)), rng.uniform(-1, 1, 2)),
        BoxClamp(sp, [-1.0, -1.0], [1.0, 1.0]),
    )
    u = rng.uniform(-1, 1, 2)
    x0 = rng.uniform(-3, 3, 2)
    a = Power(float(rng.uniform(0.3, 0.6)), float(rng.uniform(0.5, 1.0)), int(rng.integers(1, 4)))
    b = Power(float(rng.uniform(0.2, 0.4)), float(rng.uniform(0.3, 1.0)), int(rng.integers(1, 4)))
    g = Power(float(rng.uniform(0.1, 0.3)), float(rng.uniform(1.5, 2.5)), int(rng.integers(1, 4)))
    d = Power(float(rng.uniform(0.1, 0.3)), float(rng.uniform(1.5, 2.5)), int(rng.integers(1, 4)))
    useq = BoundedSequence(sp, u, 0.5, int(rng.integers(0, 2**31)))
    vseq = BoundedSequence(sp, -u, 0.5, int(rng.integers(0, 2**31)))
    f = Affine(sp, [[0.4, 0.1], [-0.1, 0.4]], rng.uniform(-1, 1, 2), lipschitz=0.5)
    stop = StopRule(max_iters=N)
    cases = []

    cfg = make_mann(T, a, x0, u=u, stop=stop, seed=seed)
    cases.append(("mann", cfg, _direct(lambda n, x: a(n) * u + (1 - a(n)) * T(x), x0, N)))

    def ishikawa(n, x):
        y = b(n) * x + (1 - b(n)) * T(x)
        return a(n) * u + (1 - a(n)) * T(y)

    cases.append(("ishikawa", make_ishikawa(T, a, b, x0, u=u, stop=stop, seed=seed), _direct(ishikawa, x0, N)))

    def mann_err(n, x):
        return a(n) * u + (1 - a(n) - g(n)) * T(x) + g(n) * useq(n)

    cases.append(("mann_errors", make_mann_with_errors(T, u, useq, a, g, x0, stop=stop, seed=seed),
                  _direct(mann_err, x0, N)))

    def ishikawa_err(n, x):
        y = b(n) * x + (1 - b(n) - d(n)) * T(x) + d(n) * vseq(n)
        return a(n) * u + (1 - a(n) - g(n)) * T(y) + g(n) * useq(n)

    cases.append(("ishikawa_errors", make_ishikawa_with_errors(T, u, useq, vseq, a, b, g, d, x0, stop=stop, seed=seed),
                  _direct(ishikawa_err, x0, N)))

    cases.append(("viscosity", make_viscosity(T, f, a, x0, stop=stop, seed=seed),
                  _direct(lambda n, x: a(n) * f(x) + (1 - a(n)) * T(x), x0, N)))

    def yao(n, x):
        return a(n) * u + b(n) * x + (1 - a(n) - b(n)) * T(x)

    cases.append(("yao", make_yao_three_term(T, u, a, b, x0, stop=stop, seed=seed), _direct(yao, x0, N)))
    return cases


def reduction_gap(traj_x, direct_x) -> float:
    """Largest per-step ||engine - direct|| / max(1, ||direct||) (Euclidean)."""
    diff = np.linalg.norm(traj_x - direct_x, axis=1)
    return float(np.max(diff / np.maximum(1.0, np.linalg.norm(direct_x, axis=1))))


def suite_reductions(seed=0, N=1000) -> SuiteResult:
    per = {}
    for name, cfg, direct in reduction_cases(seed, N):
        tr = run(cfg)
        if len(tr) != len(direct):
            per[name] = math.inf
            continue
        per[name] = reduction_gap(tr.x, direct)
    return SuiteResult("reductions", max(per.values()), 1e-12, per)


SUITES = {
    "duality": suite_duality,
    "lemma12": suite_lemma12,
    "lemma13": lambda seed=0: suite_lemma13(),
    "operators": suite_operators,
    "reductions": suite_reductions,
}


def run_suites(name="all", seed=0) -> list:
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        if n not in SUITES:
            raise ValueError(f"unknown suite {n!r}; choose from {', '.join(SUITES)} or all")
        out.append(SUITES[n](seed=seed))
    return out
