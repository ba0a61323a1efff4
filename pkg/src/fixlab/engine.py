"""The two-step extended Ishikawa process and its classical special cases.

One step at index n:

    y_n     = beta_n  g_n(x_n) + (1 - beta_n)  T x_n
    x_{n+1} = alpha_n f_n(x_n) + (1 - alpha_n) T y_n

Every ``make_*`` constructor builds a :class:`ProcessConfig` whose run
reproduces one classical recursion (Mann, Ishikawa, their with-errors
variants, viscosity, three-term) through this single step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .domains import Domain
from .families import (
    BoundedSequence,
    ConstantFamily,
    DegenerateIndexError,
    ErrorsFamily,
    ErrorsStateFamily,
    Family,
    IdentityFamily,
)
from .operators import Constant, Operator, lerp
from .schedules import Constant as ConstantSchedule
from .schedules import Schedule, Sum, Zero


class StopReason(str, enum.Enum):
    MAX_ITERS = "max_iters"
    RESIDUAL = "residual_below_tol"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class StopRule:
    max_iters: int = 10_000
    residual_tol: float | None = None
    divergence_radius: float = 1e6

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if not self.divergence_radius > 0:
            raise ValueError("divergence_radius must be positive")


@dataclass
class ProcessConfig:
    """One fully specified run of the extended process.

    ``delta`` is the summable schedule bounding the g-perturbation
    (zero when g is the identity); ``raw`` keeps the source-scheme
    parameters for hypothesis validators.
    """

    T: Operator
    f_family: Family
    g_family: Family
    alpha: Schedule
    beta: Schedule
    x0: np.ndarray
    domain: Domain | None = None
    stop: StopRule = field(default_factory=StopRule)
    seed: int = 0
    delta: Schedule = field(default_factory=Zero)
    scheme: str = "extended"
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x0 = self.T.space.element(self.x0)
        if self.domain is None:
            self.domain = Domain.whole(self.T.space)
        if self.domain.space != self.T.space:
            raise ValueError("domain and operator live in different spaces")
        if not self.domain.contains(self.x0):
            raise ValueError("x0 must lie in the domain")

    @property
    def space(self):
        return self.T.space


@dataclass(frozen=True)
class Trajectory:
    """Immutable per-iteration history of one run."""

    x: np.ndarray
    y: np.ndarray
    residual: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    stop: StopReason | None
    dist: np.ndarray | None = None
    space: object = None

    def __post_init__(self):
        for name in ("x", "y", "residual", "alpha", "beta", "dist"):
            a = getattr(self, name)
            if a is not None:
                a.flags.writeable = False

    def __len__(self):
        return len(self.residual)

    @property
    def n(self):
        return np.arange(len(self))

    @property
    def final(self):
        return self.x[-1]


def _step(cfg: ProcessConfig, n, x):
    a = cfg.alpha(n)
    b = cfg.beta(n)
    g = cfg.g_family(n, x)
    tx = cfg.T(x)
    y = lerp(tx, g, b)
    ty = cfg.T(y)
    f = cfg.f_family(n, x)
    return lerp(ty, f, a), y, tx, a, b


def step_extended(cfg: ProcessConfig, n: int, x):
    """One step; returns ``(x_next, y_n)``."""
    x_next, y, *_ = _step(cfg, n, np.asarray(x, dtype=float))
    return x_next, y


def _check_ranges(cfg):
    if cfg.alpha.sup() > 1.0 or cfg.alpha(0) < 0.0:
        raise ValueError("alpha_n must lie in [0, 1]")
    if cfg.beta.sup() > 1.0 or cfg.beta(0) < 0.0:
        raise ValueError("beta_n must lie in [0, 1]")


def run(cfg: ProcessConfig, reference=None) -> Trajectory:
    """Iterate until max_iters, the residual tolerance, or the divergence guard.

    ``diverged`` means ||x_n|| exceeded ``divergence_radius`` (or a
    non-finite iterate appeared).  When ``reference`` is given the
    distance ||x_n - reference|| is recorded.
    """
    _check_ranges(cfg)
    sp = cfg.space
    norm = sp.norm
    stop = cfg.stop
    tol = stop.residual_tol
    ref = None if reference is None else sp.element(reference)
    xs, ys, rs, als, bes = [], [], [], [], []
    x = cfg.x0
    n = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            x_next, y, tx, a, b = _step(cfg, n, x)
            r = norm(tx - x)
            xs.append(x)
            ys.append(y)
            rs.append(r)
            als.append(a)
            bes.append(b)
            if norm(x) > stop.divergence_radius:
                reason = StopReason.DIVERGED
                break
            if tol is not None and r <= tol:
                reason = StopReason.RESIDUAL
                break
            if n >= stop.max_iters:
                reason = StopReason.MAX_ITERS
                break
            if not np.all(np.isfinite(x_next)):
                reason = StopReason.DIVERGED
                break
            x = x_next
            n += 1
    X = np.array(xs)
    dist = None if ref is None else norm(X - ref)
    return Trajectory(
        x=X,
        y=np.array(ys),
        residual=np.array(rs, dtype=float),
        alpha=np.array(als, dtype=float),
        beta=np.array(bes, dtype=float),
        stop=reason,
        dist=None if dist is None else np.atleast_1d(np.asarray(dist, dtype=float)),
        space=sp,
    )


# -- reductions ------------------------------------------------------------


def _positive_everywhere(s: Schedule) -> bool:
    return s(0) > 0.0 and not s.tail().is_zero


def _require_positive(s: Schedule, what):
    if not _positive_everywhere(s):
        raise DegenerateIndexError(0 if s(0) == 0.0 else "tail", what)


def _common(T, x0, domain, stop, seed):
    return dict(x0=x0, domain=domain, stop=stop or StopRule(), seed=seed)


def _check_in_domain(domain, point, what):
    if domain is not None and not domain.contains(point):
        raise ValueError(f"{what} must lie in the domain")


def make_mann(T: Operator, alpha: Schedule, x0, *, variant="anchored", u=None,
              domain=None, stop=None, seed=0) -> ProcessConfig:
    """x_{n+1} = alpha_n u + (1 - alpha_n) T x_n, or alpha_n x_n + ... when inertial."""
    return make_ishikawa(T, alpha, ConstantSchedule(1.0), x0, variant=variant, u=u,
                         domain=domain, stop=stop, seed=seed, _scheme="mann")


def make_ishikawa(T: Operator, alpha: Schedule, beta: Schedule, x0, *, variant="anchored", u=None,
                  domain=None, stop=None, seed=0, _scheme="ishikawa") -> ProcessConfig:
    """y_n = beta_n x_n + (1 - beta_n) T x_n; x_{n+1} as in the Mann form with T y_n."""
    sp = T.space
    if variant == "anchored":
        if u is None:
            raise ValueError("anchored variant needs an anchor u")
        u = sp.element(u)
        _check_in_domain(domain, u, "anchor u")
        f_family = ConstantFamily(Constant(sp, u))
    elif variant == "inertial":
        f_family = IdentityFamily(sp)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return ProcessConfig(
        T=T, f_family=f_family, g_family=IdentityFamily(sp), alpha=alpha, beta=beta,
        scheme=_scheme, raw={"alpha": alpha, "beta": beta, "u": u, "variant": variant},
        **_common(T, x0, domain, stop, seed),
    )


def make_mann_with_errors(T: Operator, u, u_seq: BoundedSequence, alpha: Schedule, gamma: Schedule, x0,
                          *, domain=None, stop=None, seed=0) -> ProcessConfig:
    """x_{n+1} = alpha_n u + (1 - alpha_n - gamma_n) T x_n + gamma_n u_n."""
    return make_ishikawa_with_errors(
        T, u, u_seq, BoundedSequence(T.space, T.space.zero()), alpha, ConstantSchedule(1.0), gamma, Zero(), x0,
        domain=domain, stop=stop, seed=seed, _scheme="mann_errors",
    )


def make_ishikawa_with_errors(T: Operator, u, u_seq: BoundedSequence, v_seq: BoundedSequence,
                              alpha: Schedule, beta: Schedule, gamma: Schedule, delta: Schedule, x0,
                              *, domain=None, stop=None, seed=0, _scheme="ishikawa_errors") -> ProcessConfig:
    """Ishikawa with errors, reduced via alpha' = alpha + gamma, beta' = beta + delta."""
    sp = T.space
    u = sp.element(u)
    _check_in_domain(domain, u, "anchor u")
    seqs = [(u_seq, "u_seq")] + ([(v_seq, "v_seq")] if _scheme == "ishikawa_errors" else [])
    for seq, name in seqs:
        if domain is not None and not domain.contains_ball(seq.center, seq.radius):
            raise ValueError(f"{name} ball must lie in the domain")
    alpha_p = Sum(alpha, gamma)
    beta_p = Sum(beta, delta)
    _require_positive(alpha_p, "alpha_n + gamma_n")
    _require_positive(beta_p, "beta_n + delta_n")
    return ProcessConfig(
        T=T,
        f_family=ErrorsFamily(u, u_seq, alpha, gamma),
        g_family=ErrorsStateFamily(v_seq, beta, delta),
        alpha=alpha_p,
        beta=beta_p,
        delta=delta,
        scheme=_scheme,
        raw={"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta, "u": u,
             "u_seq": u_seq, "v_seq": v_seq},
        **_common(T, x0, domain, stop, seed),
    )


def make_viscosity(T: Operator, f: Operator, alpha: Schedule, x0, *, domain=None, stop=None, seed=0) -> ProcessConfig:
    """x_{n+1} = alpha_n f(x_n) + (1 - alpha_n) T x_n with a contraction f."""
    if not f.claims_contraction:
        raise ValueError("viscosity needs f with a contraction certificate (lipschitz < 1)")
    sp = T.space
    return ProcessConfig(
        T=T, f_family=ConstantFamily(f), g_family=IdentityFamily(sp), alpha=alpha, beta=ConstantSchedule(1.0),
        scheme="viscosity", raw={"alpha": alpha, "f": f},
        **_common(T, x0, domain, stop, seed),
    )


def make_yao_three_term(T: Operator, u, alpha: Schedule, beta: Schedule, x0,
                        *, domain=None, stop=None, seed=0) -> ProcessConfig:
    """x_{n+1} = alpha_n u + beta_n x_n + gamma_n T x_n, gamma_n = 1 - alpha_n - beta_n.

    Engine step alpha' = alpha + beta and f_n(x) = (beta_n x + alpha_n u)/(alpha_n + beta_n).
    """
    sp = T.space
    u = sp.element(u)
    _check_in_domain(domain, u, "anchor u")
    alpha_p = Sum(alpha, beta)
    _require_positive(alpha_p, "alpha_n + beta_n")
    f_family = ErrorsStateFamily(BoundedSequence(sp, u), beta, alpha)
    return ProcessConfig(
        T=T, f_family=f_family, g_family=IdentityFamily(sp), alpha=alpha_p, beta=ConstantSchedule(1.0),
        scheme="yao", raw={"alpha": alpha, "beta": beta, "u": u},
        **_common(T, x0, domain, stop, seed),
    )


SCHEMES = ("extended", "mann", "ishikawa", "mann_errors", "ishikawa_errors", "viscosity", "yao")
