"""Itemized hypothesis checks for the convergence theorems.

Each item records how it was decided: ``analytic`` (closed-form schedule
predicates), ``catalog`` (operator certificates), ``sampled`` (seeded
falsification), ``runtime`` (an assumption on the trajectory, monitored
during a run) or ``info`` (reported, never counted as a failure).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import ProcessConfig, _positive_everywhere
from .families import (
    ConstantFamily,
    DecayingPerturbation,
    ErrorsFamily,
    ErrorsStateFamily,
    IdentityFamily,
    check_perturbation_bound,
    check_uniform_convergence,
    is_nonincreasing,
)
from .operators import Affine, check_contraction, check_nonexpansive, check_self_map
from .schedules import predicate_report, ratio_limit, ratio_tends_to_zero

DEFAULT_SAMPLE_N = (0, 1, 10, 100, 1000, 10000)

PASS, FAIL, RUNTIME, UNVERIFIED, FLAG = "pass", "fail", "runtime", "unverified", "flag"


@dataclass
class HypothesisItem:
    key: str
    text: str
    method: str
    status: str
    detail: str = ""

    def to_json(self):
        return {"key": self.key, "text": self.text, "method": self.method, "status": self.status, "detail": self.detail}


@dataclass
class HypothesisReport:
    theorem: str
    items: list = field(default_factory=list)
    seed: int = 0
    samples: int = 0

    def add(self, key, text, method, ok, detail=""):
        if isinstance(ok, str):
            status = ok
        else:
            status = PASS if ok else FAIL
        self.items.append(HypothesisItem(key, text, method, status, detail))

    def __getitem__(self, key) -> HypothesisItem:
        for it in self.items:
            if it.key == key:
                return it
        raise KeyError(key)

    @property
    def passed(self) -> bool:
        """All items other than runtime-monitored and informational ones pass."""
        return all(it.status == PASS for it in self.items if it.method not in ("runtime", "info"))

    @property
    def failures(self):
        return [it for it in self.items if it.method not in ("runtime", "info") and it.status != PASS]

    def to_json(self):
        return {
            "theorem": self.theorem,
            "passed": self.passed,
            "seed": self.seed,
            "samples": self.samples,
            "items": [it.to_json() for it in self.items],
        }

    def format(self) -> str:
        lines = [f"hypotheses for theorem {self.theorem} (seed={self.seed}, samples={self.samples})"]
        for it in self.items:
            extra = f"  -- {it.detail}" if it.detail else ""
            lines.append(f"  [{it.status.upper():10s}] {it.key:24s} {it.text}  <{it.method}>{extra}")
        lines.append("result: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


# -- shared items ------------------------------------------------------------


def _nonexpansive_item(rep, cfg, samples, seed):
    T = cfg.T
    chk = check_nonexpansive(T, cfg.domain, samples, seed)
    ok = T.claims_nonexpansive and chk.is_nonexpansive
    if isinstance(T, Affine):
        ok = ok and T.certificate_consistent
    claim = "none" if T.lipschitz is None else f"{T.lipschitz:g}"
    rep.add("T_nonexpansive", "T is nonexpansive", "catalog+sampled", ok,
            f"claimed L={claim}, sampled ratio={chk.ratio:.6g}")
    rep.add("T_self_map", "T maps D into D", "sampled", check_self_map(T, cfg.domain, samples, seed))


def _fixed_set_item(rep, cfg):
    fs = cfg.T.fixed_set()
    rep.add("F(T)_nonempty", "F(T) is nonempty", "catalog", PASS if fs.known else UNVERIFIED, f"descriptor={fs.kind}")


def _alpha_items(rep, alpha, prefix="a"):
    pr = predicate_report(alpha)
    rep.add(f"({prefix}) alpha_to_zero", "alpha_n -> 0", "analytic", pr.tends_to_zero)
    rep.add(f"({prefix}) alpha_sum", "sum alpha_n = inf", "analytic", pr.sum_diverges)
    rep.add(f"({prefix}) alpha_range", "alpha_n in [0, 1]", "analytic", 0.0 <= alpha(0) and alpha.sup() <= 1.0,
            f"sup={alpha.sup():g}")


def _runtime_items(rep):
    rep.add("(g) bounded", "{x_n} is bounded", "runtime", RUNTIME, "divergence guard during run")
    rep.add("(g) residual", "||T x_n - x_n|| -> 0", "runtime", RUNTIME, "residual tail slope during run")


def _sample_n(sample_n, cfg):
    return list(DEFAULT_SAMPLE_N if sample_n is None else sample_n)


def _family_converges(fam) -> tuple:
    """(analytic verdict, note) for uniform convergence of f_n to its limit."""
    if isinstance(fam, ConstantFamily):
        return True, "f_n = f"
    if isinstance(fam, DecayingPerturbation):
        return predicate_report(fam.rate).tends_to_zero, "rate -> 0 with bounded direction"
    if isinstance(fam, ErrorsFamily):
        return ratio_tends_to_zero(fam.gamma, fam.alpha), "gamma_n/(alpha_n+gamma_n) -> 0, u_n bounded"
    if isinstance(fam, ErrorsStateFamily):
        ok = fam.v_seq.is_constant and not np.isnan(ratio_limit(fam.delta, fam.beta))
        return ok, "weights converge; uniform on bounded D"
    if isinstance(fam, IdentityFamily):
        return True, "f_n = identity"
    return False, "no analytic rule"


# -- theorems ----------------------------------------------------------------


def validate_extended(cfg: ProcessConfig, samples=1000, seed=None, sample_n=None) -> "HypothesisReport":
    seed = cfg.seed if seed is None else seed
    ns = _sample_n(sample_n, cfg)
    rep = HypothesisReport("2.1", seed=seed, samples=samples)
    _nonexpansive_item(rep, cfg, samples, seed)
    _fixed_set_item(rep, cfg)
    _alpha_items(rep, cfg.alpha)
    rep.add("(b) beta_range", "beta_n in (0, 1]", "analytic",
            _positive_everywhere(cfg.beta) and cfg.beta.sup() <= 1.0, f"sup={cfg.beta.sup():g}")
    rep.add("(c) delta_sum", "sum delta_n < inf", "analytic", predicate_report(cfg.delta).sum_converges)

    fam = cfg.f_family
    cert = fam.lipschitz_certificate()
    emp = 0.0
    for n in ns:
        member = lambda x, n=n: fam(n, x)
        emp = max(emp, check_contraction(member, cfg.domain, samples, seed).ratio)
    ok = cert is not None and cert < 1.0 and emp <= cert + 1e-9
    rep.add("(d) uniform_contraction", "f_n are contractions with a common L < 1", "catalog+sampled", ok,
            f"certificate L={cert}, sampled L={emp:.6g}")

    limit = fam.limit()
    if limit is None:
        rep.add("(e) uniform_convergence", "f_n -> f in Pi_D uniformly", "analytic+sampled", FAIL, "no limit map")
    else:
        analytic, note = _family_converges(fam)
        vals = check_uniform_convergence(fam, limit, cfg.domain, ns, samples, seed)
        decreasing = is_nonincreasing(vals) and vals[-1] <= vals[0] + 1e-12
        in_pi = limit.claims_contraction
        rep.add("(e) uniform_convergence", "f_n -> f in Pi_D uniformly", "analytic+sampled",
                analytic and decreasing and in_pi,
                f"{note}; limit contraction={in_pi}; sampled sup gaps={[float(f'{v:.3g}') for v in vals]}")

    M = cfg.g_family.perturbation_constant()
    if M is None:
        rep.add("(f) perturbation_bound", "beta_n ||g_n(x) - x|| <= delta_n (||x|| + M)", "sampled", UNVERIFIED,
                "no certified M for this g family")
    else:
        pb = check_perturbation_bound(cfg.g_family, cfg.beta, cfg.delta, M, cfg.domain, ns, samples, seed)
        rep.add("(f) perturbation_bound", "beta_n ||g_n(x) - x|| <= delta_n (||x|| + M)", "sampled", pb.passed,
                f"M={M:g}, min margin={pb.min_margin:.3g}")
    _runtime_items(rep)
    return rep


def validate_viscosity(cfg: ProcessConfig, samples=1000, seed=None) -> HypothesisReport:
    if cfg.scheme not in ("viscosity", "mann") or not isinstance(cfg.f_family, ConstantFamily):
        raise SchemeMismatch("theorem 3.1 covers the viscosity scheme (or anchored Mann)")
    seed = cfg.seed if seed is None else seed
    rep = HypothesisReport("3.1", seed=seed, samples=samples)
    _nonexpansive_item(rep, cfg, samples, seed)
    _fixed_set_item(rep, cfg)
    f = cfg.f_family.f
    chk = check_contraction(f, cfg.domain, samples, seed)
    rep.add("f_contraction", "f is a contraction on D", "catalog+sampled",
            f.claims_contraction and chk.ratio <= f.lipschitz + 1e-9,
            f"claimed L={f.lipschitz}, sampled L={chk.ratio:.6g}")
    rep.add("f_self_map", "f maps D into D", "sampled", check_self_map(f, cfg.domain, samples, seed))
    _alpha_items(rep, cfg.alpha)
    rep.add("(g) residual", "||T x_n - x_n|| -> 0", "runtime", RUNTIME, "residual tail slope during run")
    return rep


def validate_with_errors(cfg: ProcessConfig, samples=1000, seed=None) -> HypothesisReport:
    if cfg.scheme not in ("ishikawa_errors", "mann_errors"):
        raise SchemeMismatch("theorem 3.2 covers the Ishikawa (or Mann) scheme with errors")
    seed = cfg.seed if seed is None else seed
    raw = cfg.raw
    a, b, g, d = raw["alpha"], raw["beta"], raw["gamma"], raw["delta"]
    rep = HypothesisReport("3.2", seed=seed, samples=samples)
    _nonexpansive_item(rep, cfg, samples, seed)
    _fixed_set_item(rep, cfg)
    ag, bd = cfg.alpha, cfg.beta
    rep.add("alpha+gamma_range", "0 <= alpha_n + gamma_n <= 1", "analytic", ag.sup() <= 1.0, f"sup={ag.sup():g}")
    rep.add("beta+delta_range", "0 < beta_n + delta_n <= 1", "analytic",
            _positive_everywhere(bd) and bd.sup() <= 1.0, f"sup={bd.sup():g}")
    pa = predicate_report(a)
    rep.add("alpha_to_zero", "alpha_n -> 0", "analytic", pa.tends_to_zero)
    rep.add("alpha_sum", "sum alpha_n = inf", "analytic", pa.sum_diverges)
    rep.add("gamma_sum", "sum gamma_n < inf", "analytic", predicate_report(g).sum_converges)
    rep.add("delta_sum", "sum delta_n < inf", "analytic", predicate_report(d).sum_converges)
    for name in ("u_seq", "v_seq"):
        seq = raw[name]
        inside = cfg.domain.contains_ball(seq.center, seq.radius)
        rep.add(f"{name}_bounded", f"{{{name[0]}_n}} bounded in D", "catalog", bool(np.isfinite(seq.bound) and inside),
                f"sup norm <= {seq.bound:g}")
    rep.add("gamma_ratio", "gamma_n / (alpha_n + gamma_n) -> 0", "analytic", ratio_tends_to_zero(g, a))
    _runtime_items(rep)
    return rep


def validate_three_term(cfg: ProcessConfig, samples=1000, seed=None, horizon=10_000) -> HypothesisReport:
    if cfg.scheme != "yao":
        raise SchemeMismatch("theorem 3.3 covers the three-term scheme")
    seed = cfg.seed if seed is None else seed
    a, b = cfg.raw["alpha"], cfg.raw["beta"]
    rep = HypothesisReport("3.3", seed=seed, samples=samples)
    _nonexpansive_item(rep, cfg, samples, seed)
    _fixed_set_item(rep, cfg)
    s = cfg.alpha
    rep.add("weights_nonnegative", "alpha_n, beta_n, gamma_n >= 0", "analytic",
            a(0) >= 0 and b(0) >= 0 and s.sup() <= 1.0, f"sup(alpha+beta)={s.sup():g}")
    rep.add("alpha_to_zero", "alpha_n -> 0", "analytic", predicate_report(a).tends_to_zero)
    rep.add("beta_to_zero", "beta_n -> 0", "analytic", predicate_report(b).tends_to_zero)
    rep.add("alpha_sum", "sum alpha_n = inf", "analytic", predicate_report(a).sum_diverges)
    Ls = cfg.f_family.lipschitz_certificate(horizon)
    rep.add("induced_contraction", "sup_n beta_n/(alpha_n+beta_n) < 1", "info", PASS if Ls < 1.0 else FLAG,
            f"sup L_n = {Ls:.6g} (prefix of {horizon} terms joined with the limit)")
    rep.add("(g) residual", "||T x_n - x_n|| -> 0", "runtime", RUNTIME, "residual tail slope during run")
    return rep


class SchemeMismatch(ValueError):
    pass


VALIDATORS = {
    "2.1": validate_extended,
    "3.1": validate_viscosity,
    "3.2": validate_with_errors,
    "3.3": validate_three_term,
}


def validate(cfg: ProcessConfig, theorem: str, **kw) -> HypothesisReport:
    try:
        fn = VALIDATORS[theorem]
    except KeyError:
        raise ValueError(f"unknown theorem {theorem!r}; choose from {sorted(VALIDATORS)}") from None
    return fn(cfg, **kw)
