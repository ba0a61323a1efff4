"""Trajectory diagnostics, the two auxiliary inequalities, and CSV output."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .banach import LpSpace, sample_ball
from .engine import StopReason, Trajectory
from .schedules import Schedule


def scalar_recursion(a0: float, t: Schedule, b: Schedule, c: Schedule, N: int) -> np.ndarray:
    """a_{n+1} = (1 - t_n) a_n + b_n + c_n for n < N; returns a_0..a_N.

    The equality recursion dominates every nonnegative sequence satisfying
    the corresponding inequality with the same a_0.
    """
    if a0 < 0:
        raise ValueError("a0 must be nonnegative")
    n = np.arange(N, dtype=float)
    tv = np.asarray(t.values(n), dtype=float)
    if np.any((tv < 0) | (tv > 1)):
        raise ValueError("t_n must lie in [0, 1]")
    keep = (1.0 - tv).tolist()
    add = (np.asarray(b.values(n), dtype=float) + np.asarray(c.values(n), dtype=float)).tolist()
    out = [float(a0)]
    a = float(a0)
    for k, s in zip(keep, add):
        a = k * a + s
        out.append(a)
    return np.array(out)


def gauge_inequality_gap(space: LpSpace, gauge: float, x, y):
    """||x+y||^g - ||x||^g - g <y, J_g(x+y)>; nonpositive in every l_p."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x + y
    j = space.generalized_duality_map(s, gauge)
    return space.norm(s) ** gauge - space.norm(x) ** gauge - gauge * space.pairing(y, j)


@dataclass(frozen=True)
class InequalityCheck:
    max_value: float
    scale: float
    samples: int
    seed: int

    def __float__(self):
        return self.max_value

    @property
    def passed(self) -> bool:
        return self.max_value <= 1e-9 * self.scale


def check_gauge_inequality(space: LpSpace, gauge: float, samples=10_000, seed=0, radius=10.0) -> InequalityCheck:
    """Largest sampled value of :func:`gauge_inequality_gap` over pairs in the radius ball."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not gauge > 1:
        raise ValueError("gauge exponent must be > 1")
    rng = np.random.default_rng(seed)
    x = sample_ball(space, rng, samples, radius)
    y = sample_ball(space, rng, samples, radius)
    gap = gauge_inequality_gap(space, gauge, x, y)
    return InequalityCheck(float(np.max(gap)), max(1.0, radius**gauge), samples, seed)


def tail_slope(residual, fraction=0.5):
    """Least-squares slope of log r_n against log n over the last ``fraction`` of the run.

    None when fewer than 10 usable steps exist or a residual in the window is zero.
    """
    r = np.asarray(residual, dtype=float)
    start = max(1, int(math.floor(len(r) * (1.0 - fraction))))
    n = np.arange(start, len(r))
    w = r[start:]
    if len(n) < 10 or np.any(w <= 0) or not np.all(np.isfinite(w)):
        return None
    slope, _ = np.polyfit(np.log(n), np.log(w), 1)
    return float(slope)


@dataclass
class ConvergenceReport:
    final_residual: float
    final_dist: float | None
    tail_slope: float | None
    stop: StopReason | None
    iterations: int
    hypothesis_report: dict | None = None

    @property
    def bounded(self) -> bool:
        return self.stop != StopReason.DIVERGED

    def runtime_flags(self) -> dict:
        """Trajectory-level assumptions: boundedness and vanishing residual."""
        return {
            "bounded": self.bounded,
            "residual_decaying": bool(
                self.bounded and (self.final_residual == 0.0 or (self.tail_slope is not None and self.tail_slope < 0))
            ),
        }

    def to_json(self) -> dict:
        return {
            "stop": None if self.stop is None else self.stop.value,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "final_dist": self.final_dist,
            "tail_slope": self.tail_slope,
            "runtime": self.runtime_flags(),
            "hypotheses": self.hypothesis_report,
        }


def convergence_report(traj: Trajectory, q_hat=None, hyp=None) -> ConvergenceReport:
    """Measured decay of a run; never claims convergence."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    final_dist = None
    if q_hat is not None:
        q = np.asarray(q_hat, dtype=float)
        sp = traj.space or LpSpace(traj.x.shape[1], 2.0)
        final_dist = float(sp.norm(traj.x[-1] - q))
    elif traj.dist is not None:
        final_dist = float(traj.dist[-1])
    if hyp is not None and not isinstance(hyp, dict):
        hyp = hyp.to_json()
    return ConvergenceReport(
        final_residual=float(traj.residual[-1]),
        final_dist=final_dist,
        tail_slope=tail_slope(traj.residual),
        stop=traj.stop,
        iterations=len(traj) - 1,
        hypothesis_report=hyp,
    )


# -- CSV -------------------------------------------------------------------


def _fmt(v) -> str:
    return repr(float(v))


def csv_header(dim: int) -> list:
    return ["n", "alpha", "beta", "residual", "dist"] + [f"x_{i}" for i in range(dim)] + [f"y_{i}" for i in range(dim)]


def render_csv(traj: Trajectory) -> str:
    dim = traj.x.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(dim))
    for n in range(len(traj)):
        dist = "" if traj.dist is None else _fmt(traj.dist[n])
        w.writerow(
            [str(n), _fmt(traj.alpha[n]), _fmt(traj.beta[n]), _fmt(traj.residual[n]), dist]
            + [_fmt(v) for v in traj.x[n]]
            + [_fmt(v) for v in traj.y[n]]
        )
    return buf.getvalue()


def export_csv(traj: Trajectory, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(render_csv(traj))
    except OSError as exc:
        raise OSError(f"cannot write trajectory CSV to {path}: {exc}") from exc


def parse_csv(text: str) -> Trajectory:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    dim = sum(1 for h in header if h.startswith("x_"))
    if header != csv_header(dim):
        raise ValueError("unexpected trajectory CSV header")
    cols = list(zip(*body)) if body else [()] * len(header)
    num = lambda c: np.array([float(v) for v in c])
    dist = None if body and cols[4][0] == "" else num(cols[4])
    x = np.array([[float(v) for v in r[5 : 5 + dim]] for r in body]).reshape(-1, dim)
    y = np.array([[float(v) for v in r[5 + dim :]] for r in body]).reshape(-1, dim)
    return Trajectory(x=x, y=y, residual=num(cols[3]), alpha=num(cols[1]), beta=num(cols[2]), stop=None, dist=dist)


def read_csv(path) -> Trajectory:
    return parse_csv(Path(path).read_text(encoding="utf-8"))


def render_anchor_csv(result) -> str:
    dim = len(result.q_hat)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage", "t"] + [f"z_{i}" for i in range(dim)] + ["inner_iters", "inner_residual"])
    for j, s in enumerate(result.path):
        w.writerow([str(j), _fmt(s.t)] + [_fmt(v) for v in s.z] + [str(s.inner_iters), _fmt(s.inner_residual)])
    return buf.getvalue()


def export_anchor_csv(result, path) -> None:
    path = Path(path)
    try:
        path.write_text(render_anchor_csv(result), encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write anchor CSV to {path}: {exc}") from exc
