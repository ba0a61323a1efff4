"""JSON experiment configs: schema validation and object construction.

A config is checked against ``config.schema.json`` (unknown keys are
errors) before anything is built.  How the families are read depends on
the scheme:

* ``mann`` / ``ishikawa``: ``f_family`` is ``constant_family`` of a
  ``constant`` operator (anchored variant, anchor u) or ``identity_family``
  (inertial variant).
* ``mann_errors`` / ``ishikawa_errors``: ``f_family`` is an
  ``errors_family`` giving u and the u_n generator; ``ishikawa_errors``
  also needs an ``errors_state_family`` giving the v_n generator.  The
  weights come from ``schedules.alpha/beta/gamma/delta``.
* ``viscosity``: ``f_family`` is ``constant_family`` of the contraction f.
* ``yao``: ``f_family`` is ``constant_family`` of a ``constant`` operator
  naming the anchor u; the three-term weights are alpha and beta.
* ``extended``: both families are used as given; errors families take
  their weights from the schedules section.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .banach import LpSpace
from .domains import Domain
from .engine import (
    ProcessConfig,
    StopRule,
    make_ishikawa,
    make_ishikawa_with_errors,
    make_mann,
    make_mann_with_errors,
    make_viscosity,
    make_yao_three_term,
)
from .families import (
    BoundedSequence,
    ConstantFamily,
    DecayingPerturbation,
    ErrorsFamily,
    ErrorsStateFamily,
    IdentityFamily,
)
from .operators import (
    Affine,
    BoxClamp,
    Composition,
    Constant,
    ConvexCombination,
    Identity,
    Operator,
    Rotation2D,
    SegmentProjection,
)
from .schedules import Constant as ConstantSchedule
from .schedules import Zero
from .schedules import from_json as schedule_from_json

ANCHOR_DEFAULTS = {"t0": 0.5, "sigma": 0.5, "path_tol": 1e-8, "inner_tol": 1e-12, "max_stages": 60}


class ConfigError(ValueError):
    """Invalid experiment config (maps to CLI exit status 2)."""


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("fixlab").joinpath("config.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_document(doc) -> None:
    validator = jsonschema.Draft202012Validator(schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {err.message}")


# -- builders ----------------------------------------------------------------


def build_space(d) -> LpSpace:
    return LpSpace(d["dim"], d.get("p", 2.0))


def build_domain(sp, d) -> Domain:
    if d is None or d["kind"] == "whole_space":
        if d is not None and "sample_radius" in d:
            return Domain.whole(sp, d["sample_radius"])
        return Domain.whole(sp)
    if d["kind"] == "box":
        return Domain.box(sp, d["lo"], d["hi"])
    return Domain.ball(sp, d["center"], d["radius"])


def build_operator(sp, d) -> Operator:
    kind = d["kind"]
    if kind == "rotation2d":
        return Rotation2D(sp, d["theta"], d.get("center"), tuple(d.get("plane", (0, 1))))
    if kind == "box_clamp":
        return BoxClamp(sp, d["lo"], d["hi"])
    if kind == "segment_projection":
        return SegmentProjection(sp, d["a"], d["b"])
    if kind == "affine":
        return Affine(sp, d["matrix"], d.get("offset"), d.get("lipschitz"))
    if kind == "convex_combination":
        return ConvexCombination(d["weight"], build_operator(sp, d["op1"]), build_operator(sp, d["op2"]))
    if kind == "composition":
        return Composition(build_operator(sp, d["op1"]), build_operator(sp, d["op2"]))
    if kind == "constant":
        return Constant(sp, d["u"])
    if kind == "identity":
        return Identity(sp)
    raise ConfigError(f"unknown operator kind {kind!r}")


def build_sequence(sp, d) -> BoundedSequence:
    return BoundedSequence(sp, d["center"], d.get("radius", 0.0), d.get("seed", 0))


def build_family(sp, d, schedules):
    kind = d["kind"]
    if kind == "constant_family":
        return ConstantFamily(build_operator(sp, d["f"]))
    if kind == "decaying_perturbation":
        return DecayingPerturbation(
            build_operator(sp, d["base"]), build_operator(sp, d["direction"]), schedule_from_json(d["rate"])
        )
    if kind == "errors_family":
        return ErrorsFamily(d["u"], build_sequence(sp, d["u_seq"]), schedules["alpha"], _need(schedules, "gamma"))
    if kind == "errors_state_family":
        return ErrorsStateFamily(build_sequence(sp, d["v_seq"]), _need(schedules, "beta"), _need(schedules, "delta"))
    if kind == "identity_family":
        return IdentityFamily(sp)
    raise ConfigError(f"unknown family kind {kind!r}")


def _need(schedules, key):
    if key not in schedules:
        raise ConfigError(f"schedules.{key} is required for this config")
    return schedules[key]


def _need_family(doc, key, kinds):
    fam = doc.get(key)
    if fam is None or fam["kind"] not in kinds:
        raise ConfigError(f"scheme {doc['scheme']!r} needs {key} of kind {' or '.join(kinds)}")
    return fam


def _anchor_point(doc):
    fam = _need_family(doc, "f_family", ("constant_family",))
    if fam["f"]["kind"] != "constant":
        raise ConfigError(f"scheme {doc['scheme']!r} needs f_family = constant_family of a constant operator (the anchor u)")
    return fam["f"]["u"]


def _mann_variant(doc):
    fam = _need_family(doc, "f_family", ("constant_family", "identity_family"))
    if fam["kind"] == "identity_family":
        return "inertial", None
    return "anchored", _anchor_point(doc)


def build_process(doc, sp, domain, schedules) -> ProcessConfig:
    scheme = doc["scheme"]
    st = doc.get("stop", {})
    stop = StopRule(st.get("max_iters", 10_000), st.get("residual_tol"), st.get("divergence_radius", 1e6))
    T = build_operator(sp, doc["operator_T"])
    x0 = doc["x0"]
    common = dict(domain=domain, stop=stop, seed=doc.get("seed", 0))
    a = schedules["alpha"]
    if scheme == "mann":
        variant, u = _mann_variant(doc)
        return make_mann(T, a, x0, variant=variant, u=u, **common)
    if scheme == "ishikawa":
        variant, u = _mann_variant(doc)
        return make_ishikawa(T, a, _need(schedules, "beta"), x0, variant=variant, u=u, **common)
    if scheme == "mann_errors":
        f = _need_family(doc, "f_family", ("errors_family",))
        return make_mann_with_errors(T, f["u"], build_sequence(sp, f["u_seq"]), a, _need(schedules, "gamma"), x0,
                                     **common)
    if scheme == "ishikawa_errors":
        f = _need_family(doc, "f_family", ("errors_family",))
        g = _need_family(doc, "g_family", ("errors_state_family",))
        return make_ishikawa_with_errors(
            T, f["u"], build_sequence(sp, f["u_seq"]), build_sequence(sp, g["v_seq"]), a,
            _need(schedules, "beta"), _need(schedules, "gamma"), _need(schedules, "delta"), x0, **common,
        )
    if scheme == "viscosity":
        f = _need_family(doc, "f_family", ("constant_family",))
        return make_viscosity(T, build_operator(sp, f["f"]), a, x0, **common)
    if scheme == "yao":
        return make_yao_three_term(T, _anchor_point(doc), a, _need(schedules, "beta"), x0, **common)
    # extended
    if "f_family" not in doc:
        raise ConfigError("scheme 'extended' needs f_family")
    f_family = build_family(sp, doc["f_family"], schedules)
    g_family = build_family(sp, doc.get("g_family", {"kind": "identity_family"}), schedules)
    return ProcessConfig(
        T=T, f_family=f_family, g_family=g_family, alpha=a,
        beta=schedules.get("beta", ConstantSchedule(1.0)), delta=schedules.get("delta", Zero()),
        x0=x0, scheme="extended", raw={k: v for k, v in schedules.items()}, **common,
    )


@dataclass
class Experiment:
    """A validated config with its built objects."""

    doc: dict
    process: ProcessConfig
    schedules: dict
    anchor: dict = field(default_factory=dict)
    name: str = ""

    @property
    def theorem(self):
        return self.doc.get("theorem")

    @property
    def space(self):
        return self.process.space

    def anchor_maps(self):
        """(T, f) for the anchor path, f being the uniform limit of f_n."""
        f = self.process.f_family.limit()
        if f is None or not f.claims_contraction:
            raise ConfigError("anchor path needs f_family with a uniform limit carrying a contraction certificate")
        return self.process.T, f


def build(doc, name="") -> Experiment:
    validate_document(doc)
    try:
        sp = build_space(doc["space"])
        domain = build_domain(sp, doc.get("domain"))
        schedules = {k: schedule_from_json(v) for k, v in doc["schedules"].items()}
        process = build_process(doc, sp, domain, schedules)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    anchor = {**ANCHOR_DEFAULTS, **doc.get("anchor", {})}
    return Experiment(doc, process, schedules, anchor, name)


# -- files and presets ---------------------------------------------------------


def preset_names() -> list:
    root = resources.files("fixlab").joinpath("presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def preset_document(name: str) -> dict:
    if name not in preset_names():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    text = resources.files("fixlab").joinpath("presets", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_document(source) -> tuple:
    """Read a config from a path, or a bundled preset by name. Returns (doc, name)."""
    path = Path(source)
    if path.is_file():
        try:
            return json.loads(path.read_text(encoding="utf-8")), path.stem
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
    if path.suffix == "" and path.parent == Path("."):
        return preset_document(str(source)), str(source)
    raise ConfigError(f"config file {source} not found")


def load(source) -> Experiment:
    doc, name = load_document(source)
    return build(doc, name)
