"""End-to-end analysis of a ``.tk`` file and its text/JSON rendering."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .estimator import BoundaryKTheory
from .exceptions import BoundError, ConsistencyError, HypothesisError
from .groups import FiniteGroup
from .ktheory import (PointedGroup, classify, pointed_isomorphic, reference_formula_51,
                      reference_formula_52)
from .spec_parser import SpecError, SpecSource, load_spec
from .tree import (Amalgam, ball, ball_to_dot, build_model, validate_hypotheses,
                   variant_name)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_HYPOTHESIS = 2
EXIT_PARSE = 3
EXIT_CONSISTENCY = 4


@dataclass
class AnalyzeOptions:
    emit_matrix: bool = False
    emit_ball: Optional[int] = None
    k: Optional[int] = None
    tree_model: Optional[str] = None
    max_l1_check: int = 3


@dataclass
class Report:
    """Analysis outcome; ``data`` is JSON-ready and ordered for stable output."""

    data: dict
    exit_code: int = EXIT_OK
    timings: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return self.data["status"]

    def to_dict(self, include_timings: bool = True) -> dict:
        out = dict(self.data)
        out["exit_code"] = self.exit_code
        if include_timings:
            out["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return out


class _Clock:
    def __init__(self):
        self.timings = {}

    def __call__(self, name):
        clock = self

        class _Span:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                clock.timings[name] = clock.timings.get(name, 0.0) + time.perf_counter() - self.t0
        return _Span()


def _source(src) -> SpecSource:
    if isinstance(src, SpecSource):
        return src
    if isinstance(src, Path):
        return SpecSource.from_bytes(src.read_bytes(), str(src))
    if isinstance(src, bytes):
        return SpecSource.from_bytes(src)
    return SpecSource(src)


def _group_summary(G: FiniteGroup) -> dict:
    return {"order": G.order, "abelian": G.is_abelian(), "cyclic": G.is_cyclic()}


def _error(exc) -> dict:
    out = {"message": str(exc)}
    if isinstance(exc, HypothesisError):
        out["reasons"] = list(exc.reasons)
    return out


def _compare_pointed(a: PointedGroup, b: PointedGroup):
    try:
        return pointed_isomorphic(a, b)
    except BoundError:
        return None


def _closed_forms(action, est: BoundaryKTheory) -> dict:
    """Closed-form predictions for two cyclic factors and for equal-order factors."""
    out = {}
    if isinstance(action, Amalgam):
        return out
    factors = action.factors
    computed = est.k0_
    unit = est.identity_class_.unit
    eps = est.identity_class_.epsilon
    orders = [G.order for G in factors]
    if len(factors) == 2 and all(G.is_cyclic() for G in factors):
        l, m = orders[0] - 1, orders[1] - 1
        if l * m >= 2:
            group, claimed = reference_formula_51(l, m)
            claim = PointedGroup(group, claimed)
            entry = {
                "l": l,
                "m": m,
                "k0_expected": group.to_dict(),
                "k0_matches": group == computed and est.k1_rank_ == 0,
                "claimed_unit": {"value": l + m, "reduced": list(claim.point)},
                "claimed_label": classify(claim, 0).pointed,
                "computed_label": est.classification_.pointed,
            }
            if entry["k0_matches"]:
                entry["unit_pointed_isomorphic"] = _compare_pointed(unit, claim)
                entry["epsilon_pointed_isomorphic"] = _compare_pointed(eps, claim)
            else:
                entry["unit_pointed_isomorphic"] = None
                entry["epsilon_pointed_isomorphic"] = None
            out["two_cyclic_factors"] = entry
    if len(set(orders)) == 1:
        n, gamma = len(orders), orders[0] - 1
        if gamma >= 1 and (n, gamma) != (2, 1):
            group = reference_formula_52(n, gamma)
            out["equal_order_factors"] = {
                "n": n,
                "gamma": gamma,
                "k0_expected": group.to_dict(),
                "k0_matches": group == computed and est.k1_rank_ == 0,
            }
    return out


def analyze(src, options: Optional[AnalyzeOptions] = None) -> Report:
    """Run parse, model, hypotheses, alphabet, K-theory and classification.

    The pipeline stops at the first hard failure and returns the partial
    report with the matching exit code: 2 for a hypothesis or bound
    violation, 3 for a parse error, 4 for disagreeing computations.
    """
    opts = options or AnalyzeOptions()
    clock = _Clock()
    data = {"schema": SCHEMA_VERSION, "status": "ok"}

    def stop(status, code, **extra):
        data["status"] = status
        data.update(extra)
        return Report(data, code, clock.timings)

    try:
        with clock("read"):
            source = _source(src)
    except SpecError as exc:
        data["input"] = {"filename": exc.filename}
        return stop("parse_error", EXIT_PARSE,
                    diagnostics=[d.to_dict() for d in exc.diagnostics],
                    error={"message": str(exc)})
    data["input"] = {
        "filename": source.filename,
        "sha256": hashlib.sha256(source.text.encode("utf-8")).hexdigest(),
        "text": source.text,
    }
    data["options"] = {"k": opts.k, "tree_model": opts.tree_model,
                       "max_l1_check": opts.max_l1_check}

    try:
        with clock("parse"):
            action, settings = load_spec(source, opts.tree_model, opts.k)
    except SpecError as exc:
        return stop("parse_error", EXIT_PARSE,
                    diagnostics=[d.to_dict() for d in exc.diagnostics],
                    error={"message": str(exc)})

    try:
        with clock("model"):
            model = build_model(action, strict=False)
            hyp = validate_hypotheses(model)
    except HypothesisError as exc:
        return stop("hypothesis_failure", EXIT_HYPOTHESIS, error=_error(exc))

    data["model"] = {
        "variant": variant_name(action),
        "geometry": model.geometry,
        "factors": [_group_summary(G) for G in model.factors],
        "amalgamated_order": model.sub.order,
        "k_min": model.k_min,
        "k": model.k_min,
        "degrees": {v.label(): model.degrees[v.site] for v in model.fundamental_vertices},
    }
    data["hypotheses"] = hyp.to_dict()
    if not hyp.passed:
        first = hyp.failures[0]
        return stop("hypothesis_failure", EXIT_HYPOTHESIS,
                    error={"message": first.get("detail", first["reason"]),
                           "reasons": hyp.reasons()})

    if settings.k is not None and settings.k < model.k_min:
        return stop("hypothesis_failure", EXIT_HYPOTHESIS,
                    error={"message": f"k = {settings.k} is below k_min = {model.k_min}",
                           "reasons": ["k_below_k_min"]})

    if opts.emit_ball is not None:
        try:
            with clock("ball"):
                b = ball(model, model.fundamental_vertices[0], opts.emit_ball)
        except BoundError as exc:
            return stop("bound_exceeded", EXIT_HYPOTHESIS, error={"message": str(exc)})
        data["ball"] = {"center": b.center.label(), "radius": b.radius,
                        "vertices": len(b.vertices), "edges": len(b.edges),
                        "dot": ball_to_dot(b)}

    est = BoundaryKTheory(k=None, max_l1_check=opts.max_l1_check)
    try:
        with clock("pipeline"):
            est.fit(model)
    except HypothesisError as exc:
        return stop("hypothesis_failure", EXIT_HYPOTHESIS, error=_error(exc))
    except ConsistencyError as exc:
        return stop("consistency_failure", EXIT_CONSISTENCY, error={"message": str(exc)})

    data["alphabet_size"] = len(est.alphabet_)
    if opts.emit_matrix:
        data["matrix"] = {"convention": "rows[b][a] = 1 iff letter b follows letter a",
                          "rows": est.transition_matrix_.tolist(),
                          "legend": est.alphabet_.legend()}
    data["h2"] = est.h2_.ok
    data["h3"] = est.h3_.ok
    data["orbit_word_counts"] = est.orbit_words_
    data["k0"] = {**est.k0_.to_dict(), "text": str(est.k0_)}
    data["k1_rank"] = est.k1_rank_
    ic = est.identity_class_
    units = [{"base": d.base.label(), "multiplicities": list(d.multiplicities),
              "point": list(u.point)} for d, u in zip(est.decorations_, est.unit_classes_)]
    data["identity_class"] = {
        "epsilon": list(ic.epsilon.point),
        "decorated_units": units,
        "oracle_agrees": ic.oracle_agrees,
        "oracle": ic.oracle,
        "units_agree": est.units_agree(),
    }
    data["classification"] = est.classification_.to_dict()
    data["closed_forms"] = _closed_forms(action, est)

    failures = []
    if any(row["holds"] is False for row in est.orbit_words_):
        failures.append("orbit counts differ from word counts")
    if est.units_agree() is False:
        failures.append("decorated unit classes differ between base vertices")

    if settings.k is not None and settings.k > model.k_min:
        rerun = BoundaryKTheory(k=settings.k, max_l1_check=0)
        try:
            with clock("robustness"):
                rerun.fit(model)
        except HypothesisError as exc:
            return stop("hypothesis_failure", EXIT_HYPOTHESIS, error=_error(exc))
        except ConsistencyError as exc:
            return stop("consistency_failure", EXIT_CONSISTENCY, error={"message": str(exc)})
        same_group = rerun.k0_ == est.k0_ and rerun.k1_rank_ == est.k1_rank_
        unit_iso = (_compare_pointed(rerun.identity_class_.unit, ic.unit)
                    if same_group else False)
        data["robustness"] = {
            "k": settings.k,
            "alphabet_size": len(rerun.alphabet_),
            "k0": rerun.k0_.to_dict(),
            "k1_rank": rerun.k1_rank_,
            "unit": list(rerun.identity_class_.unit.point),
            "same_invariants": same_group,
            "unit_pointed_isomorphic": unit_iso,
        }
        if not same_group or unit_iso is False:
            failures.append(f"invariants change between k = {model.k_min} and k = {settings.k}")

    if failures:
        return stop("consistency_failure", EXIT_CONSISTENCY, error={"message": "; ".join(failures)})
    return Report(data, EXIT_OK, clock.timings)


def _text(report: Report) -> str:
    d = report.to_dict()
    lines = [f"file: {d['input'].get('filename', '<input>')}", f"status: {d['status']}"]
    if "diagnostics" in d:
        lines.extend(d["error"]["message"].splitlines())
    elif "error" in d:
        lines.append(f"error: {d['error']['message']}")
        if d["error"].get("reasons"):
            lines.append("reasons: " + ", ".join(d["error"]["reasons"]))
    if "model" in d:
        m = d["model"]
        orders = ", ".join(str(f["order"]) for f in m["factors"])
        lines.append(f"model: {m['variant']} ({m['geometry']}), factor orders [{orders}], "
                     f"amalgamated order {m['amalgamated_order']}, k = {m['k']}")
        lines.append("degrees: " + ", ".join(f"{k}={v}" for k, v in m["degrees"].items()))
    if "hypotheses" in d:
        checks = d["hypotheses"]["checks"]
        lines.append("hypotheses: " + ", ".join(f"{k}={'yes' if v else 'no'}"
                                                for k, v in checks.items()))
    if "ball" in d:
        b = d["ball"]
        lines.append(f"ball: radius {b['radius']} around {b['center']}, "
                     f"{b['vertices']} vertices")
        lines.append(b["dot"].rstrip("\n"))
    if "alphabet_size" in d:
        lines.append(f"alphabet size: {d['alphabet_size']}")
    if "matrix" in d:
        for i, label in enumerate(d["matrix"]["legend"]):
            lines.append(f"  letter {i}: {label}")
        lines.append("transition matrix (rows: next letter, columns: current letter):")
        for row in d["matrix"]["rows"]:
            lines.append("  " + " ".join(map(str, row)))
    if "h2" in d:
        lines.append(f"irreducible: {d['h2']}, aperiodic: {d['h3']}")
    if "orbit_word_counts" in d:
        parts = [f"m={r['m']}: {r['orbits']} orbits / {r['words']} words" for r in d["orbit_word_counts"]]
        lines.append("orbit-word counts: " + "; ".join(parts))
    if "k0" in d:
        lines.append(f"K0: {d['k0']['text']}")
        lines.append(f"K1 rank: {d['k1_rank']}")
    if "identity_class" in d:
        ic = d["identity_class"]
        lines.append(f"all-ones class: {ic['epsilon']}")
        for u in ic["decorated_units"]:
            lines.append(f"unit class at {u['base']}: {u['point']}")
        lines.append(f"oracle agrees: {ic['oracle_agrees']}, units agree: {ic['units_agree']}")
    if "classification" in d:
        c = d["classification"]
        lines.append(f"classification: {c['pointed']} ({c['stable']})")
    for name, entry in d.get("closed_forms", {}).items():
        text = f"closed form [{name}]: K0 matches = {entry['k0_matches']}"
        if "claimed_unit" in entry:
            text += (f", claimed unit {entry['claimed_unit']['value']} ({entry['claimed_label']}),"
                     f" pointed-isomorphic to computed unit = {entry['unit_pointed_isomorphic']}")
        lines.append(text)
    if "robustness" in d:
        r = d["robustness"]
        lines.append(f"rerun at k = {r['k']}: alphabet {r['alphabet_size']}, same invariants = "
                     f"{r['same_invariants']}, unit pointed-isomorphic = "
                     f"{r['unit_pointed_isomorphic']}")
    return "\n".join(lines) + "\n"


def emit(report: Report, format: str = "text", include_timings: bool = True) -> bytes:
    """Render a report as text or JSON (keys in a fixed order)."""
    if format == "json":
        payload = report.to_dict(include_timings)
        return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if format == "text":
        return _text(report).encode("utf-8")
    raise ValueError(f"unknown format {format!r}")
