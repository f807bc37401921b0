"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 incomparable
assignments (different outcome spaces or dimensions), 4 an observation that
is impossible for the agent being updated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import classical as cl
from . import quantum as qm
from . import scenarios as sc
from .errors import (
    BadConfig,
    DimMismatch,
    EpistemicError,
    Incompatible,
    SpaceMismatch,
    ZeroEvidence,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCOMPARABLE = 3
EXIT_ZERO_EVIDENCE = 4

ZERO_EVIDENCE_MSG = "impossible evidence for this agent"

QUBIT_LABELS = ("00", "01", "10", "11")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --- value formatting -------------------------------------------------------------


def _num(x) -> float:
    x = float(x)
    return 0.0 if x == 0.0 else x  # drop the sign of negative zero


def _vec(values) -> list[float]:
    return [_num(v) for v in np.asarray(values, dtype=float)]


def _mat(m) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=np.complex128)
    return [[[_num(z.real), _num(z.imag)] for z in row] for row in m]


def dumps(obj: Any) -> str:
    """Deterministic JSON: insertion-ordered keys, shortest round-trip floats."""
    return json.dumps(obj, indent=2, ensure_ascii=True, allow_nan=False) + "\n"


def dist_json(d: cl.ProbDist) -> dict:
    return {"labels": list(d.space.labels), "probs": _vec(d.probs)}


def state_json(s: qm.DensityOperator) -> list:
    return _mat(s.matrix)


# --- angles -------------------------------------------------------------------------

_PI_RE = re.compile(r"^([+-]?)(\d+(?:\.\d*)?|\.\d+)?\*?pi(?:/(\d+(?:\.\d*)?|\.\d+))?$")


def parse_angle(text: str) -> float:
    """Parse radians, accepting ``pi`` multiples such as ``pi/2``, ``-3pi/4`` or ``2*pi``."""
    raw = text.strip().lower().replace(" ", "")
    m = _PI_RE.match(raw)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        if den == 0:
            raise argparse.ArgumentTypeError(f"invalid angle {text!r}")
        return sign * num * math.pi / den
    try:
        value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}")
    return value


def parse_weights(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid weight list {text!r}") from None


# --- state files -----------------------------------------------------------------


def state_file_dict(obj: cl.ProbDist | qm.DensityOperator, labels: Sequence[str] | None = None) -> dict:
    if isinstance(obj, cl.ProbDist):
        return {"kind": "classical", "labels": list(obj.space.labels), "data": _vec(obj.probs)}
    if labels is None:
        labels = QUBIT_LABELS if obj.dim == 4 else [str(i) for i in range(obj.dim)]
    return {"kind": "quantum", "labels": list(labels), "data": state_json(obj)}


def parse_state(doc: Any) -> cl.ProbDist | qm.DensityOperator:
    """Turn a StateFile document into a ``ProbDist`` or ``DensityOperator``.

    Raises:
        BadConfig: malformed document or values violating the type's invariants.
    """
    if not isinstance(doc, dict) or set(doc) != {"kind", "labels", "data"}:
        raise BadConfig('state file must be an object with keys "kind", "labels", "data"')
    kind, labels, data = doc["kind"], doc["labels"], doc["data"]
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise BadConfig("labels must be a list of strings")
    try:
        if kind == "classical":
            if not isinstance(data, list) or len(data) != len(labels):
                raise BadConfig("classical data must list one probability per label")
            return cl.ProbDist(cl.OutcomeSpace(tuple(labels)), [float(x) for x in data])
        if kind == "quantum":
            arr = np.asarray(data, dtype=float)
            n = len(labels)
            if arr.shape == (n, n, 2):
                pass
            elif arr.shape == (n * n, 2):
                arr = arr.reshape(n, n, 2)
            else:
                raise BadConfig(f"quantum data must be {n}x{n} [re, im] pairs, got shape {arr.shape}")
            return qm.DensityOperator(arr[..., 0] + 1j * arr[..., 1])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BadConfig):
            raise
        raise BadConfig(f"invalid state: {exc}") from exc
    raise BadConfig(f"kind must be 'classical' or 'quantum', got {kind!r}")


def load_state(path: str) -> cl.ProbDist | qm.DensityOperator:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BadConfig(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadConfig(f"{path}: invalid JSON ({exc.msg})") from exc
    return parse_state(doc)


# --- command bodies (return JSON-able dicts) ----------------------------------------


def _verdict(v: sc.Verdict):
    return v


def scenario_report(res: sc.ScenarioResult) -> dict:
    out: dict[str, Any] = {
        "scenario": res.config.variant,
        "params": {k: _num(res.config.params[k]) for k in sorted(res.config.params)},
        "wigner_labels": list(res.wigner_dist.space.labels),
        "wigner_dist": _vec(res.wigner_dist.probs),
        "friend_labels": list(res.friend_dist.space.labels),
        "friend_dist": _vec(res.friend_dist.probs),
        "classical_compatible": _verdict(res.classical_compatible),
        "quantum_compatible": _verdict(res.quantum_compatible),
        "wigner_state": state_json(res.wigner_state),
        "friend_state": state_json(res.friend_state),
    }
    if res.wigner_right_dist is not None:
        out["wigner_right_dist"] = _vec(res.wigner_right_dist.probs)
        out["wigner_right_state"] = state_json(res.wigner_right_state)
        out["pairwise"] = dict(res.pairwise)
    return out


def _config(variant: str, args) -> sc.ScenarioConfig:
    return sc.ScenarioConfig.with_defaults(
        variant,
        phi=getattr(args, "phi", None),
        omega_t=getattr(args, "omega_t", None),
        epsilon=getattr(args, "epsilon", None),
        phi_left=getattr(args, "phi_left", None),
        phi_right=getattr(args, "phi_right", None),
    )


def _format_scenario(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(report)
    rows = []
    w_labels, f_labels = report["wigner_labels"], report["friend_labels"]
    labels = list(dict.fromkeys(w_labels + f_labels))
    for lab in labels:
        w = report["wigner_dist"][w_labels.index(lab)] if lab in w_labels else ""
        f = report["friend_dist"][f_labels.index(lab)] if lab in f_labels else ""
        r = ""
        if "wigner_right_dist" in report:
            r = report["wigner_right_dist"][w_labels.index(lab)] if lab in w_labels else ""
        rows.append([lab, w, f] + ([r] if "wigner_right_dist" in report else []))
    header = ["outcome", "wigner", "friend"] + (["wigner_right"] if "wigner_right_dist" in report else [])
    verdicts = [
        ["classical_compatible", report["classical_compatible"]],
        ["quantum_compatible", report["quantum_compatible"]],
    ] + [[k, v] for k, v in report.get("pairwise", {}).items()]

    def cell(x):
        if x is None:
            return "n/a"
        if isinstance(x, bool):
            return "true" if x else "false"
        return repr(x) if isinstance(x, float) else str(x)

    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([[cell(x) for x in row] for row in rows])
        w.writerow([])
        w.writerow(["verdict", "value"])
        w.writerows([[k, cell(v)] for k, v in verdicts])
        return buf.getvalue()

    table = [header] + [[cell(x) for x in row] for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = [f"scenario: {report['scenario']}"]
    if report["params"]:
        lines.append("params: " + ", ".join(f"{k}={v!r}" for k, v in report["params"].items()))
    for row in table:
        lines.append("  ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip())
    kw = max(len(k) for k, _ in verdicts)
    lines += [f"{k.ljust(kw)}  {cell(v)}" for k, v in verdicts]
    return "\n".join(lines) + "\n"


def compat_report(a, b) -> dict:
    if isinstance(a, cl.ProbDist) != isinstance(b, cl.ProbDist):
        raise SpaceMismatch("cannot compare a classical assignment with a quantum one")
    if isinstance(a, cl.ProbDist):
        common = cl.common_support(a, b)
        return {"kind": "classical", "compatible": bool(common), "common_support": common}
    rank = qm.intersection_rank(a, b)
    return {"kind": "quantum", "compatible": rank >= 1, "common_support": rank}


def pool_report(method: str, weights, epsilon) -> dict:
    pooled = sc.run_pooling(method, weights, epsilon)
    out: dict[str, Any] = {"method": method}
    if weights is not None:
        out["weights"] = _vec(weights)
    if epsilon is not None:
        out["epsilon"] = _num(epsilon)
    out["labels"] = list(pooled.space.labels)
    out["result"] = _vec(pooled.probs)
    return out


def improve_report(case_id: str, epsilon) -> dict:
    res = sc.run_improvement(case_id, epsilon)
    out: dict[str, Any] = {"case": case_id, "decision_maker": res.decision_maker, "expert": res.expert}
    if epsilon is not None:
        out["epsilon"] = _num(epsilon)
    if isinstance(res.posterior, cl.ProbDist):
        out["kind"] = "classical"
        out["labels"] = list(res.posterior.space.labels)
        out["result"] = _vec(res.posterior.probs)
    else:
        out["kind"] = "quantum"
        out["labels"] = list(QUBIT_LABELS)
        out["result"] = state_json(res.posterior)
    return out


def update_report(cfg: sc.ScenarioConfig, mode: str, outcome: str, agent: str) -> dict:
    res = sc.run_reconciliation(cfg, mode, outcome)
    post = res.wigner if agent == "wigner" else res.friend
    if isinstance(post, ZeroEvidence):
        raise post
    out: dict[str, Any] = {
        "scenario": cfg.variant,
        "params": {k: _num(cfg.params[k]) for k in sorted(cfg.params)},
        "mode": mode,
        "outcome": outcome,
        "agent": agent,
    }
    if isinstance(post, cl.ProbDist):
        out["labels"] = list(post.space.labels)
        out["result"] = _vec(post.probs)
    else:
        out["labels"] = list(QUBIT_LABELS)
        out["result"] = state_json(post)
    return out


# --- goldens ------------------------------------------------------------------------


def _row(row_id: str, params: dict, output: Any) -> dict:
    return {"id": row_id, "params": params, "output": output}


def _scenario_table() -> list[dict]:
    cases = [
        ("canonical", {}),
        ("wrong_initial", {}),
        ("not_gate", {}),
        ("time_evolution", {"omega_t": 0.0}),
        ("time_evolution", {"omega_t": math.pi / 2}),
        ("time_evolution", {"omega_t": math.pi}),
        ("phase", {"phi": 0.0}),
        ("phase", {"phi": math.pi}),
        ("two_wigners", {"phi_left": 0.0, "phi_right": math.pi}),
        ("benefit_of_doubt", {"epsilon": 0.01}),
        ("ignorant_wigner", {}),
    ]
    rows = []
    for name, params in cases:
        rep = scenario_report(sc.run_scenario(sc.ScenarioConfig(name, params)))
        out = {k: v for k, v in rep.items() if k not in ("scenario", "params")}
        rows.append(_row(name, rep["params"], out))
    return rows


def _reconciliation_table() -> list[dict]:
    cfg = sc.ScenarioConfig("canonical")
    rows = []
    for mode in ("classical", "quantum"):
        for outcome in ("0", "1"):
            res = sc.run_reconciliation(cfg, mode, outcome)
            out = {}
            for agent, post in (("wigner", res.wigner), ("friend", res.friend)):
                if isinstance(post, ZeroEvidence):
                    out[agent] = "ZeroEvidence"
                elif isinstance(post, cl.ProbDist):
                    out[agent] = _vec(post.probs)
                else:
                    out[agent] = state_json(post)
            rows.append(_row(f"canonical/{mode}/X={outcome}", {"mode": mode, "outcome": outcome}, out))
    return rows


def _improvement_table() -> list[dict]:
    rows = []
    for case in sc.IMPROVEMENT_CASES:
        eps_values = (0.01, 0.1, 0.3) if case in sc._NEEDS_EPSILON else (None,)
        for eps in eps_values:
            rep = improve_report(case, eps)
            params = {} if eps is None else {"epsilon": eps}
            rows.append(_row(case, params, rep["result"]))
    return rows


def _pooling_table() -> list[dict]:
    rows = []
    for method, weights in (("supra", None), ("linear", (0.5, 0.5)), ("linear", (0.1, 0.9)), ("multiplicative", (0.5, 0.5))):
        rep = pool_report(method, weights, None)
        params = {} if weights is None else {"weights": _vec(weights)}
        rows.append(_row(method, params, rep["result"]))
    return rows


def _joint_table() -> list[dict]:
    w_dist = sc.stubborn_wigner_dist()
    f_dist = sc.canonical_friend_dist()
    joint = cl.construct_objective_joint(f_dist, w_dist)
    classical = _row(
        "objective_joint",
        {},
        {
            "mixing": _vec(joint.mixing),
            "joint": _vec(joint.flat()),
            "friend_given_F0": _vec(cl.recover_friend(joint).probs),
            "wigner_given_W0": _vec(cl.recover_wigner(joint).probs),
        },
    )
    h = qm.construct_hybrid_joint(sc.friend_state(), sc.wigner_canonical_state())
    branches = {}
    for (f, w), br in h.branches.items():
        branches[f"F={f},W={w}"] = {"weight": _num(br.weight), "state": state_json(br.state)}
    hybrid = _row(
        "hybrid_joint",
        {},
        {
            "mixing": _vec(h.mixing),
            "branches": branches,
            "friend_given_F0": state_json(qm.hybrid_condition(h, "F", "0")),
            "wigner_given_W0": state_json(qm.hybrid_condition(h, "W", "0")),
        },
    )
    return [classical, hybrid]


GOLDEN_TABLES = {
    "scenarios.json": _scenario_table,
    "reconciliation.json": _reconciliation_table,
    "improvement.json": _improvement_table,
    "pooling.json": _pooling_table,
    "joints.json": _joint_table,
}


def write_goldens(out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in GOLDEN_TABLES.items():
        path = out / name
        path.write_text(dumps({"rows": build()}), encoding="utf-8", newline="\n")
        written.append(path)
    return written


# --- argument parsing ----------------------------------------------------------------


def _add_scenario_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--phi", type=parse_angle, help="relative phase (radians; 'pi' aliases allowed)")
    p.add_argument("--omega-t", dest="omega_t", type=parse_angle, help="dimensionless phase omega*t")
    p.add_argument("--epsilon", type=float, help="noise strength in (1e-6, 0.5)")
    p.add_argument("--phi-left", dest="phi_left", type=parse_angle, help="left Wigner's phase")
    p.add_argument("--phi-right", dest="phi_right", type=parse_angle, help="right Wigner's phase")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epistemic-qm",
        description="Compatibility, reconciliation and pooling of agents' assignments in Wigner's-Friend scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", help="run a scenario variant")
    p.add_argument("name", help=f"one of: {', '.join(sc.VARIANTS)}")
    _add_scenario_params(p)
    p.add_argument("--format", choices=("json", "csv", "table"), default="json")

    p = sub.add_parser("compat", help="check compatibility of two state files")
    p.add_argument("file_a")
    p.add_argument("file_b")

    p = sub.add_parser("pool", help="pool the canonical Wigner and Friend assignments")
    p.add_argument("method", choices=sc.POOLING_METHODS)
    p.add_argument("--w", type=parse_weights, help="comma-separated weights (Wigner, Friend)")
    p.add_argument("--epsilon", type=float, help="use the open-minded Wigner with this epsilon")

    p = sub.add_parser("improve", help="run an improvement case")
    p.add_argument("case", choices=sc.IMPROVEMENT_CASES)
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("update", help="condition one agent on a reconciliation outcome")
    p.add_argument("mode", choices=("classical", "quantum"))
    p.add_argument("--outcome", required=True, choices=cl.BINARY_LABELS)
    p.add_argument("--agent", required=True, choices=("wigner", "friend"))
    p.add_argument("--scenario", default="canonical", help="scenario variant (default: canonical)")
    _add_scenario_params(p)

    p = sub.add_parser("state", help="write an agent's assignment as a state file")
    p.add_argument("scenario", help="scenario variant")
    p.add_argument("--agent", required=True, choices=("wigner", "friend"))
    p.add_argument("--kind", required=True, choices=("classical", "quantum"))
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    _add_scenario_params(p)

    p = sub.add_parser("goldens", help="write the reference value tables")
    p.add_argument("out_dir")
    return parser


def _run(args) -> str:
    if args.command == "scenario":
        res = sc.run_scenario(_config(args.name, args))
        return _format_scenario(scenario_report(res), args.format)
    if args.command == "compat":
        a, b = load_state(args.file_a), load_state(args.file_b)
        return dumps(compat_report(a, b))
    if args.command == "pool":
        return dumps(pool_report(args.method, args.w, args.epsilon))
    if args.command == "improve":
        return dumps(improve_report(args.case, args.epsilon))
    if args.command == "update":
        cfg = _config(args.scenario, args)
        try:
            return dumps(update_report(cfg, args.mode, args.outcome, args.agent))
        except Incompatible as exc:
            raise BadConfig(f"no reconciliation experiment exists: {exc}") from exc
    if args.command == "state":
        res = sc.run_scenario(_config(args.scenario, args))
        if args.kind == "classical":
            obj = res.wigner_dist if args.agent == "wigner" else res.friend_dist
        else:
            obj = res.wigner_state if args.agent == "wigner" else res.friend_state
        text = dumps(state_file_dict(obj))
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8", newline="\n")
            return ""
        return text
    if args.command == "goldens":
        for path in write_goldens(args.out_dir):
            print(path, file=sys.stderr)
        return ""
    raise BadConfig(f"unknown command {args.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        out = _run(args)
    except ZeroEvidence as exc:
        print(f"error: {ZERO_EVIDENCE_MSG} ({exc})", file=sys.stderr)
        return EXIT_ZERO_EVIDENCE
    except (SpaceMismatch, DimMismatch) as exc:
        print(f"error: incomparable assignments: {exc}", file=sys.stderr)
        return EXIT_INCOMPARABLE
    except EpistemicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:  # e.g. a malformed tolerance override
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
