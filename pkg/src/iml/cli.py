"""Batch experiment driver: config, subcommands, CSV/JSON reports.

Config is flat key-value text with dotted sections (search.*, higher.*,
schedule.*, curve.*, example3.*, verify.*); every default is embedded
and printable with --print-defaults.  Numbers serialize at 12
significant digits, so reports are byte-stable across runs and worker
counts (results are assembled by index, never by completion order).

Exit status: 0 all checks pass, 1 a verify check failed, 2 config or
argument parse error, 3 domain construction error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .curves import (distance_length_ladder, example3_chain_experiment,
                     length_by_metric, segment)
from .derivatives import (ShrinkSchedule, derivative_estimate, kmap_for,
                          prop2_check, theorem1_check)
from .discs import (AnalyticDisc, MetricEstimate, SearchConfig,
                    kobayashi_royden_upper, lempert_tanh, lempert_upper,
                    linear_lempert_upper)
from .geometry import DomainModel, make_model_domain, sample_interior
from .higher import (HigherConfig, make_hull_functional, mth_kobayashi,
                     oracle_metric)
from .oracles import _descriptor, _gauge_of, kappa_map, lempert_map, oracle_kappa


class ConfigError(ValueError):
    """Malformed config text or option values (exit status 2)."""


class DomainError(ValueError):
    """Domain descriptor that fails to construct (exit status 3)."""


@dataclass(frozen=True)
class CurveParams:
    partitions: int = 16
    quadrature: int = 129


@dataclass(frozen=True)
class Example3Run:
    t0: float = 0.0
    t1: float = 1.0
    K: int = 200
    J: int = 60


@dataclass(frozen=True)
class VerifyParams:
    cases: int = 6
    m: int = 2


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str = "unit-disc"
    seed: int = 0
    format: str = "csv"
    out: str = ""
    m: int = 2
    search: SearchConfig = SearchConfig()
    higher: HigherConfig = HigherConfig()
    schedule: ShrinkSchedule = ShrinkSchedule()
    curve: CurveParams = CurveParams()
    example3: Example3Run = Example3Run()
    verify: VerifyParams = VerifyParams()


_SECTIONS = ("search", "higher", "schedule", "curve", "example3", "verify")


def config_lines(cfg: ExperimentConfig) -> list:
    """The flat key-value rendering of a config, defaults included."""
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name in _SECTIONS:
            for sf in fields(v):
                out.append(f"{f.name}.{sf.name} = {getattr(v, sf.name)}")
        else:
            out.append(f"{f.name} = {v}")
    return out


def _coerce(text: str, target):
    if isinstance(target, bool):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(target, int):
        return int(text)
    if isinstance(target, float):
        return float(text)
    return text.strip()


def parse_config_text(text: str) -> dict:
    """Flat `key = value` lines; # comments; returns {dotted key: raw str}."""
    out = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {ln}: empty key")
        out[key] = val
    return out


def apply_config(cfg: ExperimentConfig, flat: dict) -> ExperimentConfig:
    sections = {s: dict() for s in _SECTIONS}
    top = {}
    valid_top = {f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name not in _SECTIONS}
    for key, val in flat.items():
        if "." in key:
            sec, _, name = key.partition(".")
            if sec not in sections:
                raise ConfigError(f"unknown config section {sec!r}")
            obj = getattr(cfg, sec)
            cur = {f.name: getattr(obj, f.name) for f in fields(obj)}
            if name not in cur:
                raise ConfigError(f"unknown key {key!r}")
            try:
                sections[sec][name] = _coerce(val, cur[name])
            except ValueError as e:
                raise ConfigError(f"bad value for {key!r}: {e}") from None
        else:
            if key not in valid_top:
                raise ConfigError(f"unknown key {key!r}")
            try:
                top[key] = _coerce(val, valid_top[key])
            except ValueError as e:
                raise ConfigError(f"bad value for {key!r}: {e}") from None
    try:
        for sec, kv in sections.items():
            if kv:
                top[sec] = replace(getattr(cfg, sec), **kv)
        return replace(cfg, **top)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _seeded(cfg: ExperimentConfig) -> ExperimentConfig:
    """Propagate the top-level seed into the nested search/higher configs."""
    return replace(cfg,
                   search=replace(cfg.search, seed=cfg.seed),
                   higher=replace(cfg.higher, seed=cfg.seed))


def parse_domain(spec: str) -> dict:
    """`kind` or `kind:key=val;key=val`; comma lists inside values."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if not kind:
        raise ConfigError("empty domain descriptor")
    desc = {"kind": kind}
    if rest:
        for pair in rest.split(";"):
            if "=" not in pair:
                raise ConfigError(f"bad domain option {pair!r} (expected key=val)")
            key, _, val = pair.partition("=")
            key, val = key.strip(), val.strip()
            if "," in val:
                try:
                    desc[key] = [float(v) for v in val.split(",")]
                except ValueError:
                    raise ConfigError(f"bad list value for domain option {key!r}") from None
            else:
                for cast in (int, float):
                    try:
                        desc[key] = cast(val)
                        break
                    except ValueError:
                        continue
                else:
                    desc[key] = val
    return desc


def build_domain(spec: str) -> DomainModel:
    desc = parse_domain(spec)
    try:
        return make_model_domain(desc)
    except (ValueError, TypeError) as e:
        raise DomainError(str(e)) from None


def parse_cvec(text: str, what: str) -> np.ndarray:
    try:
        return np.asarray([complex(p.strip().replace(" ", "")) for p in text.split(",")],
                          dtype=complex)
    except ValueError:
        raise ConfigError(f"bad {what}: {text!r} (expected comma-separated complex "
                          "numbers like 0.3+0.2j,-0.5j)") from None


def fmt_num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (complex, np.complexfloating)):
        x = complex(x)
        return f"{x.real:.12g}{x.imag:+.12g}j"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def fmt_cell(v) -> str:
    if isinstance(v, np.ndarray) or isinstance(v, (list, tuple)):
        return " ".join(fmt_num(x) for x in np.asarray(v).ravel())
    return fmt_num(v)


def _witness_str(w) -> str:
    if isinstance(w, AnalyticDisc):
        return (f"disc deg={w.degree} center=[{fmt_cell(w.center)}] "
                f"coeffs=[{'; '.join(fmt_cell(c) for c in w.coeffs)}]")
    if w is None:
        return ""
    if hasattr(w, "parts"):
        return f"parts=[{'; '.join(fmt_cell(p) for p in np.asarray(w.parts))}]"
    if hasattr(w, "points"):
        return f"chain=[{'; '.join(fmt_cell(p) for p in np.asarray(w.points))}]"
    return str(w)


def _rows_to_csv(rows: list, columns: list) -> str:
    lines = [",".join(columns)]
    for r in rows:
        cells = []
        for c in columns:
            cell = fmt_cell(r.get(c, ""))
            if "," in cell or '"' in cell:
                cell = '"' + cell.replace('"', '""') + '"'
            cells.append(cell)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _rows_to_json(command: str, rows: list, columns: list, passed: bool) -> str:
    def conv(v):
        if isinstance(v, (bool, np.bool_)):
            return bool(v)
        if isinstance(v, (int, np.integer)):
            return int(v)
        if isinstance(v, (float, np.floating)):
            return float(fmt_num(v))
        return fmt_cell(v)

    obj = {"command": command, "passed": bool(passed),
           "rows": [{c: conv(r.get(c, "")) for c in columns} for r in rows]}
    return json.dumps(obj, indent=2) + "\n"


def emit(command: str, rows: list, columns: list, cfg: ExperimentConfig,
         passed: bool = True) -> None:
    text = (_rows_to_csv(rows, columns) if cfg.format == "csv"
            else _rows_to_json(command, rows, columns, passed))
    if cfg.out and cfg.out != "-":
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def worker_count() -> int:
    env = os.environ.get("IML_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"IML_THREADS must be an integer, got {env!r}") from None
    return min(4, os.cpu_count() or 1)


def suite_map(fn, items: list) -> list:
    """Order-preserving parallel map; results indexed, not completion-ordered."""
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _verify_cases(dom: DomainModel, count: int, seed: int):
    """Deterministic (z, X) case list; balanced domains stay at the origin."""
    g = np.random.default_rng([seed, 101])
    n = dom.dimension
    if dom.kind == "balanced":
        zs = np.zeros((count, n), dtype=complex)
    else:
        zs = sample_interior(dom, count, g, shrink=0.5)
    Xs = g.standard_normal((count, n)) + 1j * g.standard_normal((count, n))
    return list(zip(zs, Xs))


def cmd_metric(args, cfg: ExperimentConfig) -> int:
    dom = build_domain(args.domain or cfg.domain)
    z = parse_cvec(args.z, "--z")
    X = parse_cvec(args.X, "--X")
    est = kobayashi_royden_upper(dom, z, X, _seeded(cfg).search)
    row = {"domain": dom.kind, "z": z, "X": X, "value": est.value,
           "kind": est.kind, "witness": _witness_str(est.witness)}
    try:
        row["oracle"] = oracle_kappa(dom, z, X).value
    except ValueError:
        row["oracle"] = ""
    emit("metric", [row], ["domain", "z", "X", "value", "kind", "oracle", "witness"], cfg)
    return 0


def cmd_lempert(args, cfg: ExperimentConfig) -> int:
    dom = build_domain(args.domain or cfg.domain)
    z = parse_cvec(args.z, "--z")
    w = parse_cvec(args.w, "--w")
    est = lempert_upper(dom, z, w, _seeded(cfg).search)
    row = {"domain": dom.kind, "z": z, "w": w, "value": est.value,
           "kind": est.kind, "witness": _witness_str(est.witness)}
    lm = lempert_map(dom)
    row["oracle"] = lm(z, w) if lm is not None else ""
    emit("lempert", [row], ["domain", "z", "w", "value", "kind", "oracle", "witness"], cfg)
    return 0


def cmd_higher(args, cfg: ExperimentConfig) -> int:
    dom = build_domain(args.domain or cfg.domain)
    z = parse_cvec(args.z, "--z")
    X = parse_cvec(args.X, "--X")
    m = args.m or cfg.m
    scfg = _seeded(cfg)
    est = mth_kobayashi(oracle_metric(dom), z, X, m, scfg.higher)
    rows = [{"domain": dom.kind, "z": z, "X": X, "m": k, "value": v,
             "kind": est.kind if k == m else "ladder-level",
             "witness": _witness_str(est.witness) if k == m else ""}
            for k, v in sorted(est.meta["ladder"].items())]
    emit("higher", rows, ["domain", "z", "X", "m", "value", "kind", "witness"], cfg)
    return 0


def cmd_hull(args, cfg: ExperimentConfig) -> int:
    dom = build_domain(args.domain or cfg.domain)
    desc = _descriptor(dom)
    if desc.get("kind") != "balanced":
        raise DomainError("hull needs a balanced domain")
    h = _gauge_of(desc)
    hf = make_hull_functional(h, points=cfg.higher.hull_points)
    X = parse_cvec(args.X, "--X")
    rows = [{"domain": dom.kind, "X": X, "gauge": float(h(X)), "hull": float(hf(X)),
             "facets": 0 if hf.normals is None else int(hf.normals.shape[0])}]
    emit("hull", rows, ["domain", "X", "gauge", "hull", "facets"], cfg)
    return 0


def cmd_derivative(args, cfg: ExperimentConfig) -> int:
    dom = build_domain(args.domain or cfg.domain)
    z = parse_cvec(args.z, "--z")
    X = parse_cvec(args.X, "--X")
    m = args.m or cfg.m
    scfg = _seeded(cfg)
    kmap, _, _ = kmap_for(dom, m, z, X, scfg.higher)
    tr = derivative_estimate(kmap, z, X, scfg.schedule, dom=dom, seed=scfg.seed)
    rows = [{"domain": dom.kind, "z": z, "X": X, "m": m, "rho": r, "q_max": qx,
             "q_min": qn, "count": c} for r, qx, qn, c in tr.rows]
    rows.append({"domain": dom.kind, "z": z, "X": X, "m": m, "rho": 0.0,
                 "q_max": tr.upper_limit, "q_min": tr.lower_limit, "count": 0})
    emit("derivative", rows,
         ["domain", "z", "X", "m", "rho", "q_max", "q_min", "count"], cfg)
    return 0


def cmd_verify(args, cfg: ExperimentConfig) -> int:
    dom = build_domain(args.domain or cfg.domain)
    scfg = _seeded(cfg)
    cases = _verify_cases(dom, cfg.verify.cases, scfg.seed)
    m = args.m or cfg.verify.m

    if args.what == "prop2":
        def one(case):
            z, X = case
            return prop2_check(dom, z, X, m, scfg.schedule, scfg.higher, seed=scfg.seed)

        rows = suite_map(one, cases)
        cols = ["domain", "z", "X", "m", "lhs_kappa_m", "rhs_upper_quotient", "tol", "passed"]
    else:
        def one(case):
            z, X = case
            return theorem1_check(dom, z, X, m, scfg.schedule, scfg.higher, seed=scfg.seed)

        rows = suite_map(one, cases)
        cols = ["domain", "z", "X", "m", "kappa_m", "upper_limit", "lower_limit",
                "upper_extrapolated", "lower_extrapolated", "passed"]
    passed = all(r["passed"] for r in rows)
    emit(f"verify-{args.what}", rows, cols, cfg, passed=passed)
    return 0 if passed else 1


def cmd_example3(args, cfg: ExperimentConfig) -> int:
    p = cfg.example3
    t0 = p.t0 if args.t0 is None else args.t0
    t1 = p.t1 if args.t1 is None else args.t1
    K = args.K or p.K
    J = args.J or p.J
    try:
        dom = make_model_domain({"kind": "example3", "K": K, "J": J})
    except ValueError as e:
        raise DomainError(str(e)) from None
    rep = example3_chain_experiment(dom, t0, t1, _seeded(cfg).search)
    rows = [{"hop": i + 1, "from": h["from"], "to": h["to"],
             "lempert_star": h["lempert_star"], "bound": h["bound"], "kind": h["kind"]}
            for i, h in enumerate(rep["hops"])]
    rows.append({"hop": 0, "from": rep["points"][0], "to": rep["points"][-1],
                 "lempert_star": "", "bound": rep["total"], "kind": "total"})
    emit("example3", rows, ["hop", "from", "to", "lempert_star", "bound", "kind"], cfg)
    return 0


def cmd_curve_length(args, cfg: ExperimentConfig) -> int:
    dom = build_domain(args.domain or cfg.domain)
    z = parse_cvec(args.z, "--z")
    w = parse_cvec(args.w, "--w")
    seg = segment(z, w)
    scfg = _seeded(cfg)
    lm = lempert_map(dom)
    if lm is not None:
        dist = lambda A, B: np.arctanh(np.minimum(np.asarray(lm(A, B)), 1.0 - 1e-12))
        dkind = "oracle"
    else:
        def dist(a, b):
            return lempert_tanh(linear_lempert_upper(dom, a, b, scfg.search))
        dkind = "upper-bound"
    rows = [{"domain": dom.kind, "measure": f"distance-{dkind}", "resolution": p,
             "length": v} for p, v in distance_length_ladder(dist, seg, cfg.curve.partitions)]
    km = kappa_map(dom)
    if km is not None:
        rows.append({"domain": dom.kind, "measure": "metric-oracle",
                     "resolution": cfg.curve.quadrature,
                     "length": length_by_metric(km, seg, cfg.curve.quadrature)})
    emit("curve-length", rows, ["domain", "measure", "resolution", "length"], cfg)
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="iml",
        description="Invariant-metric laboratory: certified disc searches, "
                    "higher metrics, difference quotients, chain experiments.")
    ap.add_argument("--config", help="flat key-value config file")
    ap.add_argument("--print-defaults", action="store_true",
                    help="print the default config and exit")
    sub = ap.add_subparsers(dest="command")

    def common(p, z=False, X=False, w=False, m=False):
        p.add_argument("--domain", help="domain descriptor, e.g. polydisc:radii=1,2")
        if z:
            p.add_argument("--z", required=True, help="base point, comma-separated complex")
        if X:
            p.add_argument("--X", required=True, help="direction, comma-separated complex")
        if w:
            p.add_argument("--w", required=True, help="target point, comma-separated complex")
        if m:
            p.add_argument("--m", type=int, default=0, help="decomposition/chain budget")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="report path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)

    common(sub.add_parser("metric", help="Kobayashi-Royden upper bound"), z=True, X=True)
    common(sub.add_parser("lempert", help="Lempert-function upper bound"), z=True, w=True)
    common(sub.add_parser("higher", help="m-th metric ladder"), z=True, X=True, m=True)
    common(sub.add_parser("hull", help="hull functional of a balanced gauge"), X=True)
    common(sub.add_parser("derivative", help="difference-quotient trace"),
           z=True, X=True, m=True)
    pv = sub.add_parser("verify", help="inequality/identity suites")
    pv.add_argument("what", choices=("prop2", "theorem1"))
    common(pv, m=True)
    pe = sub.add_parser("example3", help="singular-chain experiment")
    pe.add_argument("--t0", type=float, default=None)
    pe.add_argument("--t1", type=float, default=None)
    pe.add_argument("--J", type=int, default=0)
    pe.add_argument("--K", type=int, default=0)
    common(pe)
    common(sub.add_parser("curve-length", help="length functionals along a segment"),
           z=True, w=True)
    return ap


_DISPATCH = {
    "metric": cmd_metric,
    "lempert": cmd_lempert,
    "higher": cmd_higher,
    "hull": cmd_hull,
    "derivative": cmd_derivative,
    "verify": cmd_verify,
    "example3": cmd_example3,
    "curve-length": cmd_curve_length,
}


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)

    try:
        cfg = ExperimentConfig()
        if args.print_defaults:
            sys.stdout.write("\n".join(config_lines(cfg)) + "\n")
            return 0
        if args.config:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as e:
                raise ConfigError(f"cannot read config: {e}") from None
            cfg = apply_config(cfg, parse_config_text(text))
        if args.command is None:
            ap.print_usage(sys.stderr)
            return 2
        if getattr(args, "seed", None) is not None:
            cfg = replace(cfg, seed=args.seed)
        if getattr(args, "out", None):
            cfg = replace(cfg, out=args.out)
        if getattr(args, "format", None):
            cfg = replace(cfg, format=args.format)
        return _DISPATCH[args.command](args, cfg)
    except ConfigError as e:
        print(f"iml: config error: {e}", file=sys.stderr)
        return 2
    except DomainError as e:
        print(f"iml: domain error: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"iml: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
