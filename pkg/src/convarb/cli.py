"""Command-line experiment runner.

Subcommands
-----------
``run``       simulate a model, run the requested analyses, write a report
``models``    print the model catalog
``oracle``    solve a tree file or a discretization spec with the exact oracle
``validate``  check an experiment config without running it

Exit codes: 0 success, 1 validation error, 2 analysis invariant violation,
3 I/O error.

Experiment config (JSON, ``schema_version`` 1)::

    {
      "schema_version": 1,
      "name": "survival_claim",
      "model": {"name": "survival_claim", "params": {"lambdaX": 0.1}},
      "n_paths": 1000,
      "analyses": ["structure", "arbitrage", "density"],
      "density_paths": 2000,
      "oracle": {"discretize": {"model": "survival_claim", "periods": 3, "branching": 2}},
      "output": "out/survival_claim",
      "seed": 0
    }

``oracle`` may instead be ``{"tree": "relative/or/absolute/path.json"}``;
relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, arbitrage, density, structure, treeoracle
from .errors import DomainError, InvariantViolation, PreconditionError
from .models import CATALOG, build, check_invariants, get_entry

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config", "run_experiment", "list_models",
           "oracle_run", "main", "ANALYSES", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1
ANALYSES = ("structure", "arbitrage", "density", "covariation_rule")
PATH_CHUNK = 250
CSV_PATHS = 3
N_DENSITY_TIMES = 11

EXIT_OK, EXIT_VALIDATION, EXIT_INVARIANT, EXIT_IO = 0, 1, 2, 3


class ConfigError(DomainError):
    """Invalid experiment config; ``issues`` lists every problem found."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


@dataclass
class ExperimentConfig:
    name: str
    model: str
    params: dict
    n_paths: int
    analyses: list
    seed: int = 0
    output: str = "out"
    oracle: dict | None = None
    density_paths: int | None = None
    base_dir: Path = field(default=Path("."), repr=False)

    def as_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "name": self.name,
                "model": {"name": self.model, "params": self.params}, "n_paths": self.n_paths,
                "analyses": list(self.analyses), "density_paths": self.density_paths,
                "oracle": self.oracle, "output": self.output, "seed": self.seed}

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _json_with_context(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        ctx = lines[exc.lineno - 1].strip() if 1 <= exc.lineno <= len(lines) else ""
        raise ConfigError([f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}: {ctx!r}"]) from None


def parse_config(data: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    """Validate a config mapping, collecting every issue before failing."""
    issues = []
    if not isinstance(data, dict):
        raise ConfigError(["config must be a JSON object"])
    known = {"schema_version", "name", "model", "n_paths", "analyses", "density_paths", "oracle", "output", "seed"}
    for k in sorted(set(data) - known):
        issues.append(f"unknown key {k!r}")
    if data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        issues.append(f"schema_version must be {SCHEMA_VERSION}")
    model = data.get("model")
    name, params = None, {}
    if not isinstance(model, dict) or not isinstance(model.get("name"), str):
        issues.append("model must be an object with a 'name'")
    else:
        name, params = model["name"], model.get("params", {}) or {}
        try:
            entry = get_entry(name)
            unknown = set(params) - set(entry.defaults)
            if unknown:
                issues.append(f"unknown parameters for {name}: {sorted(unknown)}")
        except DomainError as exc:
            issues.append(str(exc))
    n_paths = data.get("n_paths")
    if not isinstance(n_paths, int) or isinstance(n_paths, bool) or n_paths < 1:
        issues.append("n_paths must be an integer >= 1")
    dpaths = data.get("density_paths")
    if dpaths is not None and (not isinstance(dpaths, int) or dpaths < 2):
        issues.append("density_paths must be an integer >= 2")
    analyses = data.get("analyses")
    if not isinstance(analyses, list) or not analyses:
        issues.append("analyses must be a nonempty list")
        analyses = []
    for a in analyses:
        if a not in ANALYSES:
            issues.append(f"unknown analysis {a!r}; choose from {', '.join(ANALYSES)}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        issues.append("seed must be a nonnegative integer")
    oracle = data.get("oracle")
    if oracle is not None:
        if not isinstance(oracle, dict) or len(set(oracle) & {"tree", "discretize"}) != 1:
            issues.append("oracle must hold exactly one of 'tree' or 'discretize'")
        elif "tree" in oracle and not (base_dir / oracle["tree"]).is_file():
            issues.append(f"oracle tree file not found: {oracle['tree']}")
        elif "discretize" in oracle and not isinstance(oracle["discretize"], dict):
            issues.append("oracle.discretize must be an object")
    if issues:
        raise ConfigError(issues)
    return ExperimentConfig(str(data.get("name", name)), name, dict(params), n_paths, list(analyses), seed,
                            str(data.get("output", "out")), oracle, dpaths, base_dir)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    text = p.read_text()
    return parse_config(_json_with_context(text, str(p)), p.parent)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, density.MCVerdict):
        return _plain(v.to_dict())
    return v


def _iter_paths(cfg: ExperimentConfig, lo: int, m: int):
    entry = get_entry(cfg.model)
    if entry.batched:
        yield from build(cfg.model, cfg.params, seed=cfg.seed, path_index=lo, n_paths=m).paths()
    else:
        for j in range(m):
            yield build(cfg.model, cfg.params, seed=cfg.seed, path_index=lo + j)


def _event_index(path):
    idx = [v for v in path.events.values() if v is not None]
    return min(idx) if idx else None


def _analyze_chunk(cfg: ExperimentConfig, lo: int, m: int, keep: int):
    rows, samples = [], []
    for j, p in enumerate(_iter_paths(cfg, lo, m)):
        k = lo + j
        problems = check_invariants(p)
        if problems:
            raise InvariantViolation(f"path {k}: {problems[0]}")
        row = {"path": k, "event_index": _event_index(p)}
        sa = structure.split_A(p)
        c1, a2, c2 = structure.check_C1_C2(p, sa.A2)
        if "structure" in cfg.analyses:
            normal_form = structure.check_thm33(p)
            row.update(thm33_X=normal_form.X, thm33_Y=normal_form.Y, C1=bool(c1.holds), C2=bool(c2.holds),
                       A2_total=float(sa.A2.mass.sum()))
        ledger = None
        if "arbitrage" in cfg.analyses:
            win = arbitrage.detect_arbitrage_set(p, sa.A2)
            row.update(window_nonempty=not win.empty, debut=win.debut_index, exit=win.exit_index)
            if not win.empty:
                ledger = arbitrage.build_arbitrage_portfolio(p, win)
                bt = arbitrage.backtest(p, ledger, win)
                row.update(terminal_value=bt.terminal_value, monotone=bt.monotone, strict=bt.strict,
                           admissible=bt.admissible, violations=len(bt.violations))
        if "covariation_rule" in cfg.analyses:
            try:
                row["covariation_rule"] = bool(structure.covariation_rule(p).holds)
            except PreconditionError as exc:
                row["covariation_rule"] = None
                row["covariation_skip"] = str(exc)
        rows.append(row)
        if k < keep:
            samples.append((k, p, ledger))
    return rows, samples


def _simulate(cfg: ExperimentConfig, threads: int):
    jobs = [(lo, min(PATH_CHUNK, cfg.n_paths - lo)) for lo in range(0, cfg.n_paths, PATH_CHUNK)]
    run = lambda job: _analyze_chunk(cfg, job[0], job[1], CSV_PATHS)  # noqa: E731
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    rows = [r for part in parts for r in part[0]]
    samples = [s for part in parts for s in part[1]]
    return rows, samples


def _fraction(rows, key, value=True):
    have = [r for r in rows if key in r]
    return None if not have else sum(r[key] == value for r in have) / len(have)


def _summaries(cfg, rows):
    out = {}
    if "structure" in cfg.analyses:
        counts = {}
        for side in ("thm33_X", "thm33_Y"):
            c = {}
            for r in rows:
                c[r[side]] = c.get(r[side], 0) + 1
            counts[side] = dict(sorted(c.items()))
        out["structure"] = {"C1_holds_fraction": _fraction(rows, "C1"), "C2_holds_fraction": _fraction(rows, "C2"),
                            "verdict_counts": counts,
                            "C1": "holds" if all(r["C1"] for r in rows) else "fails"}
    if "arbitrage" in cfg.analyses:
        hit = [r for r in rows if r["window_nonempty"]]
        out["arbitrage"] = {
            "arbitrage_set": "empty" if not hit else "nonempty",
            "paths_with_window": len(hit),
            "terminal_positive_fraction": None if not hit else sum(r["terminal_value"] > 0 for r in hit) / len(hit),
            "all_monotone": all(r["monotone"] for r in hit),
            "all_strict": all(r["strict"] for r in hit),
            "total_violations": sum(r["violations"] for r in hit),
            "mean_terminal_value": None if not hit else float(np.mean([r["terminal_value"] for r in hit])),
        }
    if "covariation_rule" in cfg.analyses:
        skips = sorted({r["covariation_skip"] for r in rows if "covariation_skip" in r})
        if skips:
            out["covariation_rule"] = {"status": "skipped", "reason": skips[0]}
        else:
            out["covariation_rule"] = {"status": "run", "holds_fraction": _fraction(rows, "covariation_rule")}
    return out


def _density(cfg: ExperimentConfig, threads: int):
    n = cfg.density_paths or cfg.n_paths
    rep = density.density_report({"model": cfg.model, "params": cfg.params}, n, seed=cfg.seed, threads=threads,
                                 n_checkpoints=N_DENSITY_TIMES)
    if rep["C3"] is None:
        return {"status": "skipped", "reason": "C1 fails: density refused on every path"}, None
    sm = rep["supermartingale"]
    summary = {"status": "run", "n_paths": n, "refused_paths": rep["refused_paths"], "C3": rep["C3"].to_dict(),
               "supermartingale": {"verdict": sm["verdict"],
                                   "X": [v.verdict for v in sm["X"]], "Y": [v.verdict for v in sm["Y"]]}}
    table = [{"t": float(t), "mean_D": sm["D_means"][i], "stderr_D": float(rep["stderr_D"][i]),
              "mean_DX": sm["X_means"][i], "mean_DY": sm["Y_means"][i]} for i, t in enumerate(rep["times"])]
    return summary, table


def _oracle_from_spec(spec: dict, base_dir: Path):
    if "tree" in spec:
        return treeoracle.load_tree(base_dir / spec["tree"])
    d = dict(spec["discretize"])
    try:
        return treeoracle.discretize_model(d.pop("model"), d.pop("periods"), d.pop("branching", 2),
                                           d.pop("params", None))
    except KeyError as exc:
        raise ConfigError([f"oracle.discretize is missing {exc}"]) from None


def oracle_run(spec: dict, base_dir: Path = Path(".")) -> dict:
    """Solve and independently verify; the result carries the verification stamp."""
    tree = _oracle_from_spec(spec, base_dir)
    res = treeoracle.solve(tree)
    ok = treeoracle.verify(tree, res)
    if not ok:
        raise InvariantViolation("oracle result failed independent verification")
    out = res.to_dict()
    out["verified"] = ok
    out["atoms"] = len(tree.atoms)
    out["periods"] = tree.periods
    return out


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for v in (r.get(h) for h in header)])
    path.write_text(buf.getvalue())


def run_experiment(cfg: ExperimentConfig, out_dir=None, threads: int = 1) -> dict:
    """Run every requested analysis and write the report and CSVs to ``out_dir``."""
    out = Path(out_dir if out_dir is not None else cfg.base_dir / cfg.output)
    entry = get_entry(cfg.model)
    kw = dict(entry.defaults)
    kw.update(cfg.params)
    rows, samples = _simulate(cfg, threads)
    analyses = _summaries(cfg, rows)
    table = None
    if "density" in cfg.analyses:
        analyses["density"], table = _density(cfg, threads)
    if cfg.oracle is not None:
        analyses["oracle"] = oracle_run(cfg.oracle, cfg.base_dir)
    report = {
        "config": cfg.as_dict(),
        "provenance": {"config_sha256": cfg.digest(), "seed": cfg.seed, "version": __version__,
                       "grid": {"horizon": float(kw.get("horizon_bar", kw.get("horizon", 1.0))),
                                "n_steps": int(kw["n_steps"])}},
        "analyses": analyses,
    }
    report = _plain(report)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    header = ["path", "event_index", "thm33_X", "thm33_Y", "C1", "C2", "A2_total", "window_nonempty", "debut",
              "exit", "terminal_value", "monotone", "strict", "admissible", "violations", "covariation_rule"]
    header = [h for h in header if any(h in r for r in rows)]
    _write_csv(out / "paths.csv", header, rows)
    for k, p, ledger in samples:
        t = p.grid.points
        _write_csv(out / f"prices_{k}.csv", ["t", "X", "Y"],
                   [{"t": t[i], "X": p.X[i], "Y": p.Y[i]} for i in range(len(t))])
        if ledger is not None:
            _write_csv(out / f"ledger_{k}.csv", ["t", "piC", "piX", "piY", "V"],
                       [{"t": r[0], "piC": r[1], "piX": r[2], "piY": r[3], "V": r[4]} for r in ledger.rows(t)])
    if table is not None:
        _write_csv(out / "density_mean.csv", ["t", "mean_D", "stderr_D", "mean_DX", "mean_DY"], table)
    return report


def list_models() -> list[dict]:
    return [{"name": e.name, "defaults": e.defaults, "domains": e.domains, "reference": e.reference,
             "batched": e.batched, "converging": e.convergence} for e in CATALOG]


def _diag(kind: str, message, code: int) -> int:
    issues = message if isinstance(message, list) else [str(message)]
    print(json.dumps({"error": kind, "issues": issues}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="convarb", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "oracle", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        if name != "validate":
            p.add_argument("--out", type=Path)
        if name == "run":
            p.add_argument("--seed", type=int)
            p.add_argument("--threads", type=int, default=1)
    sub.add_parser("models")
    args = ap.parse_args(argv)

    try:
        if args.command == "models":
            print(json.dumps(list_models(), indent=2, default=str))
            return EXIT_OK
        if args.command == "oracle":
            text = args.config.read_text()
            try:
                spec = json.loads(text)
            except json.JSONDecodeError:
                spec = None
            if spec is None or "nodes" in spec:
                tree = treeoracle.loads_tree(text, str(args.config))
                res = treeoracle.solve(tree)
                result = res.to_dict()
                result["verified"] = treeoracle.verify(tree, res)
                result["atoms"], result["periods"] = len(tree.atoms), tree.periods
                if not result["verified"]:
                    raise InvariantViolation("oracle result failed independent verification")
            else:
                result = oracle_run(spec.get("oracle", spec), args.config.parent)
            blob = json.dumps(result, indent=2, sort_keys=True) + "\n"
            if args.out:
                args.out.mkdir(parents=True, exist_ok=True)
                (args.out / "oracle_result.json").write_text(blob)
            print(blob, end="")
            return EXIT_OK
        cfg = load_config(args.config)
        if args.command == "validate":
            print(json.dumps({"ok": True, "config": cfg.as_dict()}, sort_keys=True))
            return EXIT_OK
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads < 1:
            raise ConfigError(["--threads must be >= 1"])
        report = run_experiment(cfg, args.out, args.threads)
        print(json.dumps(report["analyses"], indent=2, sort_keys=True))
        return EXIT_OK
    except ConfigError as exc:
        return _diag("validation", exc.issues, EXIT_VALIDATION)
    except InvariantViolation as exc:
        return _diag("invariant", exc, EXIT_INVARIANT)
    except DomainError as exc:
        return _diag("validation", exc, EXIT_VALIDATION)
    except OSError as exc:
        return _diag("io", exc, EXIT_IO)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
