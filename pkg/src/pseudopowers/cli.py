"""Batch experiment driver.

Every subcommand takes its parameters as flags, optionally merged over a
JSON config file (``--config``; flags win). Primary outputs are written to
``--out-dir`` and are byte-identical for a given config regardless of
``--workers``. Each run appends one JSON line to the run log
(``<out-dir>/runlog.jsonl`` unless PSEUDOPOWERS_RUNLOG is set).

Exit codes: 0 success, 1 internal error, 2 config error, 3 guard violation.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import events, stats
from .export import csv_text, json_text
from .modelmath import lambda_s
from .sampler import sample_sequence
from .sumset import gaps as gap_table
from .sumset import sumset

RUNLOG_ENV = "PSEUDOPOWERS_RUNLOG"
STOCHASTIC = {"sample", "gaps", "poisson", "janson", "gapprob"}
# keys that may differ between runs without changing primary outputs
NON_SEMANTIC = {"workers", "out_dir", "out", "config"}


class ConfigError(ValueError):
    pass


def _int_list(value):
    if isinstance(value, (list, tuple)):
        return [int(x) for x in value]
    return [int(float(x)) for x in str(value).split(",") if x.strip()]


# name -> (type, default); None default means "required or derived"
PARAMS = {
    "sample": {"s": (int, None), "n": (int, None), "seed": (int, None), "trial": (int, 0),
               "out": (str, None)},
    "gaps": {"s": (int, 2), "n": (int, None), "seed": (int, None), "trials": (int, 1),
             "min_b": (int, None), "write_gaps": (bool, True)},
    "poisson": {"s": (int, 2), "n": (int, None), "seed": (int, None), "trials": (int, 1),
                "n_min": (int, None), "d_max": (int, 8)},
    "lemma": {"s": (int, 2), "z": (_int_list, "100,1000,10000"), "t": (int, 1),
              "coeffs": (_int_list, None)},
    "janson": {"seed": (int, None), "systems": (int, 100), "s": (_int_list, "2,3"),
               "max_m": (int, 16)},
    "gapprob": {"s": (int, 2), "alpha": (float, 2.0), "i": (_int_list, "200,400,800,1600"),
                "trials": (int, 10000), "seed": (int, None), "exact": (bool, False)},
}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"command": self.command, "params": self.params}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        obj = json.loads(text)
        return cls(command=obj["command"], params=dict(obj["params"]))

    def digest(self) -> str:
        semantic = {k: v for k, v in self.params.items() if k not in NON_SEMANTIC}
        blob = json.dumps({"command": self.command, "params": semantic}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


def _coerce(kind, value):
    if kind is bool:
        if isinstance(value, str):
            return value.lower() in ("1", "true", "yes")
        return bool(value)
    return kind(value)


def resolve_config(command, flags: dict, file_params: dict) -> ExperimentConfig:
    """Merge builtin defaults < config file < explicit flags, then validate."""
    spec = PARAMS[command]
    unknown = set(file_params) - set(spec) - NON_SEMANTIC
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    params = {}
    for name, (kind, default) in spec.items():
        value = flags.get(name)
        if value is None:
            value = file_params.get(name, default)
        params[name] = None if value is None else _coerce(kind, value)
    params["workers"] = int(flags.get("workers") or file_params.get("workers") or 1)
    params["out_dir"] = flags.get("out_dir") or file_params.get("out_dir") or "."
    _validate(command, params)
    return ExperimentConfig(command=command, params=params)


def _validate(command, p):
    if command in STOCHASTIC and p.get("seed") is None:
        raise ConfigError("--seed is required for stochastic commands")
    if p.get("seed") is not None and not 0 <= p["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    s_values = p["s"] if isinstance(p.get("s"), list) else [p.get("s")]
    if any(s is None or s < 2 for s in s_values):
        raise ConfigError("s must be an integer >= 2")
    if command in ("sample", "gaps", "poisson"):
        if p.get("n") is None or p["n"] < 1:
            raise ConfigError("--n must be a positive integer")
    if p.get("trials") is not None and p["trials"] < 1:
        raise ConfigError("--trials must be >= 1")
    if p["workers"] < 1:
        raise ConfigError("--workers must be >= 1")
    if command == "lemma":
        if p["coeffs"] is None:
            p["coeffs"] = [1] * p["t"]
        if len(p["coeffs"]) != p["t"] or any(a < 1 for a in p["coeffs"]):
            raise ConfigError("--coeffs must list t positive integers")
        if any(z < 2 for z in p["z"]):
            raise ConfigError("z values must be >= 2")
    if command == "gapprob":
        if any(i < 2 for i in p["i"]) or not p["alpha"] > 0:
            raise ConfigError("need i >= 2 and alpha > 0")
    if command == "janson" and p["max_m"] < 2:
        raise ConfigError("need max_m >= 2")


# --------------------------------------------------------------------------
# workers


def _map(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


def _gap_job(s, n, seed, trial, min_b, write_gaps):
    seq = sample_sequence(s, n, seed, trial)
    profile = sumset(seq, s, n)
    table = gap_table(profile, min_b)
    mng = float(np.max(table.normalized)) if len(table) else float("nan")
    where = int(np.argmax(table.normalized)) if len(table) else -1
    record = {
        "trial": trial,
        "sequence_size": len(seq),
        "sumset_density": stats.sumset_density(profile, min(min_b, n)),
        "max_normalized_gap": mng,
        "max_gap_left": int(table.left[where]) if where >= 0 else None,
        "max_gap_right": int(table.right[where]) if where >= 0 else None,
    }
    return record, (table.to_csv() if write_gaps else None)


def _trial_job(s, n, seed, trial, n_min):
    return stats.run_trial(s, n, seed, trial, n_min=n_min, gap_min_b=n_min)


def _gapprob_job(s, i, alpha, trials, seed):
    return events.montecarlo_gap_probability(s, i, alpha, trials=trials, seed=seed)


# --------------------------------------------------------------------------
# commands; each returns {filename: text}


def cmd_sample(p):
    seq = sample_sequence(p["s"], p["n"], p["seed"], p["trial"])
    name = p["out"] or f"sample_s{p['s']}_n{p['n']}_seed{p['seed']}_trial{p['trial']}.txt"
    return {name: seq.to_text()}


def cmd_gaps(p):
    min_b = p["min_b"] or stats.default_burn_in(p["n"])
    if min_b < 2:
        raise ConfigError("--min-b must be >= 2")
    jobs = [(p["s"], p["n"], p["seed"], k, min_b, p["write_gaps"]) for k in range(p["trials"])]
    results = _map(_gap_job, jobs, p["workers"])
    files = {}
    rows = []
    for record, gap_csv in results:
        rows.append(record)
        if gap_csv is not None:
            files[f"gaps_trial{record['trial']}.csv"] = gap_csv
    header = list(rows[0])
    files["gap_trend.csv"] = csv_text(header, [[r[h] for h in header] for r in rows])
    finite = [r["max_normalized_gap"] for r in rows if not math.isnan(r["max_normalized_gap"])]
    files["summary.json"] = json_text({
        "s": p["s"], "limit_n": p["n"], "seed": p["seed"], "min_b": min_b,
        "gap_constant": 1.0 / lambda_s(p["s"]),
        "max_normalized_gap": {"per_trial": [r["max_normalized_gap"] for r in rows],
                               "median": float(np.median(finite)) if finite else None},
        "sumset_density": {"per_trial": [r["sumset_density"] for r in rows],
                           "mean": math.fsum(r["sumset_density"] for r in rows) / len(rows),
                           "model": 1.0 - math.exp(-lambda_s(p["s"]))},
    })
    return files


def cmd_poisson(p):
    n_min = p["n_min"] or stats.default_burn_in(p["n"])
    if not 1 <= n_min <= p["n"]:
        raise ConfigError("--n-min must lie in [1, n]")
    jobs = [(p["s"], p["n"], p["seed"], k, n_min) for k in range(p["trials"])]
    reports = _map(_trial_job, jobs, p["workers"])
    summary = stats.aggregate(reports)
    lam = lambda_s(p["s"])
    empirical = stats.pooled_distribution(summary["rep_histogram"], p["d_max"])
    model = stats.poisson_reference(lam, p["d_max"])
    tv = stats.total_variation(empirical, model)
    pooled = {int(d): c for d, c in summary["rep_histogram"].items()}
    rows = []
    for d in range(p["d_max"] + 2):
        count = pooled.get(d, 0) if d <= p["d_max"] else sum(
            c for k, c in pooled.items() if k > p["d_max"])
        label = str(d) if d <= p["d_max"] else f">{p['d_max']}"
        rows.append([label, count, float(empirical[d]), float(model[d])])
    summary.update({"lambda_s": lam, "d_max": p["d_max"], "total_variation": tv,
                    "reports": [r.to_dict() for r in sorted(reports, key=lambda r: r.trial_index)]})
    return {"histogram.csv": csv_text(["d", "count", "frequency", "poisson"], rows),
            "summary.json": json_text(summary)}


def cmd_lemma(p):
    s, t, coeffs = p["s"], p["t"], p["coeffs"]
    header = ["z", "value", "envelope", "bound_ratio"]
    files = {}
    sweeps = {
        "lemma_i.csv": lambda z: events.lemma_sum_i(t, s, coeffs, z),
        "lemma_ii.csv": lambda z: events.lemma_sum_ii(t, s, coeffs, z),
        "lemma_iii.csv": lambda z: events.lemma_sum_iii(s, z),
    }
    for name, fn in sweeps.items():
        rows = []
        for z in p["z"]:
            r = fn(z)
            rows.append([z, r.value, r.envelope, r.bound_ratio])
        files[name] = csv_text(header, rows)
    lam = lambda_s(s)
    rows = []
    for z in p["z"]:
        if z >= s:
            v = events.omega_probability_sum(z, s)
            rows.append([z, v, lam, v / lam])
    files["omega_sum.csv"] = csv_text(header, rows)
    return files


def _janson_job(system_id, s, i, alpha, M):
    system = events.build_interval_system(i, alpha, s, M)
    lower, upper = events.janson_bounds(system)
    exact = events.exact_gap_probability(s, M, system.interval)
    ok = lower <= exact * (1 + 1e-12) and exact <= upper * (1 + 1e-12)
    return [system_id, s, i, alpha, M, len(system), lower, exact, upper, ok]


def cmd_janson(p):
    if p["max_m"] > events.EXACT_UNIVERSE_CAP:
        raise events.GuardError(f"--max-m {p['max_m']} exceeds {events.EXACT_UNIVERSE_CAP}")
    systems = events.random_interval_systems(p["seed"], p["systems"], p["s"], p["max_m"])
    jobs = [(k,) + sys_ for k, sys_ in enumerate(systems)]
    rows = _map(_janson_job, jobs, p["workers"])
    header = ["system_id", "s", "i", "alpha", "M", "family_size", "lower", "exact", "upper",
              "sandwich_ok"]
    return {"janson.csv": csv_text(header, rows),
            "summary.json": json_text({"systems": len(rows),
                                       "violations": sum(1 for r in rows if not r[-1])})}


def cmd_gapprob(p):
    s, alpha = p["s"], p["alpha"]
    if p["exact"]:
        too_big = [i for i in p["i"] if i + math.ceil(alpha * math.log(i)) > events.EXACT_UNIVERSE_CAP]
        if too_big:
            raise events.GuardError(f"exact enumeration refused for i in {too_big}")
    jobs = [(s, i, alpha, p["trials"], p["seed"]) for i in p["i"]]
    estimates = _map(_gapprob_job, jobs, p["workers"])
    lam = lambda_s(s)
    header = ["i", "estimate", "std_error", "model"]
    rows = []
    for i, (est, se) in zip(p["i"], estimates):
        row = [i, est, se, i ** (-alpha * lam)]
        if p["exact"]:
            M = i + math.ceil(alpha * math.log(i))
            row.append(events.exact_gap_probability(s, M, events.IntervalSpec.from_alpha(i, alpha)))
        rows.append(row)
    if p["exact"]:
        header.append("exact")
    fit_info = {"alpha": alpha, "lambda_s": lam, "model_slope": -alpha * lam}
    try:
        fit = stats.exponent_fit([(i, est) for i, (est, _) in zip(p["i"], estimates)])
        fit_info.update(slope=fit.slope, intercept=fit.intercept, r_squared=fit.r_squared,
                        dropped=fit.dropped)
    except ValueError as exc:
        fit_info["error"] = str(exc)
    return {"gapprob.csv": csv_text(header, rows), "fit.json": json_text(fit_info)}


COMMANDS = {"sample": cmd_sample, "gaps": cmd_gaps, "poisson": cmd_poisson,
            "lemma": cmd_lemma, "janson": cmd_janson, "gapprob": cmd_gapprob}


# --------------------------------------------------------------------------
# run log and entry point


def _digest(text):
    return hashlib.sha256(text.encode()).hexdigest()


def append_runlog(config: ExperimentConfig, outputs: dict, started: float, finished: float):
    path = Path(os.environ.get(RUNLOG_ENV) or Path(config.params["out_dir"]) / "runlog.jsonl")
    digests = {name: _digest(text) for name, text in sorted(outputs.items())}
    key = config.digest()
    status = "new"
    if path.exists():
        for line in path.read_text().splitlines():
            try:
                prior = json.loads(line)
            except json.JSONDecodeError:
                continue
            if prior.get("config_hash") == key:
                status = "match" if prior.get("outputs") == digests else "mismatch"
    entry = {"command": config.command, "config": config.params, "config_hash": key,
             "started": started, "finished": finished, "outputs": digests,
             "reproduction": status}
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return status


def build_parser():
    parser = argparse.ArgumentParser(prog="pseudopowers", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, spec in PARAMS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with parameters; flags override it")
        sp.add_argument("--out-dir", dest="out_dir")
        sp.add_argument("--workers", type=int)
        for pname, (kind, _) in spec.items():
            flag = "--" + pname.replace("_", "-")
            if kind is bool:
                sp.add_argument(flag, dest=pname, action=argparse.BooleanOptionalAction, default=None)
            else:
                sp.add_argument(flag, dest=pname, type=str if kind is _int_list else kind)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with 2 on malformed flags
    flags = vars(args)
    command = flags.pop("command")
    try:
        file_params = {}
        if flags.get("config"):
            with open(flags["config"], encoding="utf-8") as fh:
                file_params = json.load(fh)
            file_params = file_params.get("params", file_params)
        config = resolve_config(command, flags, file_params)
        started = time.time()
        outputs = COMMANDS[command](config.params)
        out_dir = Path(config.params["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in outputs.items():
            with open(out_dir / name, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        status = append_runlog(config, outputs, started, time.time())
        print(f"{command}: wrote {len(outputs)} file(s) to {out_dir} [{status}]", file=sys.stderr)
        return 0
    except events.GuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
