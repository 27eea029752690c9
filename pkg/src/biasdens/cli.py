"""Command-line interface.

Subcommands: ``rcdb``, ``sample``, ``estimate``, ``bench``, ``rate``.
Exit status is 0 on success, 2 for usage errors, 3 for validation or
configuration errors and 4 for numeric failures; failures print a single
``error code=<n> kind=<class> message=<json string>`` line on stderr and
leave no partial output files behind.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .basis import BiasSpec, SobolevSpec, corner_density
from .bench import ARMS, ExperimentConfig, ise_tail_split, rate_check, run_experiment, write_rate_csv
from .difficulty import coefficient_of_difficulty, default_sobolev_radius, equivalent_biased_n
from .errors import BiasdensError, UsageError, ValidationError
from .estimator import ep_estimate, mu_hat
from .sampling import BiasedSample, SeedSpec, read_sample_csv, sample_biased, write_sample_csv, write_sidecar

DEFAULT_M = 1
DEFAULT_GRID = 401
DEFAULT_REPLICATIONS = 500


def parse_bias(text: str) -> BiasSpec:
    """Parse ``const:<c>``, ``linear:<a>,<b>`` or ``table:<path>``."""
    kind, sep, rest = text.partition(":")
    if not sep or not rest:
        raise UsageError(f"bias spec {text!r} must look like const:<c>, linear:<a>,<b> or table:<path>")
    kind = kind.strip().lower()
    if kind == "table":
        path = Path(rest)
        if not path.is_file():
            raise ValidationError(f"bias table {rest!r} is not a readable file")
        return BiasSpec.from_csv(path)
    try:
        nums = [float(p) for p in rest.split(",")]
    except ValueError:
        raise UsageError(f"bias spec {text!r} has non-numeric parameters") from None
    if kind in ("const", "constant"):
        if len(nums) != 1:
            raise UsageError("const bias takes one value")
        return BiasSpec.constant(nums[0])
    if kind == "linear":
        if len(nums) != 2:
            raise UsageError("linear bias takes two values a,b for w(y) = a + b*y")
        return BiasSpec.linear(*nums)
    raise UsageError(f"unknown bias kind {kind!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="biasdens", description="Density estimation from biased data.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, density_required=True):
        sp.add_argument("--density", required=density_required, help="uniform | normal | monotone")
        sp.add_argument("--bias", default="const:1",
                        help="const:<c> | linear:<a>,<b> | table:<csv path> (default: const:1)")

    r = sub.add_parser("rcdb", help="difficulty constants for a density and biasing function")
    common(r)
    r.add_argument("--m", type=int, default=DEFAULT_M, help=f"Sobolev smoothness (default {DEFAULT_M})")
    r.add_argument("--q-value", type=float, default=None,
                   help="Sobolev radius Q (default: seminorm of the density's projected coefficients)")
    r.add_argument("--n-direct", type=int, default=None, help="direct sample size to convert")
    r.add_argument("--json", action="store_true", help="print JSON instead of key=value lines")

    s = sub.add_parser("sample", help="draw a seeded biased sample")
    common(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--replicate", type=int, default=0)
    s.add_argument("--out", required=True, help="sample CSV (header y); seed sidecar goes to <out>.json")

    e = sub.add_parser("estimate", help="adaptive estimate from a sample CSV")
    e.add_argument("--in", dest="inp", required=True, help="sample CSV with header y")
    e.add_argument("--bias", default="const:1")
    e.add_argument("--grid", type=int, default=DEFAULT_GRID, help=f"output grid size (default {DEFAULT_GRID})")
    e.add_argument("--out", required=True, help="(x, f_hat) CSV")
    e.add_argument("--coeffs", default=None, help="coefficient JSON (default <out>.json)")
    e.add_argument("--project-nonnegative", action="store_true")

    b = sub.add_parser("bench", help="Monte Carlo ISE study, direct vs biased")
    common(b)
    b.add_argument("--n-direct", type=int, required=True)
    b.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS,
                   help=f"default {DEFAULT_REPLICATIONS}")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--ise-nodes", type=int, default=1025, help="Simpson nodes for ISE (default 1025)")
    b.add_argument("--arms", choices=ARMS, default="paired-equivalence")
    b.add_argument("--split-at", type=float, default=None, help="ISE split (default: pooled mean)")
    b.add_argument("--rcdb", type=float, default=None, help="override the computed RCDB")
    b.add_argument("--project-nonnegative", action="store_true")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", default="report.json", help="IseReport JSON (default report.json)")
    b.add_argument("--records", default="records.csv", help="records CSV (default records.csv)")
    b.add_argument("--tails", default=None, help="optional CSV of smoothed ISE group densities")

    t = sub.add_parser("rate", help="MISE over a sweep of sample sizes")
    common(t)
    t.add_argument("--m", type=int, default=DEFAULT_M)
    t.add_argument("--q-value", type=float, default=None)
    t.add_argument("--n-list", type=_int_list, default=[200, 800, 3200])
    t.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--project-nonnegative", action="store_true")
    t.add_argument("--out", default="rate.csv", help="n,mise,normalized CSV; config goes to <out>.json")
    return p


class _Outputs:
    """Write files to temporaries and move them into place only on success."""

    def __init__(self):
        self.pending: list[tuple[Path, Path]] = []

    def path(self, final) -> Path:
        final = Path(final)
        final.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{final.name}.", dir=final.parent)
        os.close(fd)
        self.pending.append((Path(tmp), final))
        return Path(tmp)

    def commit(self):
        for tmp, final in self.pending:
            os.replace(tmp, final)
        self.pending.clear()

    def discard(self):
        for tmp, _ in self.pending:
            tmp.unlink(missing_ok=True)
        self.pending.clear()


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _sobolev(args, f) -> SobolevSpec:
    Q = args.q_value if args.q_value is not None else default_sobolev_radius(f, args.m)
    return SobolevSpec(args.m, Q)


def _config(args, **resolved) -> dict:
    cfg = {k: v for k, v in vars(args).items()}
    cfg.update(resolved)
    return cfg


def cmd_rcdb(args, out: _Outputs) -> None:
    f = corner_density(args.density)
    w = parse_bias(args.bias)
    s = _sobolev(args, f)
    rep = coefficient_of_difficulty(f, w, s)
    result = rep.to_dict()
    if args.n_direct is not None:
        result["equivalent_n"] = equivalent_biased_n(args.n_direct, rep.rcdb)
    result["config"] = _config(args, q_value=s.Q)
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        for key in ("mu", "rcdb", "i_f1", "i_fw", "mass01", "equivalent_n"):
            if key in result:
                print(f"{key}={result[key]!r}" if isinstance(result[key], float) else f"{key}={result[key]}")
        print("config=" + json.dumps(result["config"], sort_keys=True))


def cmd_sample(args, out: _Outputs) -> None:
    f = corner_density(args.density)
    w = parse_bias(args.bias)
    seed = SeedSpec(args.seed, args.replicate)
    sample = sample_biased(f, w, args.n, seed)
    write_sample_csv(out.path(args.out), sample.values)
    write_sidecar(out.path(str(args.out) + ".json"), sample,
                  {"density": args.density, "config": _config(args)})


def cmd_estimate(args, out: _Outputs) -> None:
    if args.grid < 2:
        raise ValidationError("grid must have at least two points")
    w = parse_bias(args.bias)
    sample = BiasedSample(read_sample_csv(args.inp), w)
    est = ep_estimate(sample, args.project_nonnegative)
    est.to_csv(out.path(args.out), args.grid)
    coeffs_path = args.coeffs or str(args.out) + ".json"
    config = _config(args, coeffs=coeffs_path)
    data = est.to_dict()
    data.update({"mu_hat": mu_hat(sample), "config": config,
                 "block_thresholds": list(est.scheme.thresholds)})
    _write_json(out.path(coeffs_path), data)


def _write_tails(path, report) -> None:
    tails = ise_tail_split(report)
    with Path(path).open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["arm", "group", "ise", "density"])
        for arm, tail in tails.items():
            for group, g in (("lower", tail.lower), ("upper", tail.upper)):
                if g.omitted:
                    continue
                for v in np.linspace(g.density.lo, g.density.hi, 101):
                    wr.writerow([arm, group, repr(float(v)), repr(float(g.density(v)))])


def cmd_bench(args, out: _Outputs) -> None:
    w = parse_bias(args.bias)
    corner_density(args.density)
    cfg = ExperimentConfig(args.density, w, args.n_direct, args.replications, args.seed,
                           args.ise_nodes, args.arms, args.split_at, args.rcdb, args.project_nonnegative)
    report = run_experiment(cfg, workers=args.workers)
    report.config = {**report.config, "cli": _config(args)}
    report.to_json(out.path(args.out))
    report.write_records_csv(out.path(args.records))
    if args.tails:
        _write_tails(out.path(args.tails), report)
    for arm, summ in report.summary.items():
        print(f"arm={arm} n={summ['n']} mean_ise={summ['mean']:.4f} "
              f"le_split={summ['count_le_split']} gt_split={summ['count_gt_split']}")


def cmd_rate(args, out: _Outputs) -> None:
    f = corner_density(args.density)
    w = parse_bias(args.bias)
    s = _sobolev(args, f)
    rows = rate_check(f, w, s, args.n_list, args.replications, args.seed, args.project_nonnegative)
    write_rate_csv(out.path(args.out), rows)
    _write_json(out.path(str(args.out) + ".json"),
                {"config": _config(args, q_value=s.Q), "rows": [r.__dict__ for r in rows]})


COMMANDS = {"rcdb": cmd_rcdb, "sample": cmd_sample, "estimate": cmd_estimate,
            "bench": cmd_bench, "rate": cmd_rate}


def _fail(exc: BaseException, code: int) -> int:
    msg = str(exc).replace("\n", " ")
    print(f"error code={code} kind={type(exc).__name__} message={json.dumps(msg)}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    out = _Outputs()
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args, out)
        out.commit()
        return 0
    except BiasdensError as exc:
        out.discard()
        return _fail(exc, exc.exit_code)
    except OSError as exc:
        out.discard()
        return _fail(exc, 3)
    except BaseException:
        out.discard()
        raise


if __name__ == "__main__":
    sys.exit(main())
