"""Command-line harness: experiments, validation sweeps, figures.

Subcommands
-----------
recover    run recovery trials, write a CSV report and query transcripts
verify     grid validation at m <= 3, sampling checks above
render     SVG picture of the planar coloring
widths     adaptive-vs-non-adaptive demo for diagonal operators
lipschitz  fuzz the measurement functionals for the Lipschitz bound

Every run is a pure function of (configuration, seed): artifacts are
byte-identical across repeats and worker counts.  Options come from
flags first, then a flat key=value config file, then built-in defaults.
Numeric inputs are decimal strings parsed exactly; float64 evaluation
is opt-in per subcommand.  Values that begin with a minus sign need the
joined spelling, e.g. --box=-10,10.  Exit status: 0 all checks passed,
1 a property was violated, 2 the request itself was malformed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from multiprocessing import Pool

import numpy as np

from . import measurement, partition, recovery, render, verify, widths
from .errors import AdaptrecError, DomainError
from .num import to_fraction
from .partition import ColorSet, PartitionSpec


# ---------------------------------------------------------------------------
# option plumbing
# ---------------------------------------------------------------------------

_DEFAULTS: dict[str, dict] = {
    "recover": {
        "m": None, "eps": None, "trials": 100, "seed": 0, "box": "-10,10",
        "x": None, "mode": "exact", "schedule": None, "workers": 1,
        "out_csv": None, "transcripts": None,
    },
    "verify": {
        "m": None, "resolution": None, "queries": 200, "pairs": 2000,
        "trials": 200, "eps": "1", "seed": 0, "out_csv": None,
    },
    "render": {
        "window": "-0.5,2.5,-0.5,2.5", "px_per_unit": 200, "out": None,
    },
    "widths": {
        "weights": "geometric", "ratio": "1/2", "d": 64, "n": "4,5,6",
        "eps": "1e-3", "trials": 1000, "seed": 0, "out_csv": None,
        "out_json": None,
    },
    "lipschitz": {
        "m": None, "functional": "all", "pairs": 10000, "seed": 0,
        "slack": "1e-9", "mode": "float64", "eps": "1",
    },
}

_INT_KEYS = {"m", "trials", "seed", "workers", "queries", "pairs", "d",
             "px_per_unit"}


def _read_config(path: str) -> dict:
    """Flat key=value lines; blank lines and # comments ignored."""
    out = {}
    with open(path, encoding="utf-8") as f:
        for ln, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{ln}: expected key=value")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge_options(cmd: str, args: argparse.Namespace) -> dict:
    merged = dict(_DEFAULTS[cmd])
    given = {k: v for k, v in vars(args).items() if k not in ("cmd", "config")}
    config_path = getattr(args, "config", None)
    if config_path:
        for key, value in _read_config(config_path).items():
            if key not in merged:
                raise DomainError(f"config key {key!r} unknown to {cmd!r}")
            merged[key] = value
    merged.update(given)
    for key in _INT_KEYS & merged.keys():
        if merged[key] is not None:
            merged[key] = int(merged[key])
    return merged


def _frac(s, name: str) -> Fraction:
    try:
        return to_fraction(s)
    except (ValueError, AdaptrecError):
        raise DomainError(f"cannot parse {name} value {s!r}") from None


def _frac_list(s, name: str) -> list[Fraction]:
    return [_frac(tok, name) for tok in str(s).split(",") if tok.strip()]


def _int_list(s, name: str) -> list[int]:
    try:
        return [int(tok) for tok in str(s).split(",") if tok.strip()]
    except ValueError:
        raise DomainError(f"cannot parse {name} value {s!r}") from None


def _require(opts: dict, *keys: str) -> None:
    for key in keys:
        if opts.get(key) is None:
            raise DomainError(f"missing required option --{key.replace('_', '-')}")


def _vec_str(vec) -> str:
    return " ".join(str(v) for v in vec)


def _num_str(v) -> str:
    return str(v) if isinstance(v, Fraction) else repr(float(v))


def _write_csv(path: str | None, header: list[str], rows: list[list]) -> None:
    """RFC 4180: CRLF separators, minimal quoting.  None path -> stdout."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    data = buf.getvalue()
    if path is None:
        sys.stdout.write(data)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(data)


# ---------------------------------------------------------------------------
# recover
# ---------------------------------------------------------------------------


def _build_spec(m: int, eps: Fraction, mode: str, schedule) -> PartitionSpec:
    delta = tuple(_frac_list(schedule, "schedule")) if schedule else None
    return PartitionSpec.create(m, eps=eps, mode=mode, delta=delta)


def _trial_input(trial: int, seed: int, m: int, lo: Fraction, hi: Fraction):
    rng = np.random.default_rng([seed, trial])
    grid = 10 ** 6
    ks = rng.integers(0, grid + 1, size=m)
    return tuple(lo + (hi - lo) * Fraction(int(k), grid) for k in ks)


def _recover_trial(packed):
    trial, seed, m, eps_s, mode, schedule, box_s, x_s = packed
    eps = _frac(eps_s, "eps")
    spec = _build_spec(m, eps, mode, schedule)
    if x_s is not None:
        x = tuple(_frac_list(x_s, "x"))
        if len(x) != m:
            raise DomainError(f"--x needs {m} comma-separated values")
    else:
        lo, hi = _frac_list(box_s, "box")
        if not lo < hi:
            raise DomainError("--box needs lo < hi")
        x = _trial_input(trial, seed, m, lo, hi)
    result, oracle = recovery.recover_point(x, spec)
    if spec.mode == "exact":
        err = max(abs(a - b) for a, b in zip(x, result.x_hat))
        ok = err <= eps
    else:
        err = max(abs(float(a) - float(b)) for a, b in zip(x, result.x_hat))
        ok = err <= float(result.error_bound)
    ok = ok and result.queries_used <= recovery.n_of(m)
    row = [trial, _vec_str(x), _vec_str(result.x_hat), _num_str(err),
           result.queries_used]
    tlines = []
    for line in oracle.transcript.to_jsonl().splitlines():
        obj = json.loads(line)
        tlines.append(json.dumps({"trial": trial, **obj}))
    return row, tlines, ok


def cmd_recover(opts: dict) -> int:
    _require(opts, "m", "eps")
    m = opts["m"]
    if opts["x"] is not None:
        trials = [0]
    else:
        trials = list(range(opts["trials"]))
    packed = [
        (t, opts["seed"], m, opts["eps"], opts["mode"], opts["schedule"],
         opts["box"], opts["x"])
        for t in trials
    ]
    if opts["workers"] > 1:
        with Pool(opts["workers"]) as pool:
            outcomes = pool.map(_recover_trial, packed)
    else:
        outcomes = [_recover_trial(p) for p in packed]
    rows = [row for row, _, _ in outcomes]
    _write_csv(opts["out_csv"], ["trial", "x", "x_hat", "error", "queries"],
               rows)
    if opts["transcripts"]:
        with open(opts["transcripts"], "w", encoding="utf-8") as f:
            for _, tlines, _ in outcomes:
                for line in tlines:
                    f.write(line + "\n")
    bad = [row for row, _, ok in outcomes if not ok]
    for row in bad:
        print(f"violation: trial={row[0]} x={row[1]} x_hat={row[2]} "
              f"error={row[3]} queries={row[4]}", file=sys.stderr)
    return 1 if bad else 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _verify_exhaustive(opts: dict, spec: PartitionSpec) -> list[list]:
    m = spec.m
    h = _frac(opts["resolution"], "resolution") if opts["resolution"] else None
    sep_grid = verify.separation_grid(m)
    big_grid = verify.default_grid(m)
    if h is not None:
        sep_grid = verify.GridSpec(box=sep_grid.box, h=h)
        big_grid = verify.GridSpec(box=big_grid.box, h=h)
    rows = []

    validated = verify.validate_separation(spec, sep_grid)
    rows.append(["separation-constant", m, "validated c",
                 _num_str(validated.c), _num_str(spec.c),
                 validated.c == spec.c])
    for color in range(1, spec.n_colors + 1):
        est = verify.estimate_separation(color, validated, sep_grid)
        if est is None:
            continue
        rows.append(["separation", m, f"color {color}", _num_str(est.value),
                     _num_str(validated.c), est.value >= validated.c])

    cells = verify.enumerate_grid_cells(spec, sep_grid)
    worst = Fraction(0)
    for cell in cells:
        d = verify.estimate_diameter(cell, spec, sep_grid)
        if d is not None:
            worst = max(worst, d)
    rows.append(["diameter", m, f"max over {len(cells)} cells",
                 _num_str(worst), "1", worst <= 1])

    rng = np.random.default_rng(opts["seed"])
    agree = 0
    n_q = opts["queries"]
    for _ in range(n_q):
        x = [Fraction(int(v), 1000) for v in rng.integers(0, 1001, size=m)]
        r = int(rng.integers(1, spec.n_colors + 1))
        colors = ColorSet.of(r)
        iv = verify.grid_distance_oracle(x, spec, big_grid, colors=colors)
        v = partition.dist_to_colors(x, colors, spec)
        if not iv.empty and iv.lo - big_grid.h <= v <= iv.hi:
            agree += 1
    rows.append(["distance-agreement", m, f"{n_q} color queries", agree,
                 n_q, agree == n_q])

    for report in _lipschitz_reports(spec, opts["pairs"], opts["seed"],
                                     float(_frac(opts.get("slack", "1e-9"),
                                                 "slack"))):
        rows.append(report)
    return rows


def _lipschitz_reports(spec: PartitionSpec, pairs: int, seed: int,
                       slack: float) -> list[list]:
    rows = []
    m = spec.m
    n_colors = spec.n_colors
    if m <= 5:
        subsets = list(range(1, 2 ** n_colors))
    else:
        rng = np.random.default_rng(seed)
        subsets = sorted({int(v) for v in
                          rng.integers(1, 2 ** n_colors, size=31)})
    fspec = spec if spec.mode == "float64" else \
        PartitionSpec.create(m, eps=spec.eps, mode="float64",
                             delta=spec.delta, c=spec.c)
    for bits in subsets:
        colors = ColorSet.of(*(r for r in range(1, n_colors + 1)
                               if bits & (1 << (r - 1))))
        desc = measurement.color_distance(colors)
        rep = verify.check_lipschitz(desc, fspec, n_pairs=pairs, seed=seed,
                                     slack=slack)
        rows.append(["lipschitz", m, f"colors {sorted(colors.colors)}",
                     repr(rep.max_excess), repr(slack),
                     rep.violations == 0])
    for color in range(1, spec.n_colors + 1):
        desc = measurement.separating(color)
        rep = verify.check_lipschitz(desc, fspec, n_pairs=pairs, seed=seed,
                                     slack=slack)
        rows.append(["lipschitz", m, f"separating {color}",
                     repr(rep.max_excess), repr(slack),
                     rep.violations == 0])
    return rows


def _verify_fuzz(opts: dict, spec: PartitionSpec) -> list[list]:
    m = spec.m
    eps = spec.eps
    rows = _lipschitz_reports(spec, opts["pairs"], opts["seed"], 1e-9)

    rng = np.random.default_rng(opts["seed"])
    trials = opts["trials"]
    grid = 10 ** 6
    pts = [tuple(Fraction(-10) + Fraction(20) * Fraction(int(k), grid)
                 for k in rng.integers(0, grid + 1, size=m))
           for _ in range(2 * trials)]
    batch = recovery.recover_many(pts, spec)
    bad_err = bad_q = 0
    stab_bad = 0
    for i in range(trials):
        x, y = pts[2 * i], pts[2 * i + 1]
        xh = batch.x_hat(2 * i)
        yh = batch.x_hat(2 * i + 1)
        if max(abs(a - b) for a, b in zip(x, xh)) > eps:
            bad_err += 1
        if batch.queries[2 * i] > recovery.n_of(m):
            bad_q += 1
        gap = max(abs(a - b) for a, b in zip(x, y))
        if max(abs(a - b) for a, b in zip(xh, yh)) > gap + 2 * eps:
            stab_bad += 1
    rows.append(["recovery-error", m, f"{trials} random points", bad_err, 0,
                 bad_err == 0])
    rows.append(["query-budget", m, f"<= {recovery.n_of(m)}", bad_q, 0,
                 bad_q == 0])
    rows.append(["stability", m, f"{trials} pairs", stab_bad, 0,
                 stab_bad == 0])
    return rows


def cmd_verify(opts: dict) -> int:
    _require(opts, "m")
    m = opts["m"]
    eps = _frac(opts["eps"], "eps")
    spec = PartitionSpec.create(m, eps=eps)
    if m <= 3:
        rows = _verify_exhaustive(opts, spec)
    else:
        print(f"m={m}: exhaustive grids are refused above m=3; "
              f"running the sampling checks", file=sys.stderr)
        rows = _verify_fuzz(opts, spec)
    _write_csv(opts["out_csv"],
               ["check", "m", "detail", "value", "threshold", "pass"], rows)
    return 0 if all(r[-1] for r in rows) else 1


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------


def cmd_render(opts: dict) -> int:
    vals = _frac_list(opts["window"], "window")
    if len(vals) != 4:
        raise DomainError("--window needs x0,x1,y0,y1")
    window = ((vals[0], vals[1]), (vals[2], vals[3]))
    spec = PartitionSpec.create(2)
    svg = render.render_svg(spec, window=window,
                            px_per_unit=opts["px_per_unit"])
    if opts["out"] is None:
        sys.stdout.write(svg)
    else:
        with open(opts["out"], "w", encoding="utf-8", newline="") as f:
            f.write(svg)
    return 0


# ---------------------------------------------------------------------------
# widths
# ---------------------------------------------------------------------------


def cmd_widths(opts: dict) -> int:
    if opts["weights"] == "geometric":
        op = widths.DiagonalOperator.geometric(
            ratio=_frac(opts["ratio"], "ratio"), d=opts["d"])
    elif opts["weights"] == "harmonic":
        op = widths.DiagonalOperator.harmonic(d=opts["d"])
    else:
        raise DomainError("--weights must be 'geometric' or 'harmonic'")
    eps = _frac(opts["eps"], "eps")
    ns = _int_list(opts["n"], "n")
    rows = []
    summaries = []
    status = 0
    for n in ns:
        report = widths.hilbert_speedup_demo(op, n, eps,
                                             trials=opts["trials"],
                                             seed=opts["seed"])
        for tr in report.trials:
            rows.append([tr.trial, report.m, n, tr.queries,
                         repr(float(tr.error)), _num_str(report.error_bound)])
        summaries.append({
            "n": n,
            "m": report.m,
            "d": report.d,
            "trials": len(report.trials),
            "max_error": float(report.max_error),
            "error_bound": str(report.error_bound),
            "benchmark": str(report.benchmark),
            "beats_benchmark": report.beats_benchmark,
            "max_queries": report.max_queries,
            "query_budget": report.query_budget,
            "truncation_tail": str(report.truncation_tail),
        })
        if not report.beats_benchmark or report.max_queries > report.query_budget:
            status = 1
    _write_csv(opts["out_csv"], ["trial", "m", "n", "queries", "error",
                                 "bound"], rows)
    summary = json.dumps({"reports": summaries}, indent=2) + "\n"
    if opts["out_json"] is None:
        sys.stdout.write(summary)
    else:
        with open(opts["out_json"], "w", encoding="utf-8") as f:
            f.write(summary)
    return status


# ---------------------------------------------------------------------------
# lipschitz
# ---------------------------------------------------------------------------


def cmd_lipschitz(opts: dict) -> int:
    _require(opts, "m")
    m = opts["m"]
    eps = _frac(opts["eps"], "eps")
    spec = PartitionSpec.create(m, eps=eps, mode=opts["mode"])
    slack = float(_frac(opts["slack"], "slack")) if opts["mode"] == "float64" \
        else 0.0
    if opts["functional"] == "all":
        rows = _lipschitz_reports(spec, opts["pairs"], opts["seed"], slack)
    else:
        kind, _, rest = str(opts["functional"]).partition(":")
        if kind == "colors":
            desc = measurement.color_distance(set(_int_list(rest, "functional")))
            detail = f"colors {sorted(desc.colors.colors)}"
        elif kind == "sep":
            desc = measurement.separating(int(rest))
            detail = f"separating {rest}"
        else:
            raise DomainError("--functional is 'all', 'colors:R,S', or 'sep:R'")
        rep = verify.check_lipschitz(desc, spec, n_pairs=opts["pairs"],
                                     seed=opts["seed"], slack=slack)
        rows = [["lipschitz", m, detail, repr(rep.max_excess),
                 repr(slack), rep.violations == 0]]
    _write_csv(None, ["check", "m", "detail", "value", "threshold", "pass"],
               rows)
    return 0 if all(r[-1] for r in rows) else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptrec",
        description="adaptive recovery experiments and validation",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add(name: str, flags: dict[str, dict]):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="flat key=value option file")
        for flag, kw in flags.items():
            p.add_argument(flag, default=argparse.SUPPRESS, **kw)
        return p

    add("recover", {
        "--m": {"type": int}, "--eps": {}, "--trials": {"type": int},
        "--seed": {"type": int}, "--box": {}, "--x": {},
        "--mode": {"choices": ["exact", "float64"]}, "--schedule": {},
        "--workers": {"type": int}, "--out-csv": {}, "--transcripts": {},
    })
    add("verify", {
        "--m": {"type": int}, "--resolution": {}, "--queries": {"type": int},
        "--pairs": {"type": int}, "--trials": {"type": int}, "--eps": {},
        "--seed": {"type": int}, "--out-csv": {},
    })
    add("render", {
        "--window": {}, "--px-per-unit": {"type": int}, "--out": {},
    })
    add("widths", {
        "--weights": {"choices": ["geometric", "harmonic"]}, "--ratio": {},
        "--d": {"type": int}, "--n": {}, "--eps": {},
        "--trials": {"type": int}, "--seed": {"type": int},
        "--out-csv": {}, "--out-json": {},
    })
    add("lipschitz", {
        "--m": {"type": int}, "--functional": {}, "--pairs": {"type": int},
        "--seed": {"type": int}, "--slack": {},
        "--mode": {"choices": ["exact", "float64"]}, "--eps": {},
    })
    return parser


_COMMANDS = {
    "recover": cmd_recover,
    "verify": cmd_verify,
    "render": cmd_render,
    "widths": cmd_widths,
    "lipschitz": cmd_lipschitz,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _merge_options(args.cmd, args)
        return _COMMANDS[args.cmd](opts)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AdaptrecError as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
