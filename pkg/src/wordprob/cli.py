"""Command-line front end.

Subcommands: dist, prk, verify, spectrum, gsn, lcs, estimate.  Global
flags (usable after the subcommand): --threads, --budget, --seed,
--output, --cache, --manifest.  WORDPROB_CACHE sets the default cache
path.

Exit codes: 0 success, 1 a verification failed, 2 parse/usage errors,
3 budget exceeded.

Outputs echo the semantic run configuration (budget, seed, output
format) for reproducibility.  Execution-only knobs (worker count, cache
location) are deliberately left out of the echo so that identical inputs
produce byte-identical output regardless of scheduling.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .catalog import GroupSpec, build, catalog
from .dist import (
    DEFAULT_BUDGET,
    ClassDistribution,
    commuting_probability,
    distribution,
    monte_carlo,
)
from .errors import (
    BudgetExceededError,
    ChainFormError,
    GroupConstructionError,
    GroupSpecError,
    NormalityError,
    WordProbError,
    WordSyntaxError,
)
from .groups import FiniteGroup
from .subgroups import lower_central_series, nilpotency_class
from .theorems import (
    TheoremReport,
    certify_identity,
    lcm_up_to,
    sn_residual,
    verify_finite,
    verify_lemma1,
    verify_prop2,
    verify_squares,
    verify_structure,
)
from .words import (
    Word,
    derived_word,
    lower_central_word,
    parse as parse_word,
    square_commutator_word,
    to_text,
)

CACHE_ENV_VAR = "WORDPROB_CACHE"


@dataclass(frozen=True)
class RunConfig:
    """Run-wide knobs; defaults match the documented CLI defaults."""

    threads: int = 0  # 0 = one worker per CPU
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    output: str = "table"
    cache_path: str | None = None

    def echo(self) -> dict:
        return {"budget": self.budget, "seed": self.seed, "output": self.output}


def resolve_word(text: str) -> Word:
    """Word text or one of the shortcuts wk:<k>, dk:<k>, sq:<k>."""
    for prefix, builder in (
        ("wk:", lower_central_word),
        ("dk:", derived_word),
        ("sq:", square_commutator_word),
    ):
        if text.startswith(prefix):
            try:
                return builder(int(text[len(prefix) :]))
            except ValueError as exc:
                raise WordSyntaxError(f"bad shortcut {text!r}", 0) from exc
    return parse_word(text)


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _decimal(x: Fraction | float) -> str:
    return f"{float(x):.12f}"


def _map_ordered(fn: Callable, items: Sequence, threads: int) -> list:
    workers = threads if threads > 0 else (os.cpu_count() or 1)
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- rendering ----------------------------------------------------------------


def _emit_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _emit_csv(config: dict, header: list[str], rows: list[list[str]]) -> None:
    out = sys.stdout
    out.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(row) + "\n")


def _emit_table(config: dict, lines: list[str]) -> None:
    for line in lines:
        sys.stdout.write(line + "\n")
    sys.stdout.write("# config: " + json.dumps(config, sort_keys=True) + "\n")


def _render_distribution(cfg: RunConfig, dist: ClassDistribution, word_text: str) -> None:
    record = dist.to_record(word_text)
    if cfg.output == "json":
        _emit_json({"config": cfg.echo(), "distribution": record})
        return
    rows = []
    for rep, size, num, den in record["classes"]:
        mass = Fraction(num, den)
        per_elem = mass / size
        rows.append(
            [
                str(rep),
                dist.group.label(rep),
                str(size),
                _frac_str(mass),
                _frac_str(per_elem),
                _decimal(per_elem),
            ]
        )
    header = ["rep", "label", "size", "class_mass", "element_prob", "element_prob_dec"]
    if cfg.output == "csv":
        _emit_csv(cfg.echo(), header, rows)
        return
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    lines = [f"distribution of {word_text} on {dist.group.name}"]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
    for row in rows:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(header))))
    _emit_table(cfg.echo(), lines)


def _render_reports(cfg: RunConfig, reports: list[TheoremReport]) -> None:
    if cfg.output == "json":
        sys.stdout.write(
            json.dumps({"config": cfg.echo()}, sort_keys=True, separators=(",", ":"))
            + "\n"
        )
        for rep in reports:
            sys.stdout.write(rep.to_json_line() + "\n")
        return
    if cfg.output == "csv":
        rows = [
            [
                rep.check,
                rep.group,
                "pass" if rep.verdict else "fail",
                rep.hypothesis_status,
                (rep.failure_detail or "").replace(",", ";"),
            ]
            for rep in reports
        ]
        _emit_csv(cfg.echo(), ["check", "group", "verdict", "hypothesis", "detail"], rows)
        return
    lines = []
    for rep in reports:
        status = "PASS" if rep.verdict else "FAIL"
        extra = f" [{rep.hypothesis_status}]" if rep.hypothesis_status != "satisfied" else ""
        detail = f" ({rep.failure_detail})" if rep.failure_detail else ""
        lines.append(f"{status} {rep.check} {rep.group}{extra}{detail}")
    passed = sum(1 for r in reports if r.verdict)
    lines.append(f"{passed}/{len(reports)} passed")
    _emit_table(cfg.echo(), lines)


# -- spectrum cache ------------------------------------------------------------


def _load_cache(path: str | None) -> dict[tuple[str, int], dict]:
    out: dict[tuple[str, int], dict] = {}
    if path and Path(path).exists():
        for line in Path(path).read_text().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            out[(rec["group"], rec["k"])] = rec
    return out


def _append_cache(path: str | None, records: list[dict]) -> None:
    if not path or not records:
        return
    with open(path, "a") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def spectrum_sweep(
    cfg: RunConfig,
    k: int,
    max_order: int,
    filter_name: str,
    *,
    manifest_lines: list[str] | None = None,
) -> dict:
    """Commuting-probability sweep over the catalog, with caching.

    The non-gamma-k-trivial filter keeps groups whose order-k lower
    central term is nontrivial, which is exactly the groups with
    probability below 1, so cached values suffice to apply it.
    """
    specs = catalog(max_order, manifest_lines=manifest_lines)
    cache = _load_cache(cfg.cache_path)
    new_records: list[dict] = []
    skipped: list[str] = []
    values: dict[str, Fraction] = {}

    def compute(spec: GroupSpec) -> tuple[str, Fraction | None]:
        key = (spec.id, k)
        rec = cache.get(key)
        if rec is not None and not rec.get("budget_flag"):
            return spec.id, Fraction(rec["num"], rec["den"])
        try:
            value = commuting_probability(build(spec), k, budget=cfg.budget)
        except BudgetExceededError:
            return spec.id, None
        return spec.id, value

    results = _map_ordered(compute, specs, cfg.threads)
    for spec, (gid, value) in zip(specs, results):
        key = (spec.id, k)
        if value is None:
            skipped.append(gid)
            if key not in cache:
                new_records.append(
                    {
                        "group": gid,
                        "k": k,
                        "num": 0,
                        "den": 1,
                        "method": "dp",
                        "budget_flag": True,
                    }
                )
            continue
        values[gid] = value
        rec = cache.get(key)
        if rec is None or rec.get("budget_flag"):
            new_records.append(
                {
                    "group": gid,
                    "k": k,
                    "num": value.numerator,
                    "den": value.denominator,
                    "method": "dp",
                    "budget_flag": False,
                }
            )
    _append_cache(cfg.cache_path, new_records)

    if filter_name == "non-gamma-k-trivial":
        kept = {gid: v for gid, v in values.items() if v != 1}
    else:
        kept = dict(values)
    by_value: dict[Fraction, list[str]] = {}
    for gid, v in kept.items():
        by_value.setdefault(v, []).append(gid)
    rows = [
        {"value": _frac_str(v), "decimal": _decimal(v), "groups": sorted(gids)}
        for v, gids in sorted(by_value.items())
    ]
    maximum = None
    if by_value:
        vmax = max(by_value)
        maximum = {"value": _frac_str(vmax), "groups": sorted(by_value[vmax])}
    return {
        "config": cfg.echo(),
        "k": k,
        "max_order": max_order,
        "filter": filter_name,
        "values": rows,
        "maximum": maximum,
        "skipped": sorted(skipped),
    }


# -- subcommands ---------------------------------------------------------------


def cmd_dist(cfg: RunConfig, args: argparse.Namespace) -> int:
    G = build(args.group)
    w = resolve_word(args.word)
    dist = distribution(G, w, budget=cfg.budget)
    _render_distribution(cfg, dist, to_text(w))
    return 0


def cmd_prk(cfg: RunConfig, args: argparse.Namespace) -> int:
    G = build(args.group)
    w = lower_central_word(args.k)
    payload: dict = {"config": cfg.echo(), "group": args.group, "k": args.k, "method": args.method}
    if args.method == "mc":
        if args.samples is None or args.alpha is None:
            raise WordProbError("method mc requires --samples and --alpha")
        est = monte_carlo(G, w, 0, args.samples, args.alpha, cfg.seed)
        payload.update(
            {
                "point": _frac_str(est.point),
                "decimal": _decimal(est.point),
                "samples": est.samples,
                "alpha": est.alpha,
                "radius": est.radius,
                "seed": est.seed,
            }
        )
        table = [f"Pr_{args.k}({args.group}) ~ {est.point} (radius {est.radius:.6f})"]
    else:
        method = "dp" if args.method == "dp" else "bruteforce"
        value = distribution(G, w, method=method, budget=cfg.budget).prob_of(0)
        payload.update({"value": _frac_str(value), "decimal": _decimal(value)})
        table = [f"Pr_{args.k}({args.group}) = {value}"]
    if cfg.output == "json":
        _emit_json(payload)
    elif cfg.output == "csv":
        keys = [k for k in payload if k != "config"]
        _emit_csv(cfg.echo(), keys, [[str(payload[k]) for k in keys]])
    else:
        _emit_table(cfg.echo(), table)
    return 0


def _resolve_delta(text: str, eps: Fraction) -> Fraction:
    if text.startswith("e/"):
        return eps / int(text[2:])
    return Fraction(text)


def _verify_one(cfg: RunConfig, theorem: str, spec_id: str, args: argparse.Namespace) -> TheoremReport:
    G = build(spec_id)
    eps = args.eps if args.eps == "auto" else Fraction(args.eps)
    if theorem == "finite":
        return verify_finite(G, args.k, eps, budget=cfg.budget)
    if theorem == "structure":
        return verify_structure(G, args.k, eps, budget=cfg.budget)
    if theorem == "squares":
        return verify_squares(G, budget=cfg.budget)
    if theorem == "identity":
        return certify_identity(G, args.k, eps, budget=cfg.budget)
    if args.word is None:
        raise WordProbError(f"verify {theorem} requires --word")
    w = resolve_word(args.word)
    if args.delta is None:
        raise WordProbError(f"verify {theorem} requires --delta")
    from .dist import max_point
    from .words import commutator, variable

    if eps == "auto":
        eps_val = max_point(G, commutator(w, variable(w.arity + 1)), budget=cfg.budget)[1]
    else:
        eps_val = eps
    delta = _resolve_delta(args.delta, eps_val)
    if theorem == "lemma1":
        return verify_lemma1(G, w, eps, delta, budget=cfg.budget)
    if theorem == "prop2":
        return verify_prop2(G, w, eps, delta, budget=cfg.budget)
    raise WordProbError(f"unknown theorem {theorem!r}")


def cmd_verify(cfg: RunConfig, args: argparse.Namespace) -> int:
    if args.all:
        manifest_lines = _manifest_lines(args)
        specs = [s.id for s in catalog(args.max_order, manifest_lines=manifest_lines)]
    elif args.group:
        specs = [args.group]
    else:
        raise WordProbError("verify needs --group or --all")
    if args.theorem in ("finite", "structure", "identity") and args.k is None:
        raise WordProbError(f"verify {args.theorem} requires --k")
    reports = _map_ordered(
        lambda sid: _verify_one(cfg, args.theorem, sid, args), specs, cfg.threads
    )
    _render_reports(cfg, reports)
    return 0 if all(r.verdict for r in reports) else 1


def cmd_spectrum(cfg: RunConfig, args: argparse.Namespace) -> int:
    payload = spectrum_sweep(
        cfg, args.k, args.max_order, args.filter, manifest_lines=_manifest_lines(args)
    )
    if cfg.output == "json":
        _emit_json(payload)
        return 0
    if cfg.output == "csv":
        rows = [[r["value"], r["decimal"], " ".join(r["groups"])] for r in payload["values"]]
        _emit_csv(cfg.echo(), ["value", "decimal", "groups"], rows)
        return 0
    lines = [f"Pr_{args.k} spectrum, order <= {args.max_order}, filter {args.filter}"]
    for r in payload["values"]:
        lines.append(f"  {r['value']:>10s}  {' '.join(r['groups'])}")
    if payload["maximum"]:
        lines.append(
            f"maximum {payload['maximum']['value']} at {' '.join(payload['maximum']['groups'])}"
        )
    else:
        lines.append("maximum: none (empty after filter)")
    if payload["skipped"]:
        lines.append("skipped (budget): " + " ".join(payload["skipped"]))
    _emit_table(cfg.echo(), lines)
    return 0


def cmd_gsn(cfg: RunConfig, args: argparse.Namespace) -> int:
    G = build(args.group)
    res = sn_residual(G, args.n)
    payload = {
        "config": cfg.echo(),
        "group": args.group,
        "n": args.n,
        "residual_order": res.residual.order,
        "residual_generators": list(res.residual.generators),
        "centralizer_order": res.residual_centralizer.order,
        "contributing_subgroups": res.contributing_subgroups,
        "lcm_bound": lcm_up_to(args.n),
    }
    if cfg.output == "json":
        _emit_json(payload)
    elif cfg.output == "csv":
        keys = [k for k in payload if k != "config"]
        _emit_csv(
            cfg.echo(),
            keys,
            [[json.dumps(payload[k]) if isinstance(payload[k], list) else str(payload[k]) for k in keys]],
        )
    else:
        _emit_table(
            cfg.echo(),
            [
                f"residual of {args.group} at degree {args.n}:",
                f"  order {res.residual.order}, generators {list(res.residual.generators)}",
                f"  centralizer order {res.residual_centralizer.order}",
                f"  intersected {res.contributing_subgroups} subgroups of index <= {args.n}",
            ],
        )
    return 0


def cmd_lcs(cfg: RunConfig, args: argparse.Namespace) -> int:
    G = build(args.group)
    series = lower_central_series(G)
    cls = nilpotency_class(series)
    payload = {
        "config": cfg.echo(),
        "group": args.group,
        "series_orders": [t.order for t in series],
        "nilpotency_class": cls,
    }
    if cfg.output == "json":
        _emit_json(payload)
    elif cfg.output == "csv":
        _emit_csv(
            cfg.echo(),
            ["group", "series_orders", "nilpotency_class"],
            [[args.group, " ".join(str(t.order) for t in series), str(cls)]],
        )
    else:
        _emit_table(
            cfg.echo(),
            [
                f"lower central series of {args.group}: "
                + " > ".join(str(t.order) for t in series),
                f"nilpotency class: {cls if cls is not None else 'not nilpotent'}",
            ],
        )
    return 0


def cmd_estimate(cfg: RunConfig, args: argparse.Namespace) -> int:
    G = build(args.group)
    w = resolve_word(args.word)
    est = monte_carlo(G, w, args.element, args.samples, args.alpha, cfg.seed)
    payload = {
        "config": cfg.echo(),
        "group": args.group,
        "word": to_text(w),
        "element": args.element,
        "point": _frac_str(est.point),
        "decimal": _decimal(est.point),
        "samples": est.samples,
        "alpha": est.alpha,
        "radius": est.radius,
        "seed": est.seed,
    }
    if cfg.output == "json":
        _emit_json(payload)
    elif cfg.output == "csv":
        keys = [k for k in payload if k != "config"]
        _emit_csv(cfg.echo(), keys, [[str(payload[k]) for k in keys]])
    else:
        _emit_table(
            cfg.echo(),
            [
                f"P({to_text(w)} = {args.element}) on {args.group}: "
                f"{est.point} +- {est.radius:.6f} ({est.samples} samples, alpha {est.alpha})"
            ],
        )
    return 0


def _manifest_lines(args: argparse.Namespace) -> list[str] | None:
    path = getattr(args, "manifest", None)
    if path is None:
        return None
    return [
        line.strip()
        for line in Path(path).read_text().splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]


# -- argument parsing ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=0, help="worker count, 0 = auto")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", choices=("json", "csv", "table"), default="table")
    common.add_argument(
        "--cache", default=None, help=f"results cache path (default ${CACHE_ENV_VAR})"
    )
    common.add_argument("--manifest", default=None, help="alternate catalog manifest file")

    parser = argparse.ArgumentParser(prog="wordprob", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", parents=[common], help="exact class distribution of a word map")
    p.add_argument("--group", required=True)
    p.add_argument("--word", required=True)
    p.set_defaults(fn=cmd_dist)

    p = sub.add_parser("prk", parents=[common], help="identity probability of the length-k commutator")
    p.add_argument("--group", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=("exact", "dp", "mc"), default="dp")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.set_defaults(fn=cmd_prk)

    p = sub.add_parser("verify", parents=[common], help="run a structure check")
    p.add_argument(
        "theorem",
        choices=("finite", "lemma1", "prop2", "structure", "squares", "identity"),
    )
    p.add_argument("--group", default=None)
    p.add_argument("--all", action="store_true")
    p.add_argument("--max-order", type=int, default=64, dest="max_order")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eps", default="auto")
    p.add_argument("--delta", default=None, help='a fraction like "1/8", or "e/2" of eps')
    p.add_argument("--word", default=None)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("spectrum", parents=[common], help="sweep Pr_k over the catalog")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-order", type=int, required=True, dest="max_order")
    p.add_argument("--filter", choices=("all", "non-gamma-k-trivial"), default="all")
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("gsn", parents=[common], help="degree-n residual witness data")
    p.add_argument("--group", required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_gsn)

    p = sub.add_parser("lcs", parents=[common], help="lower central series")
    p.add_argument("--group", required=True)
    p.set_defaults(fn=cmd_lcs)

    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo point estimate")
    p.add_argument("--group", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--element", type=int, default=0)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(fn=cmd_estimate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return int(exc.code) if exc.code else 0
    cfg = RunConfig(
        threads=args.threads,
        budget=args.budget,
        seed=args.seed,
        output=args.output,
        cache_path=args.cache or os.environ.get(CACHE_ENV_VAR),
    )
    try:
        return args.fn(cfg, args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (
        WordSyntaxError,
        GroupSpecError,
        GroupConstructionError,
        ChainFormError,
        NormalityError,
        WordProbError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
