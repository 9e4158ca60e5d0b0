"""Command-line entry point.

Exit codes: 0 on success, 1 on a runtime error, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Sequence

from . import __version__
from .advisor import (
    AdvisoryError,
    advise,
    middleware_inputs,
    provider_inputs,
    truth_report,
)
from .dataset import (
    AttributeDomain,
    DatasetError,
    JointDistribution,
    load_dataset,
    read_summaries,
    write_summaries,
)
from .evaluation import (
    METHODS,
    SynthSpec,
    dumps_records,
    generate_synthetic,
    run_benchmark,
    summarize_records,
    time_advisory,
    timing_breakdown,
)
from .masking import (
    GeneratorPolicy,
    MaskingError,
    dump_configurations,
    generate_configurations,
    inverse_image,
    load_configurations,
    mask_dataset,
    masked_joint,
    write_csv,
)
from .reconstruction import IpfSettings
from .utility import Measure

MEASURES = ("mi", "chi2", "g3")


def _bins(items: Sequence[str] | None) -> dict[str, int]:
    out = {}
    for item in items or ():
        name, _, count = item.partition("=")
        if not name or not count.isdigit() or int(count) < 1:
            raise argparse.ArgumentTypeError(f"--bins expects COLUMN=COUNT, got {item!r}")
        out[name] = int(count)
    return out


def _write(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _manifest(args: argparse.Namespace, outputs: Sequence[str], path: str, **extra) -> None:
    doc = {
        "command": args.command,
        "version": __version__,
        "inputs": {k: getattr(args, k) for k in
                   ("data", "configs", "masked_joints", "summaries", "domains")
                   if getattr(args, k, None)},
        "label": getattr(args, "label", None),
        "measure": getattr(args, "measure", None),
        "case": getattr(args, "case", None),
        "seed": getattr(args, "seed", None),
        "ipf": {"tolerance": getattr(args, "tolerance", None),
                "max_iterations": getattr(args, "max_iters", None)},
        "outputs": list(outputs),
        **extra,
    }
    _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load(args):
    return load_dataset(args.data, args.label, _bins(args.bins))


def _settings(args) -> IpfSettings:
    return IpfSettings(tolerance=args.tolerance, max_iterations=args.max_iters,
                       rounding_seed=args.seed)


# commands ----------------------------------------------------------------

def cmd_summarize(args) -> int:
    d = _load(args)
    _write(args.out, write_summaries(d))
    outputs = [args.out]
    if args.configs:
        if not args.masked_joints_out:
            raise argparse.ArgumentTypeError("--configs needs --masked-joints-out")
        configs = load_configurations(args.configs)
        doc = {"label": d.label_name, "configs": {}}
        for c in configs:
            c.validate_for(d.attribute_names, d.label_name)
            doc["configs"][c.id] = {
                a: masked_joint(d, a, c.function_for(a)).to_json() for a in d.attribute_names}
        _write(args.masked_joints_out, json.dumps(doc, indent=2) + "\n")
        outputs.append(args.masked_joints_out)
    _manifest(args, outputs, args.out + ".manifest.json")
    return 0


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_advise(args) -> int:
    configs = load_configurations(args.configs)
    settings = _settings(args)
    if args.data:
        d = _load(args)
        if args.against == "truth":
            report = truth_report(d, configs, args.measure)
        else:
            report = advise(configs, provider_inputs(d, configs, args.case), args.measure,
                            settings, args.jobs)
    else:
        if args.against == "truth":
            raise argparse.ArgumentTypeError("--against truth needs --data")
        doc = _read_json(args.masked_joints)
        joints = {cid: {a: JointDistribution.from_json(j) for a, j in per.items()}
                  for cid, per in doc["configs"].items()}
        summaries = read_summaries(args.summaries) if args.summaries else None
        domains = None
        if args.domains:
            domains = {a: AttributeDomain.canonical(a, v)
                       for a, v in _read_json(args.domains).items()}
        inputs = middleware_inputs(configs, joints, summaries, domains, args.case)
        report = advise(configs, inputs, args.measure, settings, args.jobs)
    if args.out:
        _write(args.out, report.dumps())
        _manifest(args, [args.out], args.out + ".manifest.json")
    sys.stdout.write(report.render())
    return 0


def cmd_mask(args) -> int:
    d = _load(args)
    configs = load_configurations(args.configs)
    if args.config_id:
        chosen = [c for c in configs if c.id == args.config_id]
        if not chosen:
            raise MaskingError(f"no configuration {args.config_id!r} in {args.configs}")
        config = chosen[0]
    elif len(configs) == 1:
        config = configs[0]
    else:
        raise argparse.ArgumentTypeError("several configurations in file; pass --config-id")
    config.validate_for(d.attribute_names, d.label_name)
    masked = mask_dataset(d, config)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(masked, fh)
        _manifest(args, [args.out], args.out + ".manifest.json", config_id=config.id)
    else:
        write_csv(masked, sys.stdout)
    return 0


def cmd_gen_configs(args) -> int:
    d = _load(args)
    policy = GeneratorPolicy(**_read_json(args.policy)) if args.policy else GeneratorPolicy()
    configs = generate_configurations(d, args.k, args.seed, policy)
    _write(args.out, dump_configurations(configs))
    _manifest(args, [args.out], args.out + ".manifest.json", k=args.k)
    return 0


def cmd_gen_synth(args) -> int:
    spec = SynthSpec(args.rows, args.attrs, args.domain_size, args.classes, args.gamma, args.seed)
    t0 = time.perf_counter()
    d = generate_synthetic(spec)
    t_gen = time.perf_counter() - t0
    outputs = []
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(d, fh)
        outputs.append(args.out)
    print(f"generated {d.n_rows} rows x {d.m} attributes in {t_gen:.2f}s")
    if args.time_advise:
        configs = generate_configurations(d, args.time_advise, args.seed)
        report, phases = time_advisory(d, configs, args.measure, args.case,
                                       IpfSettings(rounding_seed=args.seed), args.jobs)
        for phase in ("masking", "reconstruction", "utility", "total"):
            print(f"{phase:<15} {phases[phase]:9.3f}s")
        print(f"selected: {report.selected}")
        if args.out:
            _write(args.out + ".timing.json", json.dumps(phases, indent=2) + "\n")
    if args.out:
        _manifest(args, outputs, args.out + ".manifest.json",
                  synth={"rows": spec.rows, "attributes": spec.attributes,
                         "domain_size": spec.domain_size, "label_classes": spec.label_classes,
                         "gamma": spec.gamma})
    return 0


def cmd_evaluate(args) -> int:
    d = _load(args)
    configs = load_configurations(args.configs)
    records = run_benchmark(d, configs, args.measures, args.methods, _settings(args), args.jobs)
    os.makedirs(args.out, exist_ok=True)
    paths = [os.path.join(args.out, n) for n in ("records.ndjson", "summary.json")]
    _write(paths[0], dumps_records(records))
    summary = summarize_records(records)
    _write(paths[1], json.dumps(summary, indent=2) + "\n")
    _write(os.path.join(args.out, "timing.json"),
           json.dumps(timing_breakdown(records), indent=2) + "\n")
    if args.csv:
        rows = ["config_id,attribute,method,tvd,iterations"]
        rows += [f"{r.config_id},{r.attribute},{r.method},{r.tvd!r},{r.iterations}"
                 for r in records]
        paths.append(os.path.join(args.out, "records.csv"))
        _write(paths[-1], "\n".join(rows) + "\n")
    _manifest(args, paths, os.path.join(args.out, "manifest.json"),
              methods=list(args.methods), measures=list(args.measures))
    for method, stats in summary.items():
        print(f"{method:<12} median TVD {stats['median_tvd']:.4f} "
              f"(p25 {stats['p25']:.4f}, p75 {stats['p75']:.4f})")
    return 0


# parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maskadvisor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p, required=True):
        p.add_argument("--data", required=required, help="CSV file with a header row")
        p.add_argument("--label", required=required, help="label column name")
        p.add_argument("--bins", nargs="*", metavar="COLUMN=COUNT",
                       help="equal-width binning for numeric columns")

    def ipf_args(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tolerance", type=float, default=1e-9)
        p.add_argument("--max-iters", type=int, default=1000)
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("summarize", help="write per-attribute histograms")
    data_args(p)
    p.add_argument("--configs", help="also export masked joints for these configurations")
    p.add_argument("--masked-joints-out")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("advise", help="select the configuration with least utility deviation")
    data_args(p, required=False)
    p.add_argument("--configs", required=True)
    p.add_argument("--measure", choices=MEASURES, default="mi")
    p.add_argument("--case", choices=("with-1d", "no-1d"), default="with-1d")
    p.add_argument("--masked-joints", help="middleware mode: masked joints file")
    p.add_argument("--summaries", help="middleware mode: histogram file")
    p.add_argument("--domains", help="middleware mode: {attribute: [values]} file")
    p.add_argument("--against", choices=("reconstruction", "truth"), default="reconstruction",
                   help="'truth' scores against true joints (needs --data)")
    p.add_argument("--out")
    ipf_args(p)
    p.set_defaults(func=cmd_advise)

    p = sub.add_parser("mask", help="materialize a masked dataset")
    data_args(p)
    p.add_argument("--configs", required=True)
    p.add_argument("--config-id")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("gen-configs", help="draw random masking configurations")
    data_args(p)
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", help="JSON object of GeneratorPolicy fields")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_configs)

    p = sub.add_parser("gen-synth", help="generate a synthetic dataset")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--attrs", type=int, required=True)
    p.add_argument("--domain-size", type=int, default=10)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-advise", type=int, metavar="K", default=0,
                   help="also time the advisory over K generated configurations")
    p.add_argument("--measure", choices=MEASURES, default="mi")
    p.add_argument("--case", choices=("with-1d", "no-1d"), default="with-1d")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("evaluate", help="score reconstructions against the true joints")
    data_args(p)
    p.add_argument("--configs", required=True)
    p.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    p.add_argument("--measures", nargs="+", choices=MEASURES, default=["mi"])
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    ipf_args(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "advise":
        provider = bool(args.data)
        if provider == bool(args.masked_joints):
            parser.error("advise needs either --data/--label (provider) or --masked-joints")
        if provider and not args.label:
            parser.error("--data needs --label")
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except (DatasetError, MaskingError, AdvisoryError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
