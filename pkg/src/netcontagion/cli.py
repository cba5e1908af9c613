"""``netcontagion`` command line.

Exit codes: 0 success, 2 usage or configuration error, 3 ingestion error,
4 numeric error (non-convergence, separation, degenerate null, ...).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import ingest, rng
from .errors import (AttributeTypeError, ConfigurationError, IngestError, NumericError,
                     UnknownNodeError)
from .exposure import EXPOSURE_DEFINITIONS
from .graph import LAYERS, build_network, homophily_fraction
from .permutation import ALTERNATIVES, MODES
from .report import (EXPORT_FORMATS, MODEL_COVARIATES, MODELS, RENDERERS, cmd_describe,
                     cmd_export, cmd_fit, cmd_homophily, dumps, envelope, make_manifest,
                     sha256_file, validate, write_outputs)
from .synthetic import CohortConfig, generate_cohort, survey_shaped_config

log = logging.getLogger("netcontagion")

EXIT_OK, EXIT_USAGE, EXIT_INGEST, EXIT_NUMERIC = 0, 2, 3, 4
MAX_ROW_WARNINGS = 5
EXPORT_SUFFIX = {"edge-list": "csv", "graphml": "graphml", "dot": "dot"}


def _csv(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="netcontagion",
                                description="Contagion analysis on friendship-nomination "
                                            "networks.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, layer_default="overall"):
        sp.add_argument("--cohort", required=True, type=Path, help="cohort CSV or JSON")
        sp.add_argument("--nominations", type=Path, help="nominations CSV or JSON")
        sp.add_argument("--layer", default=layer_default,
                        help=f"one of {', '.join(LAYERS)}")
        sp.add_argument("--out", type=Path, help="output directory (default: print JSON)")
        sp.add_argument("--text", action="store_true", help="print the text table to stdout")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $NETCONTAGION_THREADS or 1)")

    sp = sub.add_parser("describe", help="descriptive tables")
    common(sp)

    sp = sub.add_parser("homophily", help="permutation tests of attribute homophily")
    common(sp)
    sp.add_argument("--attr", required=True, type=_csv, help="attribute(s), comma separated")
    sp.add_argument("--sims", type=int, default=1000)
    sp.add_argument("--seed", type=int, help="random seed (generated and recorded if absent)")
    sp.add_argument("--mode", choices=MODES, default="marginal_shuffle")
    sp.add_argument("--alternative", choices=ALTERNATIVES, default="two-sided")
    sp.add_argument("--restrict-value", default=None,
                    help="count only edges where both ends take this value")

    sp = sub.add_parser("fit", help="fit a model")
    common(sp)
    sp.add_argument("--model", required=True, choices=MODELS)
    sp.add_argument("--trait", default="direct")
    sp.add_argument("--attrs", type=_csv, default=["school"], help="ERGM match terms")
    sp.add_argument("--separate", action="store_true", help="one ERGM per attribute")
    sp.add_argument("--covariates", type=_csv, default=list(MODEL_COVARIATES))
    sp.add_argument("--method", default="lag_covariate_least_squares",
                    choices=["lag_covariate_least_squares", "profile_ml"])
    sp.add_argument("--weight-mode", default="raw_adjacency",
                    choices=["raw_adjacency", "row_normalized"])
    sp.add_argument("--risk-attrs", type=_csv, default=list(MODEL_COVARIATES))
    sp.add_argument("--exposure", choices=EXPOSURE_DEFINITIONS, default="any_positive_friend")

    sp = sub.add_parser("export", help="write the network as a graph file")
    common(sp)
    sp.add_argument("--format", choices=EXPORT_FORMATS, default="edge-list")
    sp.add_argument("--color-by", default=None, help="flag edges joining equal values")

    sp = sub.add_parser("generate", help="write a synthetic cohort")
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--config", type=Path, help="CohortConfig JSON (default: survey-shaped)")
    sp.add_argument("--seed", type=int, help="overrides the config seed")
    sp.add_argument("--planted-rho", type=float, default=None)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--text", action="store_true")

    sp = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    sp.add_argument("manifest", type=Path)
    sp.add_argument("--out", type=Path)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--text", action="store_true")
    return p


def params_from_args(args):
    """Result-relevant parameters of a parsed command line."""
    c = args.command
    if c == "describe":
        return {"layer": args.layer}
    if c == "homophily":
        return {"attrs": args.attr, "layer": args.layer, "sims": args.sims, "mode": args.mode,
                "alternative": args.alternative, "restrict_value": args.restrict_value}
    if c == "fit":
        return {"model": args.model, "layer": args.layer, "trait": args.trait,
                "attrs": args.attrs, "separate": args.separate, "covariates": args.covariates,
                "method": args.method, "weight_mode": args.weight_mode,
                "risk_attrs": args.risk_attrs, "exposure": args.exposure}
    if c == "export":
        return {"format": args.format, "color_by": args.color_by, "layer": args.layer}
    if c == "generate":
        cfg = CohortConfig.from_dict(json.loads(args.config.read_text())) if args.config \
            else survey_shaped_config(planted_rho=args.planted_rho)
        if args.planted_rho is not None:
            cfg.planted_rho = args.planted_rho
        return {"config": cfg.to_dict(), "format": args.format}
    raise ConfigurationError(f"unknown command {c!r}")


def execute(command, params, inputs, seed, threads, out=None, text=False, stdout=None):
    """Run ``command`` with recorded parameters; shared by direct runs and replay."""
    stdout = stdout or sys.stdout
    threads = rng.default_threads() if threads is None else threads
    if threads < 1:
        raise ConfigurationError("--threads must be >= 1")
    seed_generated = False
    if command in ("homophily", "generate") and seed is None:
        seed, seed_generated = rng.fresh_seed(), True
    if seed is not None:
        rng.check_seed(seed)
    manifest = make_manifest(command, params, inputs, seed, threads, seed_generated)

    if command == "generate":
        cfg = CohortConfig.from_dict(dict(params["config"], seed=seed))
        cohort, noms = generate_cohort(cfg)
        net = build_network(cohort, noms)
        summary = {"n": len(cohort), "n_edges": net.n_edges,
                   "school_homophily_pct": homophily_fraction(net, "school"),
                   "files": [f"cohort.{params['format']}", f"nominations.{params['format']}"]}
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        ingest.write_cohort(cohort, out / summary["files"][0])
        ingest.write_nominations(noms, out / summary["files"][1])
        (out / "config.json").write_text(cfg.to_json() + "\n", encoding="utf-8")
        doc = envelope("generate", manifest, summary)
        validate("generate", doc)
        (out / "generate.json").write_text(dumps(doc), encoding="utf-8")
        (out / "manifest.json").write_text(dumps(manifest), encoding="utf-8")
        if text:
            print(f"wrote {len(cohort)} participants and {len(noms)} nominations to {out}",
                  file=stdout)
        return manifest

    cohort, noms, report = ingest.load(inputs["cohort"], inputs.get("nominations"))
    for row, msg in report.warnings[:MAX_ROW_WARNINGS]:
        log.warning("%s%s", f"row {row}: " if row else "", msg)
    if len(report.warnings) > MAX_ROW_WARNINGS:
        log.warning("%d more ingestion warning(s) not shown",
                    len(report.warnings) - MAX_ROW_WARNINGS)
    if command == "describe":
        result = cmd_describe(cohort, noms, **params)
    elif command == "homophily":
        result = cmd_homophily(cohort, noms, seed=seed, threads=threads, **params)
    elif command == "fit":
        result = cmd_fit(cohort, noms, **params)
    elif command == "export":
        graph, result = cmd_export(cohort, noms, params["format"], params["color_by"],
                                   params["layer"])
        result["file"] = f"graph.{EXPORT_SUFFIX[params['format']]}"
        if out is None:
            stdout.write(graph)
            return manifest
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / result["file"]).write_text(graph, encoding="utf-8")
        doc = envelope("export", manifest, result)
        validate("export", doc)
        (Path(out) / "export.json").write_text(dumps(doc), encoding="utf-8")
        (Path(out) / "manifest.json").write_text(dumps(manifest), encoding="utf-8")
        return manifest
    else:
        raise ConfigurationError(f"unknown command {command!r}")

    if out is not None:
        paths = write_outputs(out, command, manifest, result)
        if text:
            stdout.write(paths[1].read_text(encoding="utf-8"))
    else:
        doc = envelope(command, manifest, result)
        validate(command, doc)
        if text:
            stdout.write(RENDERERS[command](result))
        else:
            stdout.write(dumps(doc))
    return manifest


def _replay(args):
    manifest = json.loads(args.manifest.read_text(encoding="utf-8"))
    inputs = {}
    for key, rec in manifest.get("inputs", {}).items():
        path = Path(rec["path"])
        if not path.is_absolute():
            path = (args.manifest.parent / path) if not path.exists() else path
        inputs[key] = path
    for key, path in inputs.items():
        if not path.is_file():
            raise IngestError(f"input {key!r} not found: {path}")
        if sha256_file(path) != manifest["inputs"][key]["sha256"]:
            raise IngestError(f"input {key!r} changed since the manifest was written")
    out = args.out
    if manifest["command"] == "generate" and out is None:
        raise ConfigurationError("replay of generate needs --out")
    execute(manifest["command"], manifest["params"], inputs, manifest["seed"], args.threads,
            out=out, text=args.text)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "replay":
            _replay(args)
        else:
            if args.command == "generate":
                inputs = {}
                params = params_from_args(args)
                seed = args.seed if args.seed is not None else params["config"]["seed"]
            else:
                inputs = {"cohort": args.cohort, "nominations": args.nominations}
                params = params_from_args(args)
                seed = getattr(args, "seed", None)
            execute(args.command, params, inputs, seed, args.threads, out=args.out,
                    text=args.text)
    except (IngestError, UnknownNodeError) as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except FileNotFoundError as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigurationError, AttributeTypeError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
