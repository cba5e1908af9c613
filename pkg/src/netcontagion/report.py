"""Command implementations, run manifests, JSON schemas and text tables.

Every command produces a JSON-ready ``result`` dict first; text tables are
rendered from that dict only, so the two never disagree.
"""

import datetime as dt
import hashlib
import json
import logging
import math
import os
import platform
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__
from .autocorr import fit_autocorrelation
from .descriptive import (cross_tab, numeric_comparison, popularity_by_category, prevalence,
                          representativeness_summary, same_week_friend_proportion)
from .errors import ConfigurationError, UndefinedResultError
from .exposure import EXPOSURE_DEFINITIONS, carrier_vs_positive_friends, category_relative_risk
from .ergm import fit_dyadic_ergm, fit_dyadic_ergm_separately
from .graph import (LAYERS, build_network, check_attribute,
                    check_layer, resolve_trait)
from .permutation import ALTERNATIVES, MODES, homophily_permutation_test

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
# Covariates of the multivariable models; contraceptive use is female-only and left out.
MODEL_COVARIATES = ("sex", "study_program", "bmi_category", "smoking", "snuff", "alcohol",
                    "physical_activity")
DESCRIBE_ATTRIBUTES = MODEL_COVARIATES + ("contraceptive",)
TRAIT_NAMES = ("carriage_direct", "carriage_enrichment")
MODELS = ("ergm", "autocorr", "logit", "rr")
EXPORT_FORMATS = ("edge-list", "graphml", "dot")


# ---------------------------------------------------------------- JSON plumbing

def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dumps(obj):
    return json.dumps(jsonable(obj), indent=1, sort_keys=True, allow_nan=False) + "\n"


def load_schema(kind):
    text = resources.files("netcontagion").joinpath(
        f"schemas/{kind}.v{SCHEMA_VERSION}.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(kind, document):
    """Raise ``jsonschema.ValidationError`` if ``document`` breaks the ``kind`` schema."""
    jsonschema.validate(jsonable(document), load_schema(kind))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc) if epoch else \
        dt.datetime.now(dt.timezone.utc)
    return when.replace(microsecond=0).isoformat()


def versions():
    return {"netcontagion": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def make_manifest(command, params, inputs, seed, threads, seed_generated=False):
    """Run manifest; ``manifest_id`` covers everything that can change results."""
    inputs = {k: {"path": str(p), "sha256": sha256_file(p)} for k, p in inputs.items()
              if p is not None}
    core = {"command": command, "params": params, "seed": seed, "versions": versions(),
            "inputs": {k: v["sha256"] for k, v in inputs.items()}}
    ident = hashlib.sha256(dumps(core).encode()).hexdigest()[:16]
    return jsonable({"schema": f"netcontagion.manifest/{SCHEMA_VERSION}", "manifest_id": ident,
                     "command": command, "params": params, "inputs": inputs, "seed": seed,
                     "seed_generated": seed_generated, "versions": versions(),
                     "timestamp": _timestamp(), "threads": threads})


def envelope(kind, manifest, result):
    return jsonable({"schema": f"netcontagion.{kind}/{SCHEMA_VERSION}",
                     "manifest_id": manifest["manifest_id"], "command": manifest["command"],
                     "result": result})


# ---------------------------------------------------------------- commands

def cmd_describe(cohort, nominations, layer="overall"):
    """Prevalence cross-tabs, popularity, same-week shares and representativeness."""
    check_layer(layer)
    net = build_network(cohort, nominations, layer)
    tables = []
    for trait in TRAIT_NAMES:
        for attr in DESCRIBE_ATTRIBUTES:
            if any(v is not None for v in cohort.column(attr)):
                tables.append(cross_tab(cohort, attr, trait).to_dict())
    ages = []
    for trait in TRAIT_NAMES:
        if any(v is not None for v in cohort.column("age")):
            ages.append(dict(numeric_comparison(cohort, "age", trait), trait=trait))
    popularity = [popularity_by_category(cohort, nominations, a, layer)
                  for a in DESCRIBE_ATTRIBUTES if any(v is not None for v in cohort.column(a))]
    try:
        rep = representativeness_summary(cohort, nominations)
    except UndefinedResultError:
        rep = None
    return jsonable({
        "layer": layer, "n_participants": len(cohort), "n_edges": net.n_edges,
        "prevalence_pct": {t: prevalence(cohort, t) for t in TRAIT_NAMES},
        "cross_tabs": tables, "age": ages, "popularity": popularity,
        "same_week": same_week_friend_proportion(cohort, nominations, layer),
        "representativeness": rep})


def _layers(layer):
    if layer in (None, "all"):
        return list(LAYERS)
    if isinstance(layer, str):
        layer = [x for x in layer.split(",") if x]
    for x in layer:
        check_layer(x)
    return list(layer)


def cmd_homophily(cohort, nominations, attrs, layer="overall", sims=1000, seed=0,
                  mode="marginal_shuffle", alternative="two-sided", restrict_value=None,
                  threads=None):
    """One permutation test per (layer, attribute); rows follow the layer order."""
    if mode not in MODES or alternative not in ALTERNATIVES:
        raise ConfigurationError("unknown mode or alternative")
    rows = []
    for lay in _layers(layer):
        net = build_network(cohort, nominations, lay)
        for attr in attrs:
            check_attribute(attr)
            res = homophily_permutation_test(net, attr, n_sims=sims, seed=seed, mode=mode,
                                             restrict_value=restrict_value,
                                             alternative=alternative, threads=threads)
            rows.append(res.to_dict())
    return jsonable({"rows": rows, "n_sims": sims, "seed": seed, "mode": mode,
                     "alternative": alternative})


def cmd_fit(cohort, nominations, model, layer="overall", trait="direct", attrs=("school",),
            separate=False, covariates=MODEL_COVARIATES, method="lag_covariate_least_squares",
            weight_mode="raw_adjacency", risk_attrs=MODEL_COVARIATES,
            exposure="any_positive_friend"):
    """Fit one of the four models on a layer and return its JSON result."""
    if model not in MODELS:
        raise ConfigurationError(f"model must be one of {MODELS}")
    net = build_network(cohort, nominations, layer)
    out = {"model": model, "layer": layer}
    if model == "ergm":
        attrs = list(attrs)
        if separate:
            fits = fit_dyadic_ergm_separately(net, attrs)
            out["fits"] = [dict(fits[a].to_dict(), attributes=[a]) for a in attrs]
        else:
            out["fits"] = [dict(fit_dyadic_ergm(net, attrs).to_dict(), attributes=attrs)]
    elif model == "autocorr":
        fit = fit_autocorrelation(net, resolve_trait(trait), list(covariates),
                                  weight_mode=weight_mode, method=method)
        out.update(trait=resolve_trait(trait), fit=fit.to_dict())
    elif model == "logit":
        res = carrier_vs_positive_friends(net, trait)
        out.update(trait=res.trait, result=res.to_dict())
    else:
        if exposure not in EXPOSURE_DEFINITIONS:
            raise ConfigurationError(f"exposure must be one of {EXPOSURE_DEFINITIONS}")
        tables = [category_relative_risk(net, a, trait, exposure).to_dict() for a in risk_attrs]
        out.update(trait=resolve_trait(trait), exposure_definition=exposure, tables=tables)
    return jsonable(out)


def _xml_escape(s):
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def cmd_export(cohort, nominations, fmt="edge-list", color_by=None, layer="overall"):
    """Serialise a layer as text; edges carry ``same_<color_by>`` when requested.

    Returns ``(text, summary)``.  Node order is the cohort order and edges are
    sorted, so output is deterministic.
    """
    if fmt not in EXPORT_FORMATS:
        raise ConfigurationError(f"format must be one of {EXPORT_FORMATS}")
    net = build_network(cohort, nominations, layer)
    ids = net.ids
    same = None
    flag = None
    if color_by is not None:
        check_attribute(color_by)
        flag = f"same_{color_by}"
        codes, _ = net.codes(color_by)
        e = net.edges
        same = (codes[e[:, 0]] >= 0) & (codes[e[:, 0]] == codes[e[:, 1]])
    node_fields = ["sex", "school", "carriage_direct", "carriage_enrichment", "spa_type"]
    if color_by and color_by not in node_fields:
        node_fields.append(color_by)
    lines = []
    if fmt == "edge-list":
        lines.append("source,target" + (f",{flag}" if flag else ""))
        for k, (i, j) in enumerate(net.edges):
            row = f"{ids[i]},{ids[j]}"
            lines.append(row + (f",{'true' if same[k] else 'false'}" if flag else ""))
    elif fmt == "dot":
        lines.append("graph contacts {")
        for p in cohort:
            attrs = ", ".join(f'{f}="{getattr(p, f)}"' for f in node_fields
                              if getattr(p, f) is not None)
            lines.append(f'  "{p.id}" [{attrs}];' if attrs else f'  "{p.id}";')
        for k, (i, j) in enumerate(net.edges):
            if flag:
                s = "true" if same[k] else "false"
                color = "red" if same[k] else "gray"
                lines.append(f'  "{ids[i]}" -- "{ids[j]}" [{flag}={s}, color={color}];')
            else:
                lines.append(f'  "{ids[i]}" -- "{ids[j]}";')
        lines.append("}")
    else:
        lines.append('<?xml version="1.0" encoding="UTF-8"?>')
        lines.append('<graphml xmlns="http://graphml.graphdrawing.org/xmlns">')
        for f in node_fields:
            lines.append(f'  <key id="{f}" for="node" attr.name="{f}" attr.type="string"/>')
        if flag:
            lines.append(f'  <key id="{flag}" for="edge" attr.name="{flag}" '
                         'attr.type="boolean"/>')
        lines.append(f'  <graph id="{layer}" edgedefault="undirected">')
        for p in cohort:
            data = "".join(f'<data key="{f}">{_xml_escape(str(getattr(p, f)))}</data>'
                           for f in node_fields if getattr(p, f) is not None)
            lines.append(f'    <node id="{_xml_escape(p.id)}">{data}</node>')
        for k, (i, j) in enumerate(net.edges):
            data = f'<data key="{flag}">{"true" if same[k] else "false"}</data>' if flag else ""
            lines.append(f'    <edge source="{_xml_escape(ids[i])}" '
                         f'target="{_xml_escape(ids[j])}">{data}</edge>')
        lines.append("  </graph>")
        lines.append("</graphml>")
    summary = {"format": fmt, "layer": layer, "n_nodes": net.n_nodes, "n_edges": net.n_edges,
               "color_by": color_by,
               "n_same": int(same.sum()) if same is not None else None}
    return "\n".join(lines) + "\n", summary


# ---------------------------------------------------------------- text rendering

def fmt_num(x, digits=3):
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if x != 0 and (abs(x) < 10 ** -digits or abs(x) >= 1e6):
            return f"{x:.{digits}e}"
        return f"{x:.{digits}f}"
    return str(x)


def fmt_p(p):
    if p is None:
        return "-"
    return "<0.001" if p < 0.001 else f"{p:.3f}"


def table(headers, rows, title=None, notes=()):
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(headers))]
    line = lambda r: "  ".join(c.rjust(w) if k else c.ljust(w)  # noqa: E731
                               for k, (c, w) in enumerate(zip(r, widths))).rstrip()
    out = [title] if title else []
    out += [line(cells[0]), "  ".join("-" * w for w in widths)]
    out += [line(r) for r in cells[1:]]
    out += [f"  {n}" for n in notes]
    return "\n".join(out) + "\n"


def render_describe(res):
    parts = [f"Layer: {res['layer']}   participants: {res['n_participants']}   "
             f"edges: {res['n_edges']}\n"]
    for trait, p in res["prevalence_pct"].items():
        parts.append(f"Prevalence {trait}: {fmt_num(p, 1)}%\n")
    for trait in TRAIT_NAMES:
        rows = []
        for t in res["cross_tabs"]:
            if t["column_variable"] != trait:
                continue
            pos = t["columns"].index(t["positive_column"]) if t["columns"] else 0
            for k, cat in enumerate(t["rows"]):
                counts = t["counts"][k]
                neg = sum(counts) - counts[pos]
                rows.append([f"{t['row_variable']}: {cat}", counts[pos], neg,
                             fmt_num(t["prevalence"][k], 1),
                             fmt_p(t["p_value"]) if k == 0 else "",
                             t["test"] if k == 0 else ""])
        parts.append(table(["Characteristic", "Positive", "Negative", "Prevalence %", "P-value",
                            "Test"], rows, title=f"\nCarriage by characteristic ({trait})"))
    rows = []
    for block in res["popularity"]:
        for k, r in enumerate(block["rows"]):
            rows.append([f"{block['attribute']}: {r['category']}", r["n"],
                         fmt_num(r["frequency_pct"], 1), fmt_num(r["mean"], 2),
                         fmt_num(r["isolation_pct"], 1), fmt_num(r["isolated_share_pct"], 1),
                         fmt_p(block["p_value"]) if k == 0 else ""])
    parts.append(table(["Characteristic", "n", "Freq %", "Mean popularity", "Isolated %",
                        "Share of isolated %", "P-value"], rows,
                       title=f"\nPopularity by characteristic ({res['layer']} layer)"))
    sw = res["same_week"]
    rows = [[r["week"], r["n_participants"], fmt_num(r["same_week_pct"], 2)] for r in sw["rows"]]
    parts.append(table(["Week", "Participants", "Same-week friends %"], rows,
                       title="\nFriends attending in the same week",
                       notes=[f"weighted average: {fmt_num(sw['weighted_average_pct'], 2)}%"]))
    rep = res["representativeness"]
    if rep:
        rows = [[k, v] for k, v in rep["histogram"].items()]
        parts.append(table(["Score", "Count"], rows, title="\nRepresentativeness",
                           notes=[f"mean {fmt_num(rep['mean'], 2)}, "
                                  f"{fmt_num(rep['pct_at_least_5'], 1)}% scored 5 or above"]))
    return "".join(parts)


def render_homophily(res):
    rows = []
    for r in res["rows"]:
        s = r["sims_summary"]
        rows.append([r["layer"], r["attribute"], r["n_edges"], r["observed"], fmt_num(s["min"], 0),
                     fmt_num(s["q1"], 1), fmt_num(s["median"], 1), fmt_num(s["q3"], 1),
                     fmt_num(s["max"], 0), fmt_num(s["sd"], 2), fmt_p(r["p_value"])])
    return table(["Layer", "Attribute", "Total relationships", "Equal relationships", "MIN",
                  "Q1", "Median", "Q3", "MAX", "SD", "P-value"], rows,
                 notes=[f"{res['n_sims']} simulations, seed {res['seed']}, mode {res['mode']}, "
                        f"{res['alternative']}"])


def _term_rows(terms, extra=None):
    rows = []
    for t in terms:
        row = [t["term"] if "term" in t else t["name"], fmt_num(t["estimate"]),
               fmt_num(t["std_error"]), fmt_p(t["p_value"])]
        if extra:
            row.append(extra(t))
        rows.append(row)
    return rows


def render_fit(res):
    model = res["model"]
    if model == "ergm":
        parts = []
        for f in res["fits"]:
            rows = _term_rows(f["terms"], lambda t: fmt_num(t.get("homophily_pct"), 2))
            parts.append(table(["Term", "Estimate", "Std Error", "P-value", "Homophily %"], rows,
                               notes=[f"dyads {f['n_dyads']}, edges {f['n_edges']}, "
                                      f"log-likelihood {fmt_num(f['log_likelihood'])}"]))
        return "\n".join(parts)
    if model == "autocorr":
        f = res["fit"]
        notes = [f"method {f['method']}, weights {f['weight_mode']}, n {f['n_obs']}"]
        if not f["beta_interpretable"]:
            notes.append("* covariate estimates are not individually interpretable")
        rows = _term_rows(f["terms"])
        for r in rows[1:]:
            r[0] += " *" if not f["beta_interpretable"] else ""
        return table(["Term", "Estimate", "Std Error", "P-value"], rows,
                     title=f"Autocorrelation model ({res['trait']})", notes=notes)
    if model == "logit":
        r = res["result"]
        rows = _term_rows(r["fit"]["terms"])
        lo, hi = r["ame_ci95"]
        notes = [f"average marginal effect per positive friend "
                 f"{fmt_num(r['average_marginal_effect'])} (95% CI {fmt_num(lo)} to "
                 f"{fmt_num(hi)})"]
        return table(["Term", "Estimate", "Std Error", "P-value"], rows,
                     title=f"Carrier status on positive friends ({res['trait']})", notes=notes)
    parts = []
    for t in res["tables"]:
        rows = []
        for r in t["rows"]:
            ci = "-" if r["is_reference"] else f"{fmt_num(r['ci95'][0], 2)}-" \
                                              f"{fmt_num(r['ci95'][1], 2)}"
            rows.append([r["category"] + (" (ref)" if r["is_reference"] else ""), r["n"],
                         r["n_exposed"], fmt_num(r["rr"], 2), ci, fmt_p(r["wald_p"])])
        parts.append(table(["Category", "n", "Exposed", "RR", "95% CI", "P-value"], rows,
                           title=f"{t['risk_attribute']} ({t['exposure_definition']})"))
    return "\n".join(parts)


RENDERERS = {"describe": render_describe, "homophily": render_homophily, "fit": render_fit}


def write_outputs(out_dir, kind, manifest, result, text=None):
    """Write ``<kind>.json``, ``<kind>.txt`` and ``manifest.json``; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = envelope(kind, manifest, result)
    validate(kind, doc)
    validate("manifest", manifest)
    paths = [out_dir / f"{kind}.json", out_dir / f"{kind}.txt", out_dir / "manifest.json"]
    paths[0].write_text(dumps(doc), encoding="utf-8")
    paths[1].write_text(text if text is not None else RENDERERS[kind](result), encoding="utf-8")
    paths[2].write_text(dumps(manifest), encoding="utf-8")
    return paths
