"""Command-line pipeline: candidates -> features -> sweep/classify/prompt/refine, plus synth."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import candidates as cand
from . import heuristics, llm, plots, records, refine as refine_mod, synth
from .errors import BackendError, ConfigError, ParseError, ValidationError
from .features import FeatureConfig, MAX_AREA_DEFINITION, compute_features_batch
from .geo import GEOGRAPHIC, parse_geojson, serialize_geojson
from .heuristics import HeuristicSpec, SweepReport


class _Parser(argparse.ArgumentParser):
    # Usage problems are validation errors: exit 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return doc


def _resolve(args: argparse.Namespace, config: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _csv_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in str(text).split(",") if str(x).strip())
    except ValueError as exc:
        raise ValidationError(f"bad numeric list {text!r}") from exc


def _read_featureset(path: str, crs_mode: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    return parse_geojson(data, crs_mode=crs_mode)


def _spec_from_args(args: argparse.Namespace, config: dict) -> HeuristicSpec:
    spec_text = _resolve(args, config, "spec", None)
    spec_from = _resolve(args, config, "spec_from", None)
    which = _resolve(args, config, "which", "best")
    if spec_text and spec_from:
        raise ValidationError("give either --spec or --spec-from, not both")
    if spec_text:
        return HeuristicSpec.parse(spec_text)
    if spec_from:
        report = SweepReport.from_dict(records.read_report(spec_from))
        if which == "worst":
            return report.worst().spec
        return report.best_spec
    raise ValidationError("a heuristic spec is required (--spec or --spec-from)")


def _make_backend(args: argparse.Namespace, config: dict):
    backend = _resolve(args, config, "backend", "mock")
    if backend == "mock":
        script = _resolve(args, config, "mock_script", None)
        default = _resolve(args, config, "mock_default", None)
        if script:
            return llm.MockBackend.from_file(script, default=default)
        if default is None:
            raise ConfigError("mock backend needs --mock-script or --mock-default")
        return llm.MockBackend(default=default)
    if backend == "http":
        return llm.HttpBackend.from_env()
    raise ValidationError(f"unknown backend {backend!r}")


def _gen_params(args: argparse.Namespace, config: dict, default_tokens: int) -> llm.GenerationParams:
    return llm.GenerationParams(
        temperature=float(_resolve(args, config, "temperature", 0.0)),
        top_p=float(_resolve(args, config, "top_p", 1.0)),
        max_new_tokens=int(_resolve(args, config, "max_new_tokens", default_tokens)),
    )


def _prompt_spec(args: argparse.Namespace, config: dict, default_mode: str, default_shots: str) -> llm.PromptSpec:
    kinds = _resolve(args, config, "kinds", None)
    kind_tuple = None
    if kinds:
        kind_tuple = tuple(k.strip() for k in str(kinds).split(",") if k.strip())
    return llm.PromptSpec(
        task=_resolve(args, config, "task", heuristics.JOIN),
        mode=_resolve(args, config, "mode", default_mode),
        shots=_resolve(args, config, "shots", default_shots),
        heuristic_kinds=kind_tuple,
    )


def _fewshot(args: argparse.Namespace, config: dict, spec: llm.PromptSpec, crs_mode: str):
    if spec.shots != "few":
        return None
    train_path = _resolve(args, config, "train", None)
    if not train_path:
        raise ValidationError("few-shot prompting needs --train with labeled exemplar pairs")
    pool = records.read_pairs(train_path, crs_mode)
    positive, negative = llm.pick_fewshot(
        pool,
        positive_id=_resolve(args, config, "pos_id", None),
        negative_id=_resolve(args, config, "neg_id", None),
    )
    return (positive, negative)


def _templates(args: argparse.Namespace, config: dict) -> llm.TemplateSet | None:
    directory = _resolve(args, config, "templates", None)
    return llm.TemplateSet(directory) if directory else None


def _attach_labels(pairs: list[cand.PairRecord], labels_path: str) -> list[cand.PairRecord]:
    by_pair: dict[str, int] = {}
    by_ids: dict[tuple[str, str], int] = {}
    for row in records.read_jsonl(labels_path):
        if "label" not in row or row["label"] is None:
            continue
        label = int(row["label"])
        if "pair_id" in row:
            by_pair[str(row["pair_id"])] = label
        if "left_id" in row and "right_id" in row:
            by_ids[(str(row["left_id"]), str(row["right_id"]))] = label
    out = []
    for p in pairs:
        label = by_pair.get(p.pair_id, by_ids.get((p.left_id, p.right_id)))
        out.append(replace(p, label=label) if label is not None else p)
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_candidates(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    crs = _resolve(args, config, "crs", GEOGRAPHIC)
    if args.candidates_cmd == "join":
        roads = _read_featureset(args.roads, crs)
        sidewalks = _read_featureset(args.sidewalks, crs)
        allowed = _resolve(args, config, "allowed_types", None)
        allowed_set = (
            frozenset(t.strip() for t in str(allowed).split(",") if t.strip())
            if allowed
            else cand.DEFAULT_ROAD_TYPES
        )
        roads = cand.filter_roads(roads, allowed_set)
        buffer_m = float(_resolve(args, config, "buffer", cand.DEFAULT_JOIN_BUFFER_M))
        pairs = cand.join_candidates(roads, sidewalks, buffer_m)
    else:
        left = _read_featureset(args.left, crs)
        right = _read_featureset(args.right, crs)
        pairs = cand.union_candidates(left, right)
    records.write_pairs(args.output, pairs)
    print(f"wrote {len(pairs)} candidate pairs to {args.output}")
    return 0


def cmd_features(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    crs = _resolve(args, config, "crs", GEOGRAPHIC)
    cfg = FeatureConfig(
        overlap_buffer_m=float(_resolve(args, config, "buffer_m", 2.0)),
        angle_mode=_resolve(args, config, "angle_mode", "pairwise"),
    )
    pairs = records.read_pairs(args.pairs, crs)
    filled, errors = compute_features_batch(pairs, cfg, crs)
    labels_path = _resolve(args, config, "labels", None)
    if labels_path:
        filled = _attach_labels(filled, labels_path)
    records.write_pairs(args.output, filled)
    for err in errors:
        print(f"feature error on {err.pair_id}: {err.message}", file=sys.stderr)
    if args.report:
        records.write_report(
            args.report,
            "features_report",
            {
                "n_input": len(pairs),
                "n_featured": len(filled),
                "errors": [{"pair_id": e.pair_id, "message": e.message} for e in errors],
            },
            config={"crs": crs, **cfg.to_dict()},
        )
    if args.plots:
        written = plots.plot_feature_distributions(filled, args.plots)
        print(f"wrote {len(written)} figures to {args.plots}")
    print(f"wrote {len(filled)} featured pairs to {args.output} ({len(errors)} errors)")
    return 0


def _grids_from_args(args: argparse.Namespace, config: dict, task: str) -> dict[str, tuple[float, ...]]:
    grids = dict(heuristics.DEFAULT_GRIDS[task])
    for kind, flag in ((heuristics.PARALLEL, "grid_p"), (heuristics.CLEARANCE, "grid_c"), (heuristics.OVERLAP, "grid_o")):
        override = _resolve(args, config, flag, None)
        if override is not None:
            grids[kind] = _csv_floats(override)
    if task == heuristics.UNION:
        grids.pop(heuristics.CLEARANCE, None)
    return grids


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    crs = _resolve(args, config, "crs", GEOGRAPHIC)
    task = _resolve(args, config, "task", heuristics.JOIN)
    pairs = records.read_pairs(args.train, crs)
    grids = _grids_from_args(args, config, task)
    specs = heuristics.enumerate_specs(task, grids)
    report = heuristics.sweep(pairs, specs, task)
    doc_config = {
        "task": task,
        "grids": {k: list(v) for k, v in grids.items()},
        "max_area_definition": MAX_AREA_DEFINITION,
    }
    records.write_report(args.output, "sweep_report", report.to_dict(), config=doc_config)
    if args.plots:
        written = plots.plot_sweep_curves(report, args.plots)
        print(f"wrote {len(written)} figures to {args.plots}")
    print(
        f"swept {len(specs)} specs on {report.n_pairs} pairs; "
        f"best {report.best_spec.describe()} at accuracy {report.best_accuracy:.4f}"
    )
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    crs = _resolve(args, config, "crs", GEOGRAPHIC)
    spec = _spec_from_args(args, config)
    pairs = records.read_pairs(args.pairs, crs)
    if not pairs:
        raise ValidationError("no pairs to classify")
    preds = []
    for p in pairs:
        if p.features is None:
            raise ValidationError(f"pair {p.pair_id} has no features; run the features step first")
        preds.append(heuristics.predict(p.features, spec))
    records.write_jsonl(args.output, ({"pair_id": p.pair_id, "label": y} for p, y in zip(pairs, preds)))
    doc_config = {"spec": spec.to_dict(), "crs": crs}
    if all(p.label is not None for p in pairs):
        report = heuristics.evaluate(preds, [p.label for p in pairs])
        if args.report:
            records.write_report(args.report, "eval_report", report.to_dict(), config=doc_config)
        print(f"classified {len(pairs)} pairs with {spec.describe()}; accuracy {report.accuracy:.4f}")
    else:
        if args.report:
            records.write_report(
                args.report, "classify_report", {"n": len(pairs), "labeled": False}, config=doc_config
            )
        print(f"classified {len(pairs)} pairs with {spec.describe()} (no labels)")
    return 0


def cmd_prompt(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    crs = _resolve(args, config, "crs", GEOGRAPHIC)
    spec = _prompt_spec(args, config, default_mode="plain", default_shots="zero")
    params = _gen_params(args, config, llm.CLASSIFY_MAX_TOKENS)
    backend = _make_backend(args, config)
    pairs = records.read_pairs(args.pairs, crs)
    fewshot = _fewshot(args, config, spec, crs)
    result = llm.run_inference(
        pairs,
        spec,
        params,
        backend,
        fewshot=fewshot,
        max_in_flight=int(_resolve(args, config, "max_in_flight", 4)),
        parse_policy=_resolve(args, config, "parse_policy", "incorrect"),
        templates=_templates(args, config),
    )
    records.write_jsonl(args.output, (e.to_dict() for e in result.exchanges))
    payload: dict = {
        "n_pairs": len(pairs),
        "parse_failures": result.parse_failures,
        "prompt_spec": spec.to_dict(),
        "generation_params": params.to_dict(),
        "backend": backend.backend_id,
    }
    if result.report is not None:
        payload["eval"] = result.report.to_dict()
        print(f"prompted {len(pairs)} pairs; accuracy {result.report.accuracy:.4f}")
    else:
        print(f"prompted {len(pairs)} pairs (no labels)")
    if args.report:
        records.write_report(
            args.report,
            "prompt_report",
            payload,
            config={
                "crs": crs,
                "parse_policy": _resolve(args, config, "parse_policy", "incorrect"),
                **spec.to_dict(),
                **params.to_dict(),
            },
        )
    return 0


def cmd_refine(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    crs = _resolve(args, config, "crs", GEOGRAPHIC)
    spec = _prompt_spec(args, config, default_mode="features", default_shots="few")
    params = _gen_params(args, config, llm.CLASSIFY_MAX_TOKENS)
    backend = _make_backend(args, config)
    pairs = records.read_pairs(args.pairs, crs)
    initial_kind = _resolve(args, config, "initial", refine_mod.RANDOM)
    if initial_kind == refine_mod.HEURISTIC:
        source = refine_mod.InitialSource(kind=initial_kind, spec=_spec_from_args(args, config))
    else:
        source = refine_mod.InitialSource(kind=initial_kind, seed=int(_resolve(args, config, "seed", 0)))
    fewshot = _fewshot(args, config, spec, crs)
    result = refine_mod.run_refine(
        pairs,
        source,
        spec,
        backend,
        params=params,
        fewshot=fewshot,
        max_in_flight=int(_resolve(args, config, "max_in_flight", 4)),
        templates=_templates(args, config),
    )
    records.write_jsonl(args.output, (r.to_dict() for r in result.records))
    payload: dict = {
        "n_pairs": len(pairs),
        "parse_failures": result.parse_failures,
        "initial_source": source.to_dict(),
        "prompt_spec": spec.to_dict(),
        "backend": backend.backend_id,
    }
    if result.report is not None:
        payload["eval"] = result.report.to_dict()
        print(f"refined {len(pairs)} pairs; accuracy {result.report.accuracy:.4f}")
    else:
        print(f"refined {len(pairs)} pairs (no labels)")
    if args.report:
        records.write_report(
            args.report,
            "refine_report",
            payload,
            config={"crs": crs, **spec.to_dict(), **source.to_dict(), **params.to_dict()},
        )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if args.synth_cmd == "gen":
        seed = int(_resolve(args, config, "seed", 0))
        instances = synth.generate(args.task, int(args.n), seed)
        records.write_instances(args.output, instances)
        print(f"wrote {len(instances)} {args.task} instances to {args.output}")
        return 0
    if args.synth_cmd == "grade":
        instances = records.read_instances(args.instances)
        answers = records.read_answers(args.answers)
        report = synth.grade(instances, answers)
        doc = records.write_report(
            args.output, "synth_grade_report", report.to_dict(), config={"n": len(instances)}
        )
        for kind, stats in doc["per_kind"].items():
            print(f"{kind}: accuracy {stats['accuracy']:.4f} ({stats['correct']}/{stats['n']})")
        return 0
    # planted
    seed = int(_resolve(args, config, "seed", 0))
    rule_text = _resolve(args, config, "rule", None)
    cfg = synth.PlantedPairConfig(
        n=int(args.n),
        rule=HeuristicSpec.parse(rule_text) if rule_text else synth.DEFAULT_PLANTED_RULE,
        seed=seed,
        noise_m=float(_resolve(args, config, "noise_m", 0.3)),
        feature_config=FeatureConfig(
            overlap_buffer_m=float(_resolve(args, config, "buffer_m", 2.0))
        ),
    )
    pairs = synth.generate_planted_pairs(cfg)
    records.write_pairs(args.pairs_out, pairs)
    print(f"wrote {len(pairs)} planted pairs to {args.pairs_out}")
    if args.walks_out or args.roads_out:
        walks, roads = synth.planted_feature_sets(pairs)
        if args.walks_out:
            Path(args.walks_out).write_text(serialize_geojson(walks) + "\n", encoding="utf-8")
            print(f"wrote sidewalk features to {args.walks_out}")
        if args.roads_out:
            Path(args.roads_out).write_text(serialize_geojson(roads) + "\n", encoding="utf-8")
            print(f"wrote road features to {args.roads_out}")
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    crs = _resolve(args, config, "crs", GEOGRAPHIC)
    ratios = _csv_floats(_resolve(args, config, "ratios", "0.8,0.1,0.1"))
    if len(ratios) != 3:
        raise ValidationError("ratios must be three comma-separated numbers")
    spec = cand.SplitSpec(train=ratios[0], val=ratios[1], test=ratios[2], seed=int(_resolve(args, config, "seed", 0)))
    pairs = records.read_pairs(args.pairs, crs)
    train, val, test = cand.split_dataset(pairs, spec)
    for name, chunk in (("train", train), ("val", val), ("test", test)):
        path = f"{args.out_prefix}.{name}.jsonl"
        records.write_pairs(path, chunk)
        print(f"wrote {len(chunk)} pairs to {path}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    golds: dict[str, int] = {}
    for row in records.read_jsonl(args.gold):
        if row.get("label") is not None and "pair_id" in row:
            golds[str(row["pair_id"])] = int(row["label"])
    if not golds:
        raise ValidationError(f"no labeled rows in {args.gold}")
    preds: list[int] = []
    labels: list[int] = []
    for row in records.read_jsonl(args.pred):
        pid = str(row.get("pair_id"))
        if pid not in golds:
            raise ValidationError(f"prediction for unknown pair {pid!r}")
        if row.get("label") is None:
            raise ValidationError(f"prediction row for {pid!r} has no label")
        preds.append(int(row["label"]))
        labels.append(golds[pid])
    report = heuristics.evaluate(preds, labels)
    if args.output:
        records.write_report(args.output, "eval_report", report.to_dict(), config={})
    print(f"accuracy {report.accuracy:.4f} over {report.n} pairs (tp={report.tp} fp={report.fp} tn={report.tn} fn={report.fn})")
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override file values")
    p.add_argument("--crs", choices=("geographic", "planar"), default=None,
                   help="coordinate interpretation of the inputs (default geographic)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geopair", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_cand = sub.add_parser("candidates", help="generate candidate pairs")
    cand_sub = p_cand.add_subparsers(dest="candidates_cmd", required=True)
    p_join = cand_sub.add_parser("join", help="buffered sidewalk-road spatial join")
    p_join.add_argument("--roads", required=True)
    p_join.add_argument("--sidewalks", required=True)
    p_join.add_argument("--buffer", type=float, default=None, help="road buffer in meters (default 10)")
    p_join.add_argument("--allowed-types", dest="allowed_types", default=None,
                        help="comma-separated highway types to keep")
    p_join.add_argument("-o", "--output", required=True)
    _add_common(p_join)
    p_join.set_defaults(func=cmd_candidates)
    p_union = cand_sub.add_parser("union", help="overlapping-annotation pairs")
    p_union.add_argument("--left", required=True)
    p_union.add_argument("--right", required=True)
    p_union.add_argument("-o", "--output", required=True)
    _add_common(p_union)
    p_union.set_defaults(func=cmd_candidates)

    p_feat = sub.add_parser("features", help="compute pair features")
    p_feat.add_argument("--pairs", required=True)
    p_feat.add_argument("--buffer-m", dest="buffer_m", type=float, default=None,
                        help="overlap buffer width in meters (default 2)")
    p_feat.add_argument("--angle-mode", dest="angle_mode", choices=("pairwise", "dominant"), default=None)
    p_feat.add_argument("--labels", default=None, help="JSONL with gold labels to attach")
    p_feat.add_argument("--plots", default=None, help="directory for feature-distribution figures")
    p_feat.add_argument("--report", default=None)
    p_feat.add_argument("-o", "--output", required=True)
    _add_common(p_feat)
    p_feat.set_defaults(func=cmd_features)

    p_sweep = sub.add_parser("sweep", help="exhaustive threshold grid search")
    p_sweep.add_argument("--train", required=True)
    p_sweep.add_argument("--task", choices=heuristics.TASKS, default=None)
    p_sweep.add_argument("--grid-p", dest="grid_p", default=None)
    p_sweep.add_argument("--grid-c", dest="grid_c", default=None)
    p_sweep.add_argument("--grid-o", dest="grid_o", default=None)
    p_sweep.add_argument("--plots", default=None, help="directory for threshold-accuracy figures")
    p_sweep.add_argument("-o", "--output", required=True)
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_cls = sub.add_parser("classify", help="apply one heuristic spec")
    p_cls.add_argument("--pairs", required=True)
    p_cls.add_argument("--spec", default=None, help='compact spec, e.g. "p=5,c=2"')
    p_cls.add_argument("--spec-from", dest="spec_from", default=None, help="sweep report JSON")
    p_cls.add_argument("--which", choices=("best", "worst"), default=None)
    p_cls.add_argument("--report", default=None)
    p_cls.add_argument("-o", "--output", required=True)
    _add_common(p_cls)
    p_cls.set_defaults(func=cmd_classify)

    for name, func, default_help in (
        ("prompt", cmd_prompt, "classify pairs with an LLM"),
        ("refine", cmd_refine, "review-and-refine with an LLM"),
    ):
        p_llm = sub.add_parser(name, help=default_help)
        p_llm.add_argument("--pairs", required=True)
        p_llm.add_argument("--task", choices=heuristics.TASKS, default=None)
        p_llm.add_argument("--mode", choices=llm.MODES, default=None)
        p_llm.add_argument("--shots", choices=llm.SHOTS, default=None)
        p_llm.add_argument("--kinds", default=None, help="heuristic kinds for hints/features, e.g. p,c,o")
        p_llm.add_argument("--backend", choices=("mock", "http"), default=None)
        p_llm.add_argument("--mock-script", dest="mock_script", default=None)
        p_llm.add_argument("--mock-default", dest="mock_default", default=None)
        p_llm.add_argument("--train", default=None, help="labeled pool for few-shot exemplars")
        p_llm.add_argument("--pos-id", dest="pos_id", default=None)
        p_llm.add_argument("--neg-id", dest="neg_id", default=None)
        p_llm.add_argument("--max-in-flight", dest="max_in_flight", type=int, default=None)
        p_llm.add_argument("--temperature", type=float, default=None)
        p_llm.add_argument("--top-p", dest="top_p", type=float, default=None)
        p_llm.add_argument("--max-new-tokens", dest="max_new_tokens", type=int, default=None)
        p_llm.add_argument("--templates", default=None, help="directory overriding packaged prompt templates")
        p_llm.add_argument("--report", default=None)
        p_llm.add_argument("-o", "--output", required=True)
        if name == "prompt":
            p_llm.add_argument("--parse-policy", dest="parse_policy", choices=llm.PARSE_POLICIES, default=None)
        else:
            p_llm.add_argument("--initial", choices=(refine_mod.RANDOM, refine_mod.HEURISTIC), default=None)
            p_llm.add_argument("--seed", type=int, default=None)
            p_llm.add_argument("--spec", default=None)
            p_llm.add_argument("--spec-from", dest="spec_from", default=None)
            p_llm.add_argument("--which", choices=("best", "worst"), default=None)
        _add_common(p_llm)
        p_llm.set_defaults(func=func)

    p_synth = sub.add_parser("synth", help="synthetic benchmark and fixtures")
    synth_sub = p_synth.add_subparsers(dest="synth_cmd", required=True)
    p_gen = synth_sub.add_parser("gen", help="generate geometry task instances")
    p_gen.add_argument("--task", choices=synth.TASK_KINDS, required=True)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("-o", "--output", required=True)
    _add_common(p_gen)
    p_gen.set_defaults(func=cmd_synth)
    p_grade = synth_sub.add_parser("grade", help="grade answers against instance truths")
    p_grade.add_argument("--instances", required=True)
    p_grade.add_argument("--answers", required=True)
    p_grade.add_argument("-o", "--output", required=True)
    _add_common(p_grade)
    p_grade.set_defaults(func=cmd_synth)
    p_planted = synth_sub.add_parser("planted", help="planted-rule labeled pair fixture")
    p_planted.add_argument("--n", type=int, required=True)
    p_planted.add_argument("--seed", type=int, default=None)
    p_planted.add_argument("--rule", default=None, help='planted rule, e.g. "p=5,c=2"')
    p_planted.add_argument("--noise-m", dest="noise_m", type=float, default=None)
    p_planted.add_argument("--buffer-m", dest="buffer_m", type=float, default=None)
    p_planted.add_argument("--pairs-out", dest="pairs_out", required=True)
    p_planted.add_argument("--walks-out", dest="walks_out", default=None)
    p_planted.add_argument("--roads-out", dest="roads_out", default=None)
    _add_common(p_planted)
    p_planted.set_defaults(func=cmd_synth)

    p_split = sub.add_parser("split", help="seeded train/val/test split")
    p_split.add_argument("--pairs", required=True)
    p_split.add_argument("--ratios", default=None, help="e.g. 0.8,0.1,0.1")
    p_split.add_argument("--seed", type=int, default=None)
    p_split.add_argument("--out-prefix", dest="out_prefix", required=True)
    _add_common(p_split)
    p_split.set_defaults(func=cmd_split)

    p_eval = sub.add_parser("eval", help="score a prediction file against gold labels")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--gold", required=True)
    p_eval.add_argument("-o", "--output", default=None)
    _add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ParseError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
