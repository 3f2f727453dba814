"""Command-line interface.

Subcommands::

    autorater corpus build --manifest M --out DIR
    autorater corpus synth --spec S --seed N --out DIR
    autorater corpus split --corpus DIR --score total --seed N [--out FILE]
    autorater train --model par_text_img --score total --repeats 10 --out DIR
    autorater explain --bundle B --registry DIR --ids id1 id2 --out DIR
    autorater serve --registry DIR --port 8000
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

MODEL_CHOICES = ("par", "text", "img", "par_text", "par_img", "img_text", "par_text_img")
_MODEL_MODALITIES = {
    "par": ("parametric",),
    "text": ("text",),
    "img": ("image",),
    "par_text": ("parametric", "text"),
    "par_img": ("parametric", "image"),
    "img_text": ("text", "image"),
    "par_text_img": ("parametric", "text", "image"),
}


def _cmd_corpus_build(args) -> int:
    from autorater.corpus.manifest import load_manifest_with_report
    from autorater.corpus.processed import save_processed
    from autorater.corpus.schema import build_schema
    from autorater.corpus import ComposeConfig, process_records

    records, taxonomy, exclusions = load_manifest_with_report(args.manifest)
    for exc in exclusions:
        print(f"excluded {exc.record_id}: {'; '.join(exc.reasons)}", file=sys.stderr)
    print(f"{len(records)} records retained, {len(exclusions)} excluded")
    if not records:
        print("nothing to build", file=sys.stderr)
        return 1
    schema = build_schema(records, taxonomy=taxonomy or None)
    corpus = process_records(records, schema, ComposeConfig(), base_dir=Path(args.manifest).parent)
    save_processed(corpus, args.out)
    print(f"processed corpus written to {args.out} (encoded_dim={schema.encoded_dim})")
    return 0


def _cmd_corpus_synth(args) -> int:
    from autorater.corpus.synthetic import SyntheticSpec, generate_synthetic_corpus, materialize_corpus

    overrides = {}
    if args.spec:
        overrides = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    if "shares" in overrides:
        overrides["shares"] = tuple(overrides["shares"])
    if "tile_hw" in overrides:
        overrides["tile_hw"] = tuple(overrides["tile_hw"])
    spec = SyntheticSpec(**overrides)
    records, truth = generate_synthetic_corpus(spec, seed=args.seed)
    manifest = materialize_corpus(records, args.out, taxonomy=spec.schema_taxonomy())
    truth_path = Path(args.out) / "truth.json"
    truth_path.write_text(
        json.dumps(
            {
                "shares": list(truth.shares),
                "score": [float(v) for v in truth.score],
                "components": {k: [float(x) for x in v] for k, v in truth.components.items()},
            }
        ),
        encoding="utf-8",
    )
    print(f"{len(records)} synthetic records at {manifest} (truth: {truth_path})")
    return 0


def _cmd_corpus_split(args) -> int:
    from autorater.corpus.manifest import load_manifest
    from autorater.corpus.splits import stratified_split

    manifest = Path(args.corpus) / "manifest.json" if Path(args.corpus).is_dir() else Path(args.corpus)
    records = load_manifest(manifest, check_images=False)
    split = stratified_split(records, args.score, tuple(args.ratios), seed=args.seed)
    out = Path(args.out) if args.out else Path(args.corpus) / f"split_{args.score}_{args.seed}.json"
    split.save(out)
    print(f"split written to {out}: {len(split.train_ids)}/{len(split.val_ids)}/{len(split.test_ids)}")
    return 0


def _cmd_train(args) -> int:
    from autorater.experiments import (
        BenchmarkConfig,
        build_benchmark,
        make_bundle,
        run_comparison_suite,
    )
    from autorater.models.bundle import save_bundle
    from autorater.models.fusion import model_display_name
    from autorater.training import ablation_table, ablation_to_csv

    config = BenchmarkConfig(n=args.corpus_size, score_name=args.score, corpus_seed=args.corpus_seed)
    if args.max_epochs:
        config.unimodal = dataclasses.replace(config.unimodal, max_epochs=args.max_epochs)
    bench = build_benchmark(config)
    modalities = _MODEL_MODALITIES[args.model]
    combos = (modalities,) if len(modalities) > 1 else ()

    best: dict[str, tuple] = {}  # model name -> (test_r2, seed, model)

    def keep_best(name, seed, result, model):
        if name not in best or result.test_r2 > best[name][0]:
            best[name] = (result.test_r2, seed, model)

    reports = run_comparison_suite(
        bench, n_repeats=args.repeats, modalities=tuple(modalities), combos=combos, verbose=True, on_result=keep_best
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, report in reports.items():
        (out / f"report_{name}.json").write_text(json.dumps(report.to_json(), indent=2), encoding="utf-8")
        print(f"{name}: mean R2 {report.mean_r2:.4f} +- {report.std_r2:.4f}")
    if len(reports) >= 2:
        table = ablation_table(list(reports.values()))
        (out / "comparison.json").write_text(json.dumps(table, indent=2), encoding="utf-8")
        (out / "comparison.csv").write_text(ablation_to_csv(table), encoding="utf-8")

    # persist the best checkpoint of the requested model into the registry
    target = model_display_name(modalities)
    r2, seed, model = best[target]
    bundle = make_bundle(
        model,
        bench.corpus,
        bench.split,
        args.score,
        bundle_id=f"{args.score}-{args.model}",
        family="trained",
        tokenizer=bench.tokenizer,
        metrics={"test_r2": r2, "seed": seed, "mean_r2": reports[target].mean_r2, "std_r2": reports[target].std_r2},
    )
    path = save_bundle(bundle, out / "registry")
    print(f"best {target} checkpoint (seed {seed}, test R2 {r2:.4f}) saved to {path}")
    return 0


def _cmd_explain(args) -> int:
    from autorater.interpret.reports import explain_records_to_dir
    from autorater.models.bundle import load_bundle

    bundle = load_bundle(Path(args.registry) / args.bundle)
    print(f"loaded bundle {bundle.bundle_id} ({bundle.kind}, score={bundle.score_name})")
    corpus = None
    if args.corpus:
        from autorater.corpus.processed import load_processed

        corpus = load_processed(args.corpus)
    written = explain_records_to_dir(
        bundle,
        Path(args.out),
        corpus=corpus,
        ids=args.ids,
        limit=args.limit,
        samples=args.samples,
    )
    print(f"wrote {written} attribution artifacts to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from autorater.service import create_app

    app = create_app(args.registry)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autorater", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("corpus", help="corpus construction and splitting")
    corpus_sub = corpus.add_subparsers(dest="corpus_command", required=True)

    p = corpus_sub.add_parser("build", help="process a manifest into a cached corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_corpus_build)

    p = corpus_sub.add_parser("synth", help="generate a synthetic benchmark corpus")
    p.add_argument("--spec", help="JSON file of SyntheticSpec overrides")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_corpus_synth)

    p = corpus_sub.add_parser("split", help="stratified train/val/test split")
    p.add_argument("--corpus", required=True, help="corpus dir or manifest path")
    p.add_argument("--score", default="total")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", type=float, nargs=3, default=[0.8, 0.1, 0.1])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_corpus_split)

    p = sub.add_parser("train", help="train models on a synthetic benchmark")
    p.add_argument("--model", choices=MODEL_CHOICES, required=True)
    p.add_argument("--score", default="total")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--corpus-size", type=int, default=2000)
    p.add_argument("--corpus-seed", type=int, default=7)
    p.add_argument("--max-epochs", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("explain", help="attribution artifacts for a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--registry", default="registry")
    p.add_argument("--corpus", help="processed corpus cache dir; defaults to the bundle's stored backgrounds")
    p.add_argument("--ids", nargs="*", help="record ids to attribute (default: first --limit)")
    p.add_argument("--limit", type=int, default=8)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("serve", help="run the prediction service")
    p.add_argument("--registry", default="registry")
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
