"""Command-line pipeline driver: generate, score, select, analyze, report.

Exit codes: 0 success, 1 usage or config error, 2 infeasible selection,
3 backend failure.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from pathlib import Path
from urllib.parse import urlparse

from . import corpus_io, lexicon, phrases, promptgen, scoring, selection
from .config import ConfigError, PipelineConfig, load_config
from .llm import GenerationSpec, LLMBatchError, ScriptGenerator
from .model import Emotion, Session
from .phoneme import (
    EntropyConfig,
    KanaParseError,
    NGramStats,
    count_ngrams,
    coverage_gaps,
    extended_entropy,
    kana_to_phonemes,
    load_mora_table,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_BACKEND = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _credentials(config: PipelineConfig) -> str | None:
    """API key from the environment; loopback endpoints may run keyless."""
    key = os.environ.get(config.api_key_env, "")
    if key:
        return key
    host = urlparse(config.endpoint).hostname or ""
    if host in ("localhost", "127.0.0.1", "::1"):
        return "local-stub"
    return None


def _build_specs(config: PipelineConfig) -> list[GenerationSpec]:
    dictionary = lexicon.load_dictionary(config.dictionary, config.blocklist)
    routing_table = dict(lexicon.DEFAULT_ROUTING)
    routing_table.update(config.routing or {})
    routing = lexicon.EmotionPolarityRouting(routing_table)
    catalog = phrases.load_phrases(config.phrases)
    master = random.Random(config.rng_seed)
    specs: list[GenerationSpec] = []
    for emotion in Emotion:
        for session in (Session.REGULAR, Session.PHRASE_FREE):
            used_seeds: set[str] = set()
            used_phrases: set[str] = set()
            for _ in range(config.scripts_per_bucket):
                try:
                    seed = lexicon.sample_seed(
                        dictionary, emotion, routing, master.randrange(2**31), used_seeds
                    )
                except lexicon.BucketExhaustedError:
                    used_seeds.clear()  # dictionary smaller than the batch; start a new pass
                    seed = lexicon.sample_seed(
                        dictionary, emotion, routing, master.randrange(2**31), used_seeds
                    )
                used_seeds.add(seed.surface)
                phrase = None
                if session is Session.REGULAR:
                    try:
                        phrase = phrases.sample_phrase(
                            catalog, emotion, master.randrange(2**31), used_phrases
                        )
                    except phrases.PhraseCatalogError:
                        used_phrases.clear()
                        phrase = phrases.sample_phrase(
                            catalog, emotion, master.randrange(2**31), used_phrases
                        )
                    used_phrases.add(phrase.id)
                specs.append(
                    GenerationSpec(emotion=emotion, session=session, seed=seed, phrase=phrase)
                )
    return specs


def cmd_generate(config: PipelineConfig, out_path: Path | None) -> int:
    credentials = _credentials(config)
    if credentials is None:
        return _fail(
            f"no API key: set the {config.api_key_env} environment variable", EXIT_USAGE
        )
    try:
        exemplars = promptgen.load_exemplars(config.exemplars)
        specs = _build_specs(config)
    except (ValueError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    generator = ScriptGenerator(
        endpoint=config.endpoint,
        credentials=credentials,
        model_name=config.model_name,
        exemplars=exemplars,
        cache_dir=config.cache_dir,
        temperature=config.temperature,
        max_tokens=config.max_tokens,
        exemplar_count=config.exemplar_count,
    )
    try:
        scripts, report = generator.run_batch(specs, concurrency=config.concurrency)
    except LLMBatchError as exc:
        return _fail(str(exc), EXIT_BACKEND)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out = out_path or config.output_dir / "candidates.json"
    # cached_hits varies between cold and warm runs, so the run report lives
    # beside the data artifact, keeping reruns byte-identical
    corpus_io.write_scripts(scripts, out, rng_seed=config.rng_seed)
    corpus_io.write_json(
        {"rng_seed": config.rng_seed, **report.as_dict()},
        out.with_name(out.stem + ".report.json"),
    )
    print(
        f"generated {len(scripts)} scripts "
        f"(requested {report.requested}, cached {report.cached_hits}, "
        f"deduplicated {report.deduplicated}, failures {report.failures}) -> {out}"
    )
    return EXIT_OK


def _backend(config: PipelineConfig) -> scoring.ScorerBackend:
    if config.backend == "baseline":
        return scoring.ScorerBackend.baseline()
    if config.backend == "precomputed":
        return scoring.ScorerBackend.precomputed(config.precomputed)
    return scoring.ScorerBackend.remote(config.remote_url)


def cmd_score(config: PipelineConfig, candidates_path: Path, out_path: Path | None) -> int:
    try:
        scripts, meta = corpus_io.read_scripts(candidates_path)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"cannot read candidates {candidates_path}: {exc}", EXIT_USAGE)
    try:
        pool = scoring.attach_scores(scripts, _backend(config))
    except scoring.ScoringError as exc:
        return _fail(str(exc), EXIT_BACKEND)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out = out_path or config.output_dir / "scored.json"
    corpus_io.write_scripts(
        list(pool.scripts),
        out,
        rng_seed=int(meta.get("rng_seed", config.rng_seed)),
        normalized=pool.normalized,
        report={"scored": len(pool.scripts), "dropped": list(pool.dropped)},
    )
    print(f"scored {len(pool.scripts)} scripts ({len(pool.dropped)} dropped) -> {out}")
    return EXIT_OK


def cmd_select(
    config: PipelineConfig,
    scored_path: Path,
    fillers_path: Path | None,
    out_dir: Path | None,
) -> int:
    try:
        scripts, meta = corpus_io.read_scripts(scored_path)
        if config.mora_table is not None:
            from .phoneme import set_default_table

            set_default_table(load_mora_table(config.mora_table))
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"cannot read scored file {scored_path}: {exc}", EXIT_USAGE)
    rng_seed = int(meta.get("rng_seed", config.rng_seed))
    out = out_dir or config.output_dir
    out.mkdir(parents=True, exist_ok=True)

    if config.preset == "custom":
        quota_sets = [selection.QuotaConfig(name="custom", quotas=dict(config.custom_quotas))]
    else:
        preset_names = ["core", "extra"] if config.preset == "both" else [config.preset]
        quota_sets = [selection.QuotaConfig.preset(name) for name in preset_names]

    plans = []
    pool = scripts
    for quotas in quota_sets:
        if config.scale_divisor > 1:
            quotas = quotas.scaled(config.scale_divisor)
        plan = selection.select(pool, quotas)
        plans.append(plan)
        selected = plan.selected_ids()
        pool = [s for s in pool if s.id not in selected]

    if fillers_path is not None:
        try:
            fillers, _ = corpus_io.read_scripts(fillers_path)
            plans[0] = selection.inject_rare(
                plans[0], fillers, max_injections=config.max_injections
            )
        except (OSError, ValueError, KeyError) as exc:
            return _fail(f"cannot apply gap fillers: {exc}", EXIT_USAGE)
        for filler_id, victim_id in zip(plans[0].injected, plans[0].displaced):
            print(f"injected {filler_id} (evicted {victim_id})")

    violations: list[str] = []
    for i, plan in enumerate(plans):
        others = [p for j, p in enumerate(plans) if j != i]
        violations.extend(selection.audit(plan, scripts, other_plans=others))
    for plan in plans:
        corpus_io.write_json(
            {"rng_seed": rng_seed, **corpus_io.plan_to_dict(plan)},
            out / f"plan_{plan.quota_name.replace('/', '_')}.json",
        )

    infeasible = [p for p in plans if not p.feasible]
    if infeasible:
        for plan in infeasible:
            for bucket, deficit in sorted(
                plan.deficits.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)
            ):
                if deficit:
                    print(
                        f"deficit: {plan.quota_name} {bucket[0].value}/{bucket[1].value} "
                        f"short by {deficit}"
                    )
        return _fail("selection infeasible; see deficits above", EXIT_INFEASIBLE)

    manifest = corpus_io.build_manifest(
        plans, corpus_name="nvscript-corpus", rng_seed=rng_seed
    )
    manifest_path = out / "manifest.json"
    corpus_io.write_manifest(manifest, manifest_path)
    total = len(manifest.records)
    print(f"selected {total} scripts across {len(plans)} set(s) -> {manifest_path}")
    if violations:
        for v in violations:
            print(f"audit violation: {v}")
        return _fail("audit found violations", EXIT_INFEASIBLE)
    print("audit: 0 violations")
    return EXIT_OK


def _sequences_from_args(args: argparse.Namespace) -> list:
    table = load_mora_table(args.mora_table) if args.mora_table else None
    if args.phones:
        seqs = []
        for line in Path(args.phones).read_text("utf-8").splitlines():
            symbols = tuple(line.split())
            if symbols:
                from .phoneme import PhonemeSequence

                seqs.append(PhonemeSequence(phones=symbols))
        return seqs
    if args.manifest:
        manifest = corpus_io.read_manifest(args.manifest)
        texts = [(r.id, r.text) for r in manifest.records]
    else:
        scripts, _ = corpus_io.read_scripts(args.scripts)
        texts = [(s.id, s.text) for s in scripts]
    seqs = []
    for script_id, text in texts:
        try:
            seqs.append(kana_to_phonemes(text, source_script_id=script_id, table=table))
        except KanaParseError as exc:
            print(f"skipping unparseable script {script_id}: {exc}", file=sys.stderr)
    return seqs


def _print_coverage(label: str, stats: NGramStats, cfg: EntropyConfig) -> None:
    print(f"[{label}]")
    print("  m  arrangements  total")
    for m in range(1, cfg.max_order + 1):
        print(f"  {m}  {stats.arrangement_count(m):12d}  {stats.total(m):6d}")
    entropy = extended_entropy(stats, cfg)
    print(f"  extended entropy S = {entropy:.6g} bits")
    gaps = coverage_gaps(stats)
    print(f"  uncovered phonemes: {', '.join(gaps) if gaps else '(none)'}")


def _print_comparison(
    columns: list[tuple[str, NGramStats]], cfg: EntropyConfig
) -> None:
    """Side-by-side arrangement counts and entropy for several corpora."""
    width = max(12, *(len(label) for label, _ in columns))
    header = "  m  " + "  ".join(f"{label:>{width}}" for label, _ in columns)
    print(header)
    for m in range(1, cfg.max_order + 1):
        cells = "  ".join(f"{stats.arrangement_count(m):>{width}d}" for _, stats in columns)
        print(f"  {m}  {cells}")
    entropies = "  ".join(
        f"{extended_entropy(stats, cfg):>{width}.6g}" for _, stats in columns
    )
    print(f"  S  {entropies}")


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = EntropyConfig(max_order=args.max_order, weights=tuple([1 / args.max_order] * args.max_order))
    try:
        seqs = _sequences_from_args(args)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    stats = count_ngrams(seqs, cfg.max_order)
    _print_coverage(args.manifest or args.scripts or args.phones, stats, cfg)
    if args.compare:
        table = load_mora_table(args.mora_table) if args.mora_table else None
        other = corpus_io.read_manifest(args.compare)
        other_seqs = []
        for r in other.records:
            try:
                other_seqs.append(kana_to_phonemes(r.text, source_script_id=r.id, table=table))
            except KanaParseError:
                pass
        other_stats = count_ngrams(other_seqs, cfg.max_order)
        _print_coverage(args.compare, other_stats, cfg)
        print()
        _print_comparison(
            [(args.manifest or args.scripts or args.phones, stats), (args.compare, other_stats)],
            cfg,
        )
    return EXIT_OK


def cmd_report(responses_path: Path) -> int:
    try:
        responses = corpus_io.load_responses_csv(responses_path)
        report = corpus_io.recognition_accuracy(responses)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    print(f"responses: {report.total}, correct: {report.correct}")
    print(f"overall accuracy: {report.overall_pct:.2f}%")
    for emotion, pct in report.per_emotion_pct.items():
        print(f"  {emotion}: {pct:.2f}%")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvscript",
        description="Construct emotional speech-corpus scripts: generate, score, select, analyze.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate candidate scripts via the LLM endpoint")
    p_gen.add_argument("--config", required=True, type=Path)
    p_gen.add_argument("--seed", type=int, default=None, help="override the config rng seed")
    p_gen.add_argument("--out", type=Path, default=None)

    p_score = sub.add_parser("score", help="attach emotion and fluency scores")
    p_score.add_argument("--config", required=True, type=Path)
    p_score.add_argument("--candidates", required=True, type=Path)
    p_score.add_argument("--backend", choices=["remote", "precomputed", "baseline"], default=None)
    p_score.add_argument("--out", type=Path, default=None)

    p_sel = sub.add_parser("select", help="pick the final quota-balanced script set")
    p_sel.add_argument("--config", required=True, type=Path)
    p_sel.add_argument("--scored", required=True, type=Path)
    p_sel.add_argument("--preset", choices=["core", "extra", "both", "custom"], default=None)
    p_sel.add_argument("--fillers", type=Path, default=None, help="scored phrase-free gap fillers")
    p_sel.add_argument("--out-dir", type=Path, default=None)

    p_an = sub.add_parser("analyze", help="phoneme coverage report")
    src = p_an.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", type=str, default=None)
    src.add_argument("--scripts", type=str, default=None)
    src.add_argument("--phones", type=str, default=None, help="plain file: one phoneme sequence per line")
    p_an.add_argument("--compare", type=str, default=None, help="second manifest for a side-by-side table")
    p_an.add_argument("--mora-table", type=Path, default=None)
    p_an.add_argument("--max-order", type=int, default=4)

    p_rep = sub.add_parser("report", help="aggregate forced-choice recognition responses")
    p_rep.add_argument("--responses", required=True, type=Path)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "analyze":
        return cmd_analyze(args)
    if args.command == "report":
        return cmd_report(args.responses)

    try:
        config = load_config(args.config)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_USAGE)
    if getattr(args, "seed", None) is not None:
        config.rng_seed = args.seed
    if getattr(args, "backend", None) is not None:
        config.backend = args.backend
    if getattr(args, "preset", None) is not None:
        config.preset = args.preset
    try:
        config.validate()
    except ConfigError as exc:
        return _fail(str(exc), EXIT_USAGE)

    if args.command == "generate":
        return cmd_generate(config, args.out)
    if args.command == "score":
        return cmd_score(config, args.candidates, args.out)
    return cmd_select(config, args.scored, args.fillers, args.out_dir)


if __name__ == "__main__":
    sys.exit(main())
