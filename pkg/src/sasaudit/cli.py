"""Command-line pipeline: generate corpora, score them, rate the scorers.

The three stages communicate through manifest files carrying SHA-256
checksums, so stale or edited intermediates are refused instead of silently
rated. Outputs are a pure function of (config, seed); reruns are
byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional

from . import causal, corpus, rater, report, sas, stats
from .config import RunConfig, load_config
from .errors import ConfigError, SasAuditError
from .sas import SasKind

_GENERATORS = {
    "G1": lambda config, word_set: corpus.generate_group1(word_set, config.replicates),
    "G2": lambda config, word_set: corpus.generate_group2(
        word_set, config.g2_policy, config.replicates
    ),
    "G3": lambda config, word_set: corpus.generate_group3(word_set, config.replicates),
    "G4": lambda config, word_set: corpus.generate_group4(
        word_set, config.g4_policy, config.replicates
    ),
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SasAuditError(f"cannot read manifest {path}: {exc}") from None


def _corpus_filename(group: str, set_id: str) -> str:
    return f"{group.lower()}_{set_id.lower()}.jsonl"


def cmd_generate(config: RunConfig, out_dir: Path) -> Path:
    corpus_dir = out_dir / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for group in corpus.GROUPS:
        if group not in config.groups:
            continue
        for set_id in config.emotion_sets[group]:
            records = _GENERATORS[group](config, corpus.emotion_set(set_id))
            rel = f"corpus/{_corpus_filename(group, set_id)}"
            path = out_dir / rel
            corpus.write_records(records, path)
            files.append(
                {
                    "path": rel,
                    "group": group,
                    "emotion_set": set_id,
                    "records": len(records),
                    "sha256": _sha256(path),
                }
            )
    manifest_path = out_dir / "corpus_manifest.json"
    _write_json(manifest_path, {"kind": "corpus-manifest", "files": files})
    print(f"generated {len(files)} corpora under {out_dir}")
    return manifest_path


def _verify_checksum(base: Path, rel: str, expected: str, what: str) -> Path:
    path = base / rel
    if not path.is_file():
        raise SasAuditError(f"{what} {rel} is missing")
    actual = _sha256(path)
    if actual != expected:
        raise SasAuditError(
            f"{what} {rel} does not match its manifest checksum "
            f"(expected {expected[:12]}…, got {actual[:12]}…); regenerate before continuing"
        )
    return path


def cmd_score(config: RunConfig, corpus_manifest: Path) -> Path:
    manifest = _load_json(corpus_manifest)
    if manifest.get("kind") != "corpus-manifest":
        raise SasAuditError(f"{corpus_manifest} is not a corpus manifest")
    base = corpus_manifest.parent
    corpora = []
    for entry in manifest["files"]:
        path = _verify_checksum(base, entry["path"], entry["sha256"], "corpus")
        corpora.append((entry, corpus.read_records(path)))

    entries = []
    failures = []
    for descriptor in config.sas:
        session = None
        try:
            if descriptor.kind is SasKind.EXTERNAL:
                session = sas.bridge.open_session(
                    command=descriptor.command, host=descriptor.host, port=descriptor.port
                )
            sas_dir = base / "scored" / descriptor.name
            sas_dir.mkdir(parents=True, exist_ok=True)
            discretized = descriptor.output_mode is sas.OutputMode.DISCRETE
            for entry, records in corpora:
                scored = sas.score_dataset(
                    descriptor, records, dead_zone=config.dead_zone, session=session
                )
                rel = f"scored/{descriptor.name}/{Path(entry['path']).name}"
                sas.write_scored_records(scored, base / rel, descriptor.name, discretized)
                entries.append(
                    {
                        "sas": descriptor.name,
                        "output_mode": descriptor.output_mode.value,
                        "group": entry["group"],
                        "emotion_set": entry["emotion_set"],
                        "corpus_path": entry["path"],
                        "corpus_sha256": entry["sha256"],
                        "path": rel,
                        "sha256": _sha256(base / rel),
                    }
                )
        except SasAuditError as exc:
            failures.append({"sas": descriptor.name, "error": str(exc)})
            entries = [e for e in entries if e["sas"] != descriptor.name]
            print(f"sas {descriptor.name!r} failed: {exc}", file=sys.stderr)
        finally:
            if session is not None:
                session.close()

    manifest_path = base / "scored_manifest.json"
    _write_json(
        manifest_path,
        {"kind": "scored-manifest", "entries": entries, "failures": failures},
    )
    done = sorted({e["sas"] for e in entries})
    print(f"scored {len(done)} systems ({len(entries)} files) under {base}")
    return manifest_path


def _scored_by_group(config: RunConfig, scored_manifest: Path):
    manifest = _load_json(scored_manifest)
    if manifest.get("kind") != "scored-manifest":
        raise SasAuditError(f"{scored_manifest} is not a scored manifest")
    base = scored_manifest.parent
    warnings = [
        f"sas {failure['sas']!r} failed during scoring and is not rated: {failure['error']}"
        for failure in manifest.get("failures", [])
    ]
    # data[group][sas] = [(emotion set id, scored corpus), in manifest order]
    data: dict[str, dict[str, list[tuple[str, list[sas.ScoredRecord]]]]] = {}
    for entry in manifest["entries"]:
        path = _verify_checksum(base, entry["path"], entry["sha256"], "scored file")
        scored = sas.read_scored_records(path)
        data.setdefault(entry["group"], {}).setdefault(entry["sas"], []).append(
            (entry["emotion_set"], scored)
        )
    return data, warnings


def cmd_rate(config: RunConfig, scored_manifest: Path, levels: Optional[int] = None) -> Path:
    levels = levels if levels is not None else config.rating_levels
    if levels < 2:
        raise ConfigError(f"rating levels must be >= 2, got {levels}")
    data, warnings = _scored_by_group(config, scored_manifest)

    orders: dict[rater.RatingGroup, rater.PartialOrder] = {}
    ttable_rows: list[report.TTableRow] = []
    die_rows: list[report.DieRow] = []
    ci_levels = tuple(ci for ci, _ in config.ci_weights)
    for group in rater.RATING_GROUPS:
        by_sas = data.get(group.source_group)
        if not by_sas:
            continue
        orders[group] = rater.create_partial_order(
            {name: [scored for _, scored in pairs] for name, pairs in by_sas.items()},
            group,
            config.ci_weights,
            config.epsilon,
        )
        for name, pairs in by_sas.items():
            for set_id, dataset in pairs:
                if group.uses_rejection_score:
                    for pair, result in stats.pair_tests(
                        dataset, group.attribute, config.epsilon, ci_levels
                    ).items():
                        ttable_rows.append(
                            report.TTableRow(
                                group.value, name, set_id, "-".join(pair), result
                            )
                        )
                else:
                    scores = causal.die_score(dataset, group.attribute)
                    die_rows.append(
                        report.DieRow(
                            group.value,
                            name,
                            set_id,
                            obs_neg=causal.observational_expectation(
                                dataset, corpus.Polarity.NEGATIVE
                            ),
                            obs_pos=causal.observational_expectation(
                                dataset, corpus.Polarity.POSITIVE
                            ),
                            int_neg=causal.interventional_expectation(
                                dataset, corpus.Polarity.NEGATIVE, group.attribute
                            ),
                            int_pos=causal.interventional_expectation(
                                dataset, corpus.Polarity.POSITIVE, group.attribute
                            ),
                            die_neg=scores.per_polarity[corpus.Polarity.NEGATIVE],
                            die_pos=scores.per_polarity[corpus.Polarity.POSITIVE],
                            die_max=scores.max_value,
                        )
                    )

    if not orders:
        raise SasAuditError("no rateable groups in the scored manifest")
    rating_report = rater.build_report(orders, levels)
    rating_report.warnings = warnings + rating_report.warnings

    base = scored_manifest.parent
    report_dir = base / "report"
    figures_dir = report_dir / "figures"
    figures_dir.mkdir(parents=True, exist_ok=True)

    outputs = {
        "report/ratings.csv": lambda p: report.write_ratings_csv(rating_report, p),
        "report/orders.csv": lambda p: report.write_orders_csv(rating_report, p),
        "report/ttable.csv": lambda p: report.write_ttable_csv(ttable_rows, p, ci_levels),
        "report/die.csv": lambda p: report.write_die_csv(die_rows, p),
        "report/report.md": lambda p: p.write_text(
            report.render_markdown(rating_report), encoding="utf-8"
        ),
        "report/figures/ratings_heatmap.png": lambda p: report.render_ratings_heatmap(
            rating_report, p
        ),
        "report/figures/bias_scores.png": lambda p: report.render_bias_score_chart(
            rating_report, p
        ),
    }
    files = []
    for rel, writer in outputs.items():
        writer(base / rel)
        files.append({"path": rel, "sha256": _sha256(base / rel)})
    manifest_path = base / "report_manifest.json"
    _write_json(manifest_path, {"kind": "report-manifest", "files": files})

    for name in sorted(rating_report.overall):
        print(f"{name}: overall rating {rating_report.overall[name]} of {levels}")
    print(f"report written under {report_dir}")
    return manifest_path


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sasaudit",
        description="Generate controlled corpora, score sentiment systems, rate their bias.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write the corpus files and their manifest")
    gen.add_argument("--config", required=True, type=Path)
    gen.add_argument("--out", type=Path, help="run directory (default: out_dir from config)")

    score = sub.add_parser("score", help="score every configured system on a corpus manifest")
    score.add_argument("--config", required=True, type=Path)
    score.add_argument("--corpus", required=True, type=Path, help="corpus manifest path")

    rate = sub.add_parser("rate", help="rate systems from a scored manifest")
    rate.add_argument("--config", required=True, type=Path)
    rate.add_argument("--scored", required=True, type=Path, help="scored manifest path")
    rate.add_argument("--levels", type=int, help="rating levels (default: from config)")

    sub.add_parser("selftest", help="run the built-in oracle checks")

    args = parser.parse_args(argv)
    try:
        if args.command == "selftest":
            from .selftest import run_selftest

            return run_selftest()
        config = load_config(args.config)
        if args.command == "generate":
            cmd_generate(config, args.out if args.out else Path(config.out_dir))
        elif args.command == "score":
            cmd_score(config, args.corpus)
        elif args.command == "rate":
            cmd_rate(config, args.scored, args.levels)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SasAuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
