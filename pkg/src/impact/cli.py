"""Command-line front end: teach one concept, sweep experiments, verify
concept files. Exit codes: 0 success, 1 a verify check failed, 2 invalid
input, 3 a teaching round ran out of data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .concepts import (
    Adfsa,
    ConceptDag,
    ThresholdCircuit,
    load_concept,
    max_path_depth,
    node_values,
    push_negations_to_leaves,
    relevance_mask,
    adfsa_labels,
)
from .errors import (
    ConfigError,
    EnumerationCapError,
    InputShapeError,
    InsufficientDataError,
    InvalidConceptError,
    InvalidParameterError,
    MalformedAutomatonError,
)
from .experiments import load_config, run_sweep, write_outputs
from .oracle import (
    ENUMERATION_CAP,
    sampled_disagreement,
    exhaustive_equivalence,
    exhaustive_string_equivalence,
)
from .plan import ModerationRule, postfix_order
from .sampling import Distribution, draw_sample
from .session import run_teaching_session

_MODERATION_FLAGS = {
    "relevant": ModerationRule.RELEVANT_FILTER,
    "partition": ModerationRule.LARGER_PARTITION,
}


def _default_distribution(concept, seed: int) -> Distribution:
    if isinstance(concept, Adfsa):
        return Distribution.strings_for(concept, seed)
    return Distribution.uniform(concept.n, seed)


def _cmd_teach(args) -> int:
    concept = load_concept(args.concept)
    moderation = _MODERATION_FLAGS[args.moderation] if args.moderation else None
    d = _default_distribution(concept, args.seed)
    report = run_teaching_session(
        concept,
        d,
        args.m,
        mode=args.mode,
        moderation=moderation,
        test_size=args.test_size,
        enforce_budget=args.enforce_budget,
    )
    text = json.dumps(report.to_json_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if cfg.kind != args.mode:
        raise ConfigError(
            f"--mode {args.mode} does not match the config's kind {cfg.kind!r}"
        )
    rows = run_sweep(cfg)
    paths = write_outputs(cfg, rows, out_dir=args.out)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


def _all_inputs(n: int) -> np.ndarray:
    if n > ENUMERATION_CAP:
        raise EnumerationCapError(f"n={n} exceeds the enumeration cap {ENUMERATION_CAP}")
    count = 1 << n
    rows = np.arange(count, dtype=np.uint32)
    return ((rows[:, None] >> np.arange(n, dtype=np.uint32)) & 1).astype(np.uint8)


def _check_taught_nodes(concept, X) -> dict:
    """Relevant inputs must agree with the root at every taught node."""
    plan = postfix_order(concept)
    vals = node_values(concept, X)
    root = vals[:, concept.root]
    bad = 0
    for rnd in plan.rounds:
        rel = relevance_mask(concept, rnd.node, X)
        bad += int(np.sum(rel & (vals[:, rnd.node] != root)))
    return {
        "name": "relevant-implies-correlated",
        "passed": bad == 0,
        "details": {"nodes": len(plan), "inputs": int(X.shape[0]), "violations": bad},
    }


def _verify_single(concept, args) -> list[dict]:
    checks = []
    if isinstance(concept, Adfsa):
        depth = max_path_depth(concept)
        if args.exhaustive:
            undefined = 0
            total = 0
            for length in range(depth, concept.n + 1):
                X = np.zeros((1 << length, concept.n), dtype=np.uint8)
                X[:, :length] = _all_inputs(length)
                lengths = np.full(1 << length, length, dtype=np.int64)
                total += len(lengths)
                try:
                    adfsa_labels(concept, X, lengths)
                except MalformedAutomatonError:
                    undefined += 1
            checks.append(
                {
                    "name": "walks-total-on-supported-lengths",
                    "passed": undefined == 0,
                    "details": {"min_length": depth, "strings": total},
                }
            )
        else:
            d = Distribution.strings_for(concept, args.seed)
            s = draw_sample(d, concept, args.samples)
            checks.append(
                {
                    "name": "walks-total-on-sampled-strings",
                    "passed": True,
                    "details": {"min_length": depth, "strings": len(s)},
                }
            )
        return checks

    if args.exhaustive:
        X = _all_inputs(concept.n)
    else:
        d = Distribution.uniform(concept.n, args.seed)
        X = draw_sample(d, concept, args.samples).bits
    if isinstance(concept, ConceptDag):
        restructured = push_negations_to_leaves(concept)
        a = node_values(concept, X)[:, concept.root]
        b = node_values(restructured, X)[:, restructured.root]
        mismatches = int(np.sum(a != b))
        checks.append(
            {
                "name": "negation-pushdown-preserves-outputs",
                "passed": mismatches == 0,
                "details": {
                    "inputs": int(X.shape[0]),
                    "mismatches": mismatches,
                    "size": concept.size,
                    "restructured_size": restructured.size,
                    "within_double": restructured.size <= 2 * concept.size,
                },
            }
        )
        checks[-1]["passed"] = checks[-1]["passed"] and restructured.size <= 2 * concept.size
        checks.append(_check_taught_nodes(restructured, X))
    else:
        checks.append(_check_taught_nodes(concept, X))
    return checks


def _verify_pair(concept, other, args) -> list[dict]:
    if isinstance(concept, Adfsa) != isinstance(other, Adfsa):
        raise InvalidParameterError("cannot compare string and fixed-width concepts")
    if args.exhaustive:
        if isinstance(concept, Adfsa):
            report = exhaustive_string_equivalence(
                concept, other, max_len=max(concept.n, other.n), ignore_undefined=True
            )
        else:
            if concept.n != other.n:
                raise InvalidParameterError("concepts have different input widths")
            report = exhaustive_equivalence(concept, other, concept.n)
        if report is None:
            return [{"name": "equivalent", "passed": True, "details": {}}]
        return [
            {
                "name": "equivalent",
                "passed": False,
                "details": {
                    "checked": report.checked,
                    "disagreements": report.disagreements,
                    "witnesses": [
                        {"bits": list(bits), "left": a, "right": b}
                        for bits, a, b in report.witnesses
                    ],
                },
            }
        ]
    d = _default_distribution(concept, args.seed)
    frac = sampled_disagreement(concept, other, d, args.samples)
    return [
        {
            "name": "sampled-agreement",
            "passed": frac == 0.0,
            "details": {"samples": args.samples, "disagreement": frac},
        }
    ]


def _cmd_verify(args) -> int:
    concept = load_concept(args.concept)
    if args.against:
        checks = _verify_pair(concept, load_concept(args.against), args)
    else:
        checks = _verify_single(concept, args)
    kind = {ConceptDag: "dag", ThresholdCircuit: "threshold", Adfsa: "adfsa"}[type(concept)]
    result = {"concept": str(args.concept), "kind": kind, "checks": checks}
    sys.stdout.write(json.dumps(result, indent=2) + "\n")
    return 0 if all(c["passed"] for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impact", description="Moderated teaching sessions over exact concepts"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    teach = sub.add_parser("teach", help="run one teaching session on a concept file")
    teach.add_argument("--concept", required=True)
    teach.add_argument("--m", type=int, required=True, help="training sample size")
    teach.add_argument("--seed", type=int, required=True)
    teach.add_argument("--mode", choices=("best-fit", "reliable"), default="best-fit")
    teach.add_argument("--moderation", choices=tuple(_MODERATION_FLAGS))
    teach.add_argument("--test-size", type=int, default=1000)
    teach.add_argument("--enforce-budget", action="store_true")
    teach.add_argument("--out", help="write the JSON report here instead of stdout")
    teach.set_defaults(func=_cmd_teach)

    sweep = sub.add_parser("sweep", help="run a configured experiment sweep")
    sweep.add_argument("--mode", choices=("m", "k"), required=True)
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", help="output directory (defaults to the config's)")
    sweep.set_defaults(func=_cmd_sweep)

    verify = sub.add_parser("verify", help="check a concept file's properties")
    verify.add_argument("--concept", required=True)
    verify.add_argument("--against", help="second concept file to compare with")
    verify.add_argument("--exhaustive", action="store_true")
    verify.add_argument("--samples", type=int, default=10000)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (
        ConfigError,
        InvalidConceptError,
        InvalidParameterError,
        InputShapeError,
        MalformedAutomatonError,
        EnumerationCapError,
        OSError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
