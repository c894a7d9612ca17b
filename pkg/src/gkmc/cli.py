"""Command-line front end.

Subcommands: validate, eval, bisim, distinguish, gen, fmt.  Exit codes:
0 the property holds / models bisimilar / document valid; 1 it fails /
not bisimilar / invalid; 2 input error; 3 search budget exhausted (an
explicit unknown, never conflated with 0 or 1).  With `--json` every
result is a single JSON line with sorted keys, bit-stable across runs;
otherwise output is human text.  Environment variables GKMC_BISIM_BUDGET,
GKMC_MAX_DEPTH and GKMC_MAX_MODAL_DEPTH set default budget caps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bisim import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    OracleSizeError,
    bisimilar,
    brute_force_bisim,
    check_witness,
    witness_to_document,
)
from .distinguish import EnumerationBudget, distinguish
from .generate import GenSpec, gen_model
from .model import (
    DocumentFormatError,
    PointedModel,
    dump_model,
    model_vocabulary,
    parse_document,
    validate,
)
from .semantics import NotASentenceError, evaluate_sentence
from .syntax import ParseError, Vocabulary, check_sentence, format_formula, parse

OK, FAIL, INPUT_ERROR, UNKNOWN = 0, 1, 2, 3


class _Output:
    def __init__(self, as_json: bool):
        self.as_json = as_json

    def emit(self, payload: dict, text: str):
        if self.as_json:
            print(json.dumps(payload, sort_keys=True, separators=(",", ":")))
        elif text:
            print(text)


def _read(path):
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror or exc}")


class _InputError(Exception):
    pass


def _load_vocab(path) -> Vocabulary:
    try:
        doc = json.loads(_read(path))
        return Vocabulary.of(props=doc.get("props", []), constants=doc.get("constants", []))
    except (json.JSONDecodeError, ValueError, AttributeError) as exc:
        raise _InputError(f"bad vocabulary file {path}: {exc}")


def _load_valid_model(path):
    m = parse_document(_read(path))
    diagnostics = validate(m)
    if not diagnostics.verdict:
        raise _InputError(
            f"invalid model {path}: "
            + "; ".join(f"{v.tag} at {v.path or '<root>'}" for v in diagnostics.violations)
        )
    return m


def _parse_sentence(text, vocab, out):
    formula = parse(text, vocab)
    diagnostics = check_sentence(formula)
    if not diagnostics.verdict:
        lines = [f"{v.tag}: {v.message}" for v in diagnostics.violations]
        out.emit(
            {"error": "not-a-sentence", "violations": lines},
            "not a sentence:\n  " + "\n  ".join(lines),
        )
        raise _Reported()
    return formula


class _Reported(Exception):
    pass


def _cmd_validate(args, out) -> int:
    try:
        m = parse_document(_read(args.model))
    except DocumentFormatError as exc:
        out.emit({"error": "format", "message": str(exc)}, f"format error: {exc}")
        return INPUT_ERROR
    diagnostics = validate(m)
    if diagnostics.verdict:
        out.emit({"valid": True}, "valid")
        return OK
    lines = [f"{v.tag} at {v.path or '<root>'}: {v.message}" for v in diagnostics.violations]
    out.emit({"valid": False, "violations": lines}, "invalid:\n  " + "\n  ".join(lines))
    return FAIL


def _cmd_eval(args, out) -> int:
    m = _load_valid_model(args.model)
    vocab = _load_vocab(args.vocab) if args.vocab else model_vocabulary(m)
    sentence = _parse_sentence(args.sentence, vocab, out)
    worlds = evaluate_sentence(m, sentence)
    ordered = [w for w in m.worlds if w in worlds]
    if args.world is not None:
        if args.world not in m.worlds:
            raise _InputError(f"unknown world {args.world!r}")
        holds = args.world in worlds
        out.emit(
            {"holds": holds, "world": args.world, "worlds": ordered},
            f"{'holds' if holds else 'fails'} at {args.world}; satisfying worlds: {json.dumps(ordered)}",
        )
        return OK if holds else FAIL
    out.emit({"worlds": ordered}, json.dumps(ordered))
    return OK


def _cmd_bisim(args, out) -> int:
    m = _load_valid_model(args.model1)
    n = _load_valid_model(args.model2)
    if args.vocab:
        vocab = _load_vocab(args.vocab)
        for path, side in ((args.model1, m), (args.model2, n)):
            mentioned = model_vocabulary(side)
            if not (mentioned.props <= vocab.props and mentioned.constants <= vocab.constants):
                raise _InputError(f"model {path} mentions names outside the vocabulary")
    else:
        vm, vn = model_vocabulary(m), model_vocabulary(n)
        vocab = Vocabulary(vm.props | vn.props, vm.constants | vn.constants)
    if args.world1 not in m.worlds:
        raise _InputError(f"unknown world {args.world1!r} in {args.model1}")
    if args.world2 not in n.worlds:
        raise _InputError(f"unknown world {args.world2!r} in {args.model2}")
    pm, pn = PointedModel(m, args.world1), PointedModel(n, args.world2)

    budget = args.budget if args.budget is not None else int(os.environ.get("GKMC_BISIM_BUDGET", DEFAULT_BUDGET))
    try:
        verdict = bisimilar(pm, pn, vocab=vocab, budget=budget)
    except BudgetExceededError as exc:
        out.emit({"bisimilar": None, "reason": str(exc)}, f"unknown: {exc}")
        return UNKNOWN

    if args.oracle:
        try:
            oracle = brute_force_bisim(pm, pn, vocab=vocab)
        except OracleSizeError as exc:
            raise _InputError(f"oracle infeasible: {exc}")
        if oracle != verdict.bisimilar:
            out.emit(
                {"error": "oracle-disagreement", "search": verdict.bisimilar, "oracle": oracle},
                f"ORACLE DISAGREEMENT: search says {verdict.bisimilar}, brute force says {oracle}",
            )
            return INPUT_ERROR

    if verdict.bisimilar:
        if args.witness:
            doc = witness_to_document(verdict.witness)
            with open(args.witness, "w", encoding="utf-8") as handle:
                json.dump(doc, handle, indent=2, sort_keys=True)
                handle.write("\n")
        report = check_witness(pm, pn, verdict.witness, vocab=vocab)
        if not report.ok:
            out.emit(
                {"error": "witness-check-failed", "failures": [list(f) for f in report.failures]},
                "internal error: produced witness fails verification",
            )
            return INPUT_ERROR
        out.emit({"bisimilar": True}, "bisimilar")
        return OK
    out.emit({"bisimilar": False}, "not bisimilar")
    return FAIL


def _cmd_distinguish(args, out) -> int:
    m = _load_valid_model(args.model1)
    n = _load_valid_model(args.model2)
    vm, vn = model_vocabulary(m), model_vocabulary(n)
    vocab = Vocabulary(vm.props | vn.props, vm.constants | vn.constants)
    if args.world1 not in m.worlds:
        raise _InputError(f"unknown world {args.world1!r} in {args.model1}")
    if args.world2 not in n.worlds:
        raise _InputError(f"unknown world {args.world2!r} in {args.model2}")
    max_depth = args.max_depth if args.max_depth is not None else int(os.environ.get("GKMC_MAX_DEPTH", 4))
    max_modal = (
        args.max_modal_depth
        if args.max_modal_depth is not None
        else int(os.environ.get("GKMC_MAX_MODAL_DEPTH", max_depth))
    )
    budget = EnumerationBudget(max_depth, max_modal, vocab, allow_xi=not args.no_xi)
    separator = distinguish(PointedModel(m, args.world1), PointedModel(n, args.world2), budget)
    if separator is None:
        out.emit(
            {"separator": None, "exhausted": True},
            "no separator within budget (not a bisimilarity proof)",
        )
        return UNKNOWN
    text = format_formula(separator)
    out.emit({"separator": text}, text)
    return OK


def _cmd_gen(args, out) -> int:
    spec = GenSpec(
        seed=args.seed,
        max_worlds=args.max_worlds,
        max_children=args.max_children,
        max_depth=args.max_depth,
        prop_count=args.props,
        constant_count=args.constants,
        closure=args.closure,
        edge_density=args.density,
    )
    text = dump_model(gen_model(spec))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
        out.emit({"written": args.output}, f"wrote {args.output}")
    elif out.as_json:
        print(json.dumps(json.loads(text), sort_keys=True, separators=(",", ":")))
    else:
        print(text, end="")
    return OK


def _cmd_fmt(args, out) -> int:
    formula = parse(args.sentence, vocab=None)
    text = format_formula(formula)
    out.emit({"formula": text}, text)
    return OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkmc",
        description="Model checking for first-order modal xi-calculus over genealogical Kripke models.",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable line-delimited JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a .gkm.json model document")
    p.add_argument("model")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("eval", help="evaluate a sentence over a model")
    p.add_argument("model")
    p.add_argument("sentence")
    p.add_argument("--world", help="check satisfaction at this world (exit 0/1)")
    p.add_argument("--vocab", help="JSON file {\"props\": [...], \"constants\": [...]} overriding the inferred vocabulary")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bisim", help="decide bisimilarity of two pointed models")
    p.add_argument("model1")
    p.add_argument("world1")
    p.add_argument("model2")
    p.add_argument("world2")
    p.add_argument("--witness", help="write the witness JSON here when bisimilar")
    p.add_argument("--oracle", action="store_true", help="cross-check with the brute-force oracle (tiny inputs)")
    p.add_argument("--vocab", help="vocabulary file; models mentioning names outside it are rejected")
    p.add_argument("--budget", type=int, help="search node budget")
    p.set_defaults(func=_cmd_bisim)

    p = sub.add_parser("distinguish", help="search for a sentence separating two pointed models")
    p.add_argument("model1")
    p.add_argument("world1")
    p.add_argument("model2")
    p.add_argument("world2")
    p.add_argument("--max-depth", type=int, help="connective budget for enumeration")
    p.add_argument("--max-modal-depth", type=int, help="modal nesting budget")
    p.add_argument("--no-xi", action="store_true", help="exclude xi binders from the search")
    p.set_defaults(func=_cmd_distinguish)

    p = sub.add_parser("gen", help="emit a random .gkm.json model document")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-worlds", type=int, default=4)
    p.add_argument("--max-children", type=int, default=2)
    p.add_argument("--max-depth", type=int, default=2)
    p.add_argument("--props", type=int, default=1)
    p.add_argument("--constants", type=int, default=1)
    p.add_argument("--closure", choices=["none", "reflexive-transitive"], default="none")
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("fmt", help="pretty-print a sentence in canonical form")
    p.add_argument("sentence")
    p.set_defaults(func=_cmd_fmt)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out = _Output(args.json)
    try:
        return args.func(args, out)
    except _Reported:
        return INPUT_ERROR
    except _InputError as exc:
        out.emit({"error": "input", "message": str(exc)}, f"error: {exc}")
        return INPUT_ERROR
    except (ParseError, DocumentFormatError, NotASentenceError, ValueError) as exc:
        out.emit({"error": "input", "message": str(exc)}, f"error: {exc}")
        return INPUT_ERROR


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
