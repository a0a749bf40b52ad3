"""Command line entry point: ``dsnlg <command> ...``."""
from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .ds import DSError, Lexicon, load_grammar
from .evaluation import (
    CorpusError, build_revisions, corpus_stats, dumps_revisions, evaluate_generation,
    evaluate_repairs, flatten, load_contractions, load_corpus, load_revisions, to_json,
)
from .generator import DEFAULT_INTERREGNUM, GenerationSession
from .model import ModelError, TrainingError, dumps_model, fit, load_model
from .parser import ClosureOverflow, dump_dag, parse_utterance
from .repair import RevisionEvent, generate_with_revisions
from .ttr import TTRError, parse_rt, subtract

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def bundled(name: str) -> str:
    return (resources.files("dsnlg") / "data" / name).read_text(encoding="utf-8")


def _read(path, default: str | None = None) -> str:
    if path is None:
        if default is None:
            raise UsageError("missing required input file")
        return bundled(default)
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _lexicon(args) -> Lexicon:
    return load_grammar(_read(args.lexicon, "toy.lex"))


def _corpus(args):
    return load_corpus(_read(args.corpus, "toy_corpus.tsv"))


def _table(args):
    return load_contractions(_read(args.contractions, "contractions.tsv"))


def _model(args, lexicon):
    """Load ``--model`` if given, else train on the corpus in hand."""
    if args.model is not None:
        return load_model(_read(args.model))
    entries = _corpus(args)
    model, _ = fit([(e.tokens, e.goal) for e in entries], lexicon, args.alpha,
                   args.normalization, args.trigger)
    return model


def _emit(out, data: dict, as_json: bool) -> None:
    print(to_json(data) if as_json else "\n".join(flatten(data)), file=out)


# ---------------------------------------------------------------- commands

def cmd_train(args, out) -> int:
    if args.output is None:
        raise UsageError("train needs --output")
    lexicon = _lexicon(args)
    entries = _corpus(args)
    model, skipped = fit([(e.tokens, e.goal) for e in entries], lexicon, args.alpha,
                         args.normalization, args.trigger)
    Path(args.output).write_text(dumps_model(model), encoding="utf-8")
    report = {"entries": len(entries), "used": len(entries) - len(skipped),
              "skipped": len(skipped), "vocab": len(model.vocab),
              "features": len(model.features), "tokens": model.total_tokens,
              "model": str(args.output)}
    _emit(out, report, args.json)
    for s in skipped:
        print(f"skipped line {entries[s.index].line}: {' '.join(s.tokens)} ({s.reason})", file=out)
    return EXIT_OK


def _revision_events(text: str) -> list[RevisionEvent]:
    events = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) == 2:
            events.append(RevisionEvent(int(cols[0]), parse_rt(cols[1])))
        elif len(cols) == 6:
            spec = load_revisions(line)[0]
            events.append(RevisionEvent(spec.index, spec.r_r))
        else:
            raise UsageError(f"revision file line {n}: expected 'index<TAB>RT' or a 6-column spec")
    return events


def cmd_generate(args, out) -> int:
    if args.goal is None:
        raise UsageError("generate needs --goal")
    lexicon = _lexicon(args)
    model = _model(args, lexicon)
    goal = parse_rt(args.goal)
    events = _revision_events(_read(args.revisions)) if args.revisions else []
    res = generate_with_revisions(model, lexicon, goal, events, args.beam,
                                  args.interregnum.split(), args.bound)
    data = {"success": res.success, "surface": " ".join(res.surface),
            "annotated": res.annotated, "clean": " ".join(res.clean), "kind": res.kind,
            "backtrack_depth": res.backtrack_depth, "repaired_edges": res.repaired_edges}
    _emit(out, data, args.json)
    if not args.json and args.trace:
        print(_trace_lines(model, lexicon, goal, events, args), file=out)
    return EXIT_OK if res.success else EXIT_FAIL


def _trace_lines(model, lexicon, goal, events, args) -> str:
    s = GenerationSession(model, lexicon, goal, args.beam, args.interregnum.split(), args.bound)
    pending = list(events)
    lines = []
    for _ in range(1000):
        while pending and (pending[0].index <= len(s.words()) or s.done or s.failed):
            s.revise(pending.pop(0).new_goal)
        if s.done or s.failed:
            break
        s.step()
    for i, rec in enumerate(s.trace):
        if rec.kind == "word":
            beam = " ".join(f"{k + 1}:{c.word}({c.score:.2f},{c.outcome})"
                            for k, c in enumerate(rec.beam))
            lines.append(f"step {i} vertex={rec.vertex} ptr={rec.ty_p} beam={beam}")
        else:
            lines.append(f"step {i} {rec.kind} vertex={rec.vertex} {rec.word or ''} {rec.note}".rstrip())
    return "\n".join(lines)


def cmd_eval(args, out) -> int:
    lexicon = _lexicon(args)
    entries = _corpus(args)
    model = _model(args, lexicon)
    metrics = evaluate_generation(model, lexicon, entries, args.beam, _table(args), args.bound)
    _emit(out, metrics, args.json)
    if args.figures:
        from .plotting import plot_generation
        print(f"figure={plot_generation(metrics, Path(args.figures) / 'generation.png')}", file=out)
    return EXIT_OK


def cmd_eval_repairs(args, out) -> int:
    lexicon = _lexicon(args)
    model = _model(args, lexicon)
    if args.revisions:
        specs = load_revisions(_read(args.revisions))
    elif args.build:
        specs = build_revisions(_corpus(args), lexicon, bound=args.bound).specs
    else:
        specs = load_revisions(bundled("toy_revisions.tsv"))
    if args.save_revisions:
        Path(args.save_revisions).write_text(dumps_revisions(specs), encoding="utf-8")
    result = evaluate_repairs(model, lexicon, specs, args.beam, args.interregnum.split(),
                              _table(args), args.bound)
    _emit(out, result, args.json)
    if args.figures:
        from .plotting import plot_repairs
        print(f"figure={plot_repairs(result, Path(args.figures) / 'repairs.png')}", file=out)
    return EXIT_OK


def cmd_stats(args, out) -> int:
    entries = _corpus(args)
    _emit(out, corpus_stats(entries).as_dict(), args.json)
    if args.figures:
        from .plotting import plot_lengths
        print(f"figure={plot_lengths(entries, Path(args.figures) / 'lengths.png')}", file=out)
    return EXIT_OK


def cmd_trace(args, out) -> int:
    lexicon = _lexicon(args)
    tokens = " ".join(args.utterance).split()
    if not tokens:
        raise UsageError("trace needs an utterance")
    res = parse_utterance(tokens, lexicon, args.bound)
    print(dump_dag(res.dag, args.bound), file=out)
    if not res.alive:
        print(f"dead end at word {res.dead_end} ({tokens[res.dead_end - 1]})", file=out)
        return EXIT_FAIL
    print("grammatical" if res.grammatical else "incomplete", file=out)
    return EXIT_OK


# ---------------------------------------------------------------- repl

REPL_HELP = """commands:
  goal <RT>     start generating towards a record type
  step          emit one word (or back up one vertex)
  run           step until done or stuck
  revise <RT>   change the goal mid-generation
  show          tree pointer, R_cur, R_inc, ranked words
  reset         forget the current goal
  quit"""


def run_repl(lines, out, model, lexicon: Lexicon, beam: int = 3,
             interregnum=DEFAULT_INTERREGNUM, bound: int = 8) -> None:
    session = None

    def say(msg):
        print(msg, file=out)

    def status():
        say(f"output: {session.annotated()}")
        if session.done:
            say("done")
        elif session.failed:
            say("failed")

    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        cmd, _, rest = line.partition(" ")
        try:
            if cmd in ("quit", "exit"):
                break
            elif cmd == "help":
                say(REPL_HELP)
            elif cmd == "goal":
                session = GenerationSession(model, lexicon, parse_rt(rest), beam,
                                            interregnum, bound)
                say(f"goal: {session.goal}")
            elif cmd == "reset":
                session = None
                say("reset")
            elif session is None:
                say(f"usage: set a goal first ('goal <RT>') before '{cmd}'")
            elif cmd == "step":
                rec = session.step()
                if rec.kind == "word":
                    say(f"{rec.word or '(dead end)'}")
                elif rec.kind == "backtrack":
                    say(f"backtrack over '{rec.word}'")
                status()
            elif cmd == "run":
                session.run()
                status()
            elif cmd == "revise":
                kind, depth = session.revise(parse_rt(rest))
                say(f"{kind} revision, backtracked {depth}")
                status()
            elif cmd == "show":
                v = session.dag.vertex(session.tip)
                say(f"pointer: {v.tree.pointed_label()}")
                say(f"R_cur: {session.r_cur}")
                say(f"R_inc: {subtract(session.goal, session.r_cur)}")
                ranked = session.ranked()[:max(beam, 5)]
                say("beam: " + ", ".join(f"{w}({s:.2f})" for w, s in ranked))
                status()
            else:
                say(f"unknown command '{cmd}' (try 'help')")
        except (TTRError, DSError) as exc:
            say(f"error: {exc}")


def cmd_repl(args, out) -> int:
    lexicon = _lexicon(args)
    model = _model(args, lexicon)
    if sys.stdin.isatty():
        print(REPL_HELP, file=out)
    run_repl(sys.stdin, out, model, lexicon, args.beam, tuple(args.interregnum.split()),
             args.bound)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lexicon", help="grammar file (default: bundled toy grammar)")
    common.add_argument("--corpus", help="corpus TSV (default: bundled toy corpus)")
    common.add_argument("--model", help="trained model file (default: train on --corpus)")
    common.add_argument("--beam", type=int, default=3)
    common.add_argument("--alpha", type=float, default=0.1)
    common.add_argument("--normalization", choices=("word", "feature"), default="word")
    common.add_argument("--trigger", choices=("atoms", "closure"), default="atoms")
    common.add_argument("--interregnum", default=" ".join(DEFAULT_INTERREGNUM))
    common.add_argument("--contractions", help="EM normalisation table (TSV)")
    common.add_argument("--bound", type=int, default=8,
                        help="max computational actions between words")
    common.add_argument("--json", action="store_true", help="structured output")

    p = argparse.ArgumentParser(prog="dsnlg", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("train", parents=[common], help="estimate a model from a corpus")
    t.add_argument("--output", "-o", help="where to write the model")
    g = sub.add_parser("generate", parents=[common], help="generate from a goal record type")
    g.add_argument("--goal", help="goal record type")
    g.add_argument("--revisions", help="revision file")
    g.add_argument("--trace", action="store_true", help="print the beam trace")
    sub.add_parser("repl", parents=[common], help="interactive generation")
    e = sub.add_parser("eval", parents=[common], help="generation metrics on a corpus")
    e.add_argument("--figures", help="directory for PNG figures")
    r = sub.add_parser("eval-repairs", parents=[common], help="repair EM by condition")
    r.add_argument("--revisions", help="revision spec file (default: bundled fixtures)")
    r.add_argument("--build", action="store_true", help="build revisions from --corpus")
    r.add_argument("--save-revisions", help="write the specs used to this file")
    r.add_argument("--figures", help="directory for PNG figures")
    s = sub.add_parser("stats", parents=[common], help="corpus statistics")
    s.add_argument("--figures", help="directory for PNG figures")
    tr = sub.add_parser("trace", parents=[common], help="parse an utterance, dump the DAG")
    tr.add_argument("utterance", nargs="+")
    return p


COMMANDS = {
    "train": cmd_train, "generate": cmd_generate, "repl": cmd_repl, "eval": cmd_eval,
    "eval-repairs": cmd_eval_repairs, "stats": cmd_stats, "trace": cmd_trace,
}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if args.beam < 1 or args.alpha < 0:
        print("error: --beam must be >= 1 and --alpha >= 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrainingError, ClosureOverflow, CorpusError, ModelError, TTRError, DSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
