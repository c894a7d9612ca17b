#!/usr/bin/env python3
"""Evaluate the example-corpus sentences over the bundled fixtures and
print where each one holds."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from gkmc.model import load_model_file, model_vocabulary
from gkmc.semantics import evaluate_sentence
from gkmc.syntax import parse

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

CORPUS = [
    (
        "de_dicto.gkm.json",
        "([] exists x. ?[r] x & (~ exists x. [] ?[r] x & [] ?[r] #c))",
    ),
    (
        "deadlock.gkm.json",
        "exists x. exists y. (?[<> (a & ~b)] x & ?[<> (~a & b)] y)"
        " & ~ <> exists x. exists y. (?[(a & ~b)] x & ?[(~a & b)] y)",
    ),
    ("waitall.gkm.json", "[] xi X. (r | exists x. ?[X] x)"),
    ("waitall.gkm.json", "xi X. forall x. ?[X] x"),
]


def main():
    for name, text in CORPUS:
        model = load_model_file(FIXTURES / name)
        sentence = parse(text, model_vocabulary(model))
        worlds = sorted(evaluate_sentence(model, sentence))
        print(f"{name}:")
        print(f"  {text}")
        print(f"  holds at: {worlds}")


if __name__ == "__main__":
    main()
