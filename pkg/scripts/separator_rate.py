#!/usr/bin/env python3
"""Measure how often the bounded distinguisher separates tiny pointed
model pairs that the brute-force oracle certifies as non-bisimilar.

Desk-scale evidence for the bounded search, not a completeness claim:
a miss means only that no separator exists within the budget tried.
"""

import argparse
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from gkmc.bisim import brute_force_bisim
from gkmc.distinguish import EnumerationBudget, distinguish
from gkmc.generate import GenSpec, SplitMix64, break_child, gen_model
from gkmc.model import PointedModel
from gkmc.syntax import Vocabulary, format_formula


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cases", type=int, default=100)
    parser.add_argument("--max-depth", type=int, default=5, help="connective budget (staged from 4)")
    parser.add_argument("--max-modal-depth", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--show-misses", action="store_true")
    args = parser.parse_args()

    vocab = Vocabulary.of(props=["p"], constants=["c"])
    tiny = dict(max_worlds=3, max_children=2, max_depth=2, prop_count=1, constant_count=1, edge_density=0.45)

    cases = []
    seed = args.seed
    while len(cases) < args.cases and seed < args.seed + 100 * args.cases:
        m = gen_model(GenSpec(seed=seed, **tiny))
        seed += 1
        if not m.children:
            continue
        rng = SplitMix64(seed * 31 + 7)
        label = rng.choice(sorted(m.children))
        broken = break_child(m, label, "p", rng.choice(m.children[label].worlds))
        pm, pn = PointedModel(m, m.worlds[0]), PointedModel(broken, broken.worlds[0])
        if not brute_force_bisim(pm, pn):
            cases.append((pm, pn))
    print(f"{len(cases)} oracle-certified non-bisimilar pairs")

    started = time.time()
    separated = 0
    sizes = []
    for k, (pm, pn) in enumerate(cases):
        separator = None
        for stage in range(4, args.max_depth + 1):
            separator = distinguish(pm, pn, EnumerationBudget(stage, args.max_modal_depth, vocab))
            if separator is not None:
                break
        if separator is None:
            if args.show_misses:
                print(f"  miss: case {k}")
            continue
        separated += 1
        sizes.append(len(format_formula(separator)))
    elapsed = time.time() - started
    rate = separated / len(cases) if cases else 0.0
    print(f"separated {separated}/{len(cases)} ({rate:.1%}) in {elapsed:.1f}s")
    if sizes:
        print(f"separator text length: min {min(sizes)}, max {max(sizes)}")


if __name__ == "__main__":
    main()
