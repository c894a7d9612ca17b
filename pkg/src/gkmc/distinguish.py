"""Bounded sentence enumeration and distinguishing-sentence search.

On image-finite models, pointed models satisfying exactly the same
sentences are bisimilar, so a non-bisimilar pair has some separating
sentence.  `distinguish` searches a finite, deterministically ordered
fragment for one; absence within the budget is a normal outcome and is
never evidence of bisimilarity.  The fragment is all sentences buildable
with at most `max_connective_depth` connective applications (atoms are
free; `F`, `<>`, `exists` count as single steps) and at most
`max_modal_depth` nested modal steps, counted globally through query
descent.

The stream is canonicalized to keep it small without losing separating
power: conjunctions are flattened chains with strictly increasing
operands, double negation and negated `T`/`F` are dropped, `<>` is not
applied to a negation (`~[]` covers it), `exists` bodies are not
negations (`~forall` covers it), and a `xi` binder must use its
variable.  Every emitted formula passes the sentence check; duplicates
after expansion to primitives are removed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .model import PointedModel
from .semantics import Evaluator, holds_at
from .syntax import (
    And,
    Box,
    Forall,
    Formula,
    FormulaVar,
    Not,
    Prop,
    QueryConst,
    QueryVar,
    Top,
    Vocabulary,
    Xi,
    bot,
    check_sentence,
    diamond,
    exists,
    format_formula,
)

_MODEL_VARS = ("x", "y", "z", "w")
_FORMULA_VARS = ("X", "Y", "Z")

_TOP = Top()
_BOT = bot()


@dataclass(frozen=True)
class EnumerationBudget:
    """Finite bounds for sentence enumeration.

    `max_connective_depth` caps the total number of connective
    applications in a sentence; `max_modal_depth` caps nested `[]`/`<>`
    steps, bounding how far along the relation a sentence can see.
    """

    max_connective_depth: int
    max_modal_depth: int
    vocab: Vocabulary
    allow_xi: bool = True


# Generation context: model variables usable as query terms, formula
# variables already guarded by a query below their binder, and formula
# variables bound by a xi but not yet guarded.
_Ctx = tuple[tuple[str, ...], frozenset, frozenset]


def _uses_var(f: Formula, name: str) -> bool:
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, FormulaVar) and node.name == name:
            return True
        if isinstance(node, (Not, Box)):
            stack.append(node.operand)
        elif isinstance(node, And):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Forall, QueryVar, QueryConst)):
            stack.append(node.body)
        elif isinstance(node, Xi):
            if node.var != name:
                stack.append(node.body)
    return False


def _rightmost_operand(f: Formula) -> Formula:
    return f.right if isinstance(f, And) else f


class _Enumerator:
    def __init__(self, budget: EnumerationBudget):
        self.budget = budget
        self.props = sorted(budget.vocab.props)
        self.consts = sorted(budget.vocab.constants)
        self.cache: dict[tuple, tuple[Formula, ...]] = {}
        self.sort_key: dict[Formula, tuple[int, str]] = {}

    def exact(self, cost: int, modal: int, ctx: _Ctx) -> tuple[Formula, ...]:
        """All canonical formulas built with exactly `cost` connectives and
        at most `modal` nested modal steps, in this context."""
        key = (cost, modal, ctx)
        got = self.cache.get(key)
        if got is None:
            got = tuple(self._build(cost, modal, ctx))
            for f in got:
                self.sort_key.setdefault(f, (cost, format_formula(f)))
            self.cache[key] = got
        return got

    def upto(self, cost: int, modal: int, ctx: _Ctx) -> list[Formula]:
        out = []
        for k in range(cost + 1):
            out.extend(self.exact(k, modal, ctx))
        return out

    def _build(self, cost, modal, ctx) -> Iterator[Formula]:
        mv, ok, pending = ctx
        if cost == 0:
            yield _TOP
            for p in self.props:
                yield Prop(p)
            for X in sorted(ok):
                yield FormulaVar(X)
            return

        if cost == 1:
            yield _BOT  # one connective: the abbreviation expands to ~T

        for operand in self.exact(cost - 1, modal, ctx):
            if not isinstance(operand, Not) and operand != _TOP:
                yield Not(operand)

        if modal >= 1:
            for operand in self.exact(cost - 1, modal - 1, ctx):
                yield Box(operand)
            for operand in self.exact(cost - 1, modal - 1, ctx):
                if not isinstance(operand, Not):
                    yield diamond(operand)

        for left_cost in range(cost):
            right_cost = cost - 1 - left_cost
            for left in self.exact(left_cost, modal, ctx):
                if left in (_TOP, _BOT):
                    continue
                left_anchor = self.sort_key[_rightmost_operand(left)]
                for right in self.exact(right_cost, modal, ctx):
                    if right in (_TOP, _BOT) or isinstance(right, And):
                        continue
                    if self.sort_key[right] <= left_anchor:
                        continue
                    yield And(left, right)

        var = _MODEL_VARS[min(len(mv), len(_MODEL_VARS) - 1)]
        inner = (mv + (var,), ok, pending)
        for body in self.exact(cost - 1, modal, inner):
            yield Forall(var, body)
        for body in self.exact(cost - 1, modal, inner):
            if not isinstance(body, Not):
                yield exists(var, body)

        if self.budget.allow_xi:
            fvar = _FORMULA_VARS[min(len(ok) + len(pending), len(_FORMULA_VARS) - 1)]
            xi_ctx = ((), frozenset(), frozenset((fvar,)))
            for body in self.exact(cost - 1, modal, xi_ctx):
                if _uses_var(body, fvar):
                    yield Xi(fvar, body)

        body_ctx = ((), ok | pending, frozenset())
        for body in self.exact(cost - 1, modal, body_ctx):
            for x in mv:
                yield QueryVar(body, x)
            for c in self.consts:
                yield QueryConst(body, c)


def enumerate_sentences(budget: EnumerationBudget) -> Iterator[Formula]:
    """All sentences in the canonical fragment, in size-then-text order,
    duplicates removed; every yielded formula passes the sentence check."""
    enum = _Enumerator(budget)
    seen: set[Formula] = set()
    root: _Ctx = ((), frozenset(), frozenset())
    for cost in range(budget.max_connective_depth + 1):
        batch = sorted(set(enum.exact(cost, budget.max_modal_depth, root)), key=format_formula)
        for f in batch:
            if f in seen:
                continue
            seen.add(f)
            if check_sentence(f).verdict:
                yield f


def distinguish(pm: PointedModel, pn: PointedModel, budget: EnumerationBudget) -> Optional[Formula]:
    """First enumerated sentence the two pointed models disagree on, or
    None when the whole fragment agrees.  Every hit is re-verified by an
    independent unmemoized evaluation before being returned."""
    left = Evaluator()
    right = Evaluator()
    for sentence in enumerate_sentences(budget):
        sat_m = pm.world in left.sentence_worlds(pm.model, sentence)
        sat_n = pn.world in right.sentence_worlds(pn.model, sentence)
        if sat_m != sat_n:
            fresh_m = holds_at(pm.model, pm.world, sentence, use_memo=False)
            fresh_n = holds_at(pn.model, pn.world, sentence, use_memo=False)
            if fresh_m == fresh_n:
                raise RuntimeError(
                    f"memoized and direct evaluation disagree on {format_formula(sentence)!r}"
                )
            return sentence
    return None
