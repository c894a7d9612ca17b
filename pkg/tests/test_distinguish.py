import itertools

from gkmc.bisim import bisimilar, brute_force_bisim
from gkmc.distinguish import EnumerationBudget, distinguish, enumerate_sentences
from gkmc.generate import GenSpec, SplitMix64, break_child, dup_child, gen_model
from gkmc.model import GenealogicalModel, PointedModel
from gkmc.semantics import holds_at
from gkmc.syntax import Prop, Vocabulary, check_sentence, format_formula, parse

P_ONLY = Vocabulary.of(props=["p"])
P_C = Vocabulary.of(props=["p"], constants=["c"])


def _pointed(m, k=0):
    return PointedModel(m, m.worlds[k])


# --- enumeration ---------------------------------------------------------


def test_depth_one_stream():
    stream = list(enumerate_sentences(EnumerationBudget(1, 1, P_ONLY, allow_xi=False)))
    texts = [format_formula(f) for f in stream]
    assert texts[0] == "T"
    for member in ["T", "F", "p", "~p", "[]p", "<>p", "[]T"]:
        assert parse(member, P_ONLY) in stream, member
    assert len(texts) == len(set(texts))


def test_stream_is_deterministic():
    budget = EnumerationBudget(3, 2, P_C, allow_xi=True)
    first = [format_formula(f) for f in enumerate_sentences(budget)]
    second = [format_formula(f) for f in enumerate_sentences(budget)]
    assert first == second


def test_stream_members_are_sentences():
    budget = EnumerationBudget(3, 3, P_C, allow_xi=True)
    for f in enumerate_sentences(budget):
        assert check_sentence(f).verdict, format_formula(f)


def test_stream_has_no_structural_duplicates():
    budget = EnumerationBudget(3, 3, P_C, allow_xi=True)
    stream = list(enumerate_sentences(budget))
    assert len(stream) == len(set(stream))


def test_xi_forall_query_within_depth_three():
    budget = EnumerationBudget(3, 1, P_C, allow_xi=True)
    assert parse("xi X. forall x. ?[X] x") in set(enumerate_sentences(budget))


def test_no_xi_budget_excludes_xi():
    from gkmc.syntax import Xi, subformulas

    budget = EnumerationBudget(3, 2, P_C, allow_xi=False)
    for f in enumerate_sentences(budget):
        assert not any(isinstance(node, Xi) for _, node in subformulas(f))


def test_modal_budget_respected():
    from gkmc.syntax import And, Box, Forall, Not, QueryConst, QueryVar, Xi

    def modal_depth(f):
        if isinstance(f, Box):
            return 1 + modal_depth(f.operand)
        if isinstance(f, Not):
            return modal_depth(f.operand)
        if isinstance(f, And):
            return max(modal_depth(f.left), modal_depth(f.right))
        if isinstance(f, (Forall, Xi, QueryVar, QueryConst)):
            return modal_depth(f.body)
        return 0

    budget = EnumerationBudget(4, 1, P_ONLY, allow_xi=False)
    for f in itertools.islice(enumerate_sentences(budget), 400):
        assert modal_depth(f) <= 1, format_formula(f)


# --- distinguishing ------------------------------------------------------


def test_prop_difference_found_immediately():
    m = gen_model(GenSpec(seed=3, max_worlds=3, max_children=1, max_depth=1, prop_count=1, constant_count=1))
    w0 = m.worlds[0]
    valuation = dict(m.valuation)
    valuation["p"] = valuation.get("p", frozenset()) ^ {w0}
    n = GenealogicalModel(m.worlds, m.relation, valuation, m.children, m.assignment, m.tracking)
    separator = distinguish(_pointed(m), _pointed(n), EnumerationBudget(3, 3, P_C))
    assert separator == Prop("p")


def test_identical_pointed_models_never_separated():
    m = gen_model(GenSpec(seed=8, max_worlds=3, max_children=2, max_depth=1, prop_count=1))
    for d in (1, 2, 3):
        assert distinguish(_pointed(m), _pointed(m), EnumerationBudget(d, d, P_C)) is None


def test_bisimilar_pairs_never_separated():
    found = 0
    seed = 0
    while found < 12 and seed < 300:
        m = gen_model(GenSpec(seed=seed, max_worlds=3, max_children=1, max_depth=1, prop_count=1, constant_count=1))
        seed += 1
        if not m.children:
            continue
        found += 1
        d = dup_child(m, sorted(m.children)[0])
        assert bisimilar(_pointed(m), _pointed(d)).bisimilar
        assert distinguish(_pointed(m), _pointed(d), EnumerationBudget(3, 2, P_C)) is None
    assert found == 12


def test_break_child_pairs_get_verified_separators():
    separated = total = 0
    for seed in range(60):
        m = gen_model(GenSpec(seed=seed, max_worlds=3, max_children=2, max_depth=1, prop_count=1, constant_count=1, edge_density=0.45))
        if not m.children:
            continue
        rng = SplitMix64(seed)
        label = rng.choice(sorted(m.children))
        world = rng.choice(m.children[label].worlds)
        b = break_child(m, label, "p", world)
        pa, pb = _pointed(m), _pointed(b)
        if brute_force_bisim(pa, pb):
            continue
        total += 1
        separator = distinguish(pa, pb, EnumerationBudget(4, 4, P_C))
        if separator is None:
            continue
        separated += 1
        assert holds_at(pa.model, pa.world, separator) != holds_at(pb.model, pb.world, separator)
    assert total >= 20
    assert separated / total >= 0.9


def test_distinguish_deterministic():
    m = gen_model(GenSpec(seed=5, max_worlds=3, max_children=2, max_depth=1, prop_count=1))
    n = gen_model(GenSpec(seed=17, max_worlds=3, max_children=2, max_depth=1, prop_count=1))
    budget = EnumerationBudget(3, 3, P_C)
    first = distinguish(_pointed(m), _pointed(n), budget)
    second = distinguish(_pointed(m), _pointed(n), budget)
    assert first == second
