import itertools
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from indescent.heaps import EMP, Heap, PointsTo, SymbolicHeap
from indescent.herbrand import Sat
from indescent.restrictions import rule_pairs
from indescent.seplog import (
    UnionFind,
    Valid,
    pair_of_model,
    sh_abstract_lfp,
    sh_empty_possible,
    sh_entails,
    sh_entails_oracle,
    sh_enumerate,
    sh_eval,
    sh_sat,
    sh_sat_oracle,
    sh_witnesses,
    sl_member,
    sl_non_filtering,
)
from indescent.terms import Var, eq, neq

x, y, z, w, y1, y2, z1, z2, xp, yp = (Var(n, "Loc") for n in "x y z w y1 y2 z1 z2 x' y'".split())
VS = [x, y, z, w]


def pto(s, d):
    return PointsTo(s, (d,))


def sh(pure=(), cells=()):
    return SymbolicHeap(pure, cells)


def lsp_ref(a, b, h):
    """Reference list-segment semantics on plain dicts."""
    if a not in h:
        return False
    if h == {a: b}:
        return True
    rest = {k: v for k, v in h.items() if k != a}
    return bool(rest) and lsp_ref(h[a], b, rest)


def test_union_find():
    uf = UnionFind()
    uf.union(1, 2)
    uf.union(3, 4)
    uf.union(2, 4)
    assert uf.find(1) == uf.find(3)
    uf.add(5)
    assert uf.find(5) != uf.find(1)


def test_sat_examples():
    assert sh_sat(sh([eq(y, yp)], [pto(x, z)])) is Sat.SAT
    assert sh_sat(sh([eq(x, xp)], [pto(x, y), pto(xp, z)])) is Sat.UNSAT
    assert sh_sat(sh([eq(x, y), neq(x, y)])) is Sat.UNSAT


def test_entails_examples():
    one = sh(cells=[pto(x, y)])
    assert sh_entails(one, sh([eq(y, yp)], [pto(x, z)]), {yp: y, z: y})
    assert sh_entails(one, one)
    assert not sh_entails(one, EMP)
    assert not sh_eval(EMP, {x: 0, y: 1}, Heap({0: (1,)}))


def test_witness_examples():
    phi = sh([eq(y, y1)], [pto(x, z1)])
    psi = sh([eq(y, y2)], [pto(x, z2)])
    ws = sh_witnesses(phi, [(z1, y1)], psi, [(z2, y2)])
    assert list(ws) == [{z2: z1, y2: y1}]
    assert not sh_witnesses(phi, [(z1, y1)], EMP, [(z2, y2)])
    assert len(sh_witnesses(phi, [(z1, y1)], psi, [(z2, y2)], brute_force=True)) == 1


def test_empty_possible():
    assert sh_empty_possible(sh([eq(x, y)]))
    assert not sh_empty_possible(sh([eq(y, yp)], [pto(x, z)]))
    assert not sh_empty_possible(sh([eq(x, y), neq(x, y)]))


def test_abstract_fixpoint(sl):
    lfp = sh_abstract_lfp(sl)
    show = {p: sorted((tuple(sorted(v.alloc)), tuple(sorted(v.eq))) for v in vs) for p, vs in lfp.items()}
    # from exhaustive enumeration of list-segment heaps over ≤ 3 locations
    assert show["lsp"] == [((1,), ()), ((1, 2), ()), ((1, 2), ((1, 2),))]
    assert ((), ((1, 2),)) in show["lse"]
    assert ((), ((1, 2),)) not in show["lso"]


def test_abstraction_covers_enumerated_models(sl):
    lfp = sh_abstract_lfp(sl)
    for p in sl.predicates:
        for args, heap, _ in sh_enumerate(sl, p, max_unfold=4):
            assert pair_of_model(args, heap) in lfp[p]


def test_enumerate_small_lists(sl):
    assert sh_enumerate(sl, "lsp", max_unfold=0) == set()
    one = sh_enumerate(sl, "lsp", max_unfold=1)
    assert {len(h) for _, h, _ in one} == {1}
    two = sh_enumerate(sl, "lsp", max_unfold=2)
    assert {(len(h), args[0] == args[1]) for args, h, _ in two} == {(1, False), (1, True), (2, False), (2, True)}
    odd = sh_enumerate(sl, "lso", max_unfold=1)
    assert {len(h) for _, h, _ in odd} == {1}


def test_enumeration_matches_reference_semantics(sl):
    got = sh_enumerate(sl, "lsp", max_unfold=3)
    for args, heap, _ in got:
        assert lsp_ref(*args, {k: v[0] for k, v in heap.items()})
    # every list of ≤ 2 cells over 3 locations is found by membership
    for n in range(1, 3):
        for dom in itertools.permutations(range(3), n):
            for img in itertools.product(range(3), repeat=n):
                h = dict(zip(dom, img))
                heap = Heap({k: (v,) for k, v in h.items()})
                for a, b in itertools.product(range(3), repeat=2):
                    assert (sl_member(sl, "lsp", (a, b), heap) is not None) == lsp_ref(a, b, h)


def test_unfolding_trees_partition_the_heap(sl):
    for p in sl.predicates:
        for _, heap, tree in sh_enumerate(sl, p, max_unfold=4):
            doms = [set(n.heap) for n in tree.nodes()]
            assert sum(map(len, doms)) == len(set().union(*doms))
            assert tree.total_heap() == heap


def test_example_is_non_filtering(sl):
    assert isinstance(sl_non_filtering(sl), Valid)


def test_flat_witnesses_match_brute_force(sl):
    for pr in rule_pairs(sl, same_shape=True):
        flat = sh_witnesses(pr.phi, pr.x_tuples, pr.psi, pr.y_tuples)
        full = sh_witnesses(pr.phi, pr.x_tuples, pr.psi, pr.y_tuples, brute_force=True)
        assert len(flat) == len(full), pr.label


def random_heap(rng):
    pure = [(eq if rng.random() < 0.6 else neq)(rng.choice(VS), rng.choice(VS)) for _ in range(rng.randint(0, 2))]
    cells = [pto(rng.choice(VS), rng.choice(VS)) for _ in range(rng.randint(0, 2))]
    return sh([l for l in pure if l.lhs != l.rhs], cells)


def test_entails_agrees_with_small_models():
    rng = random.Random(11)
    valid = 0
    for _ in range(500):
        phi = random_heap(rng)
        psi = random_heap(rng) if rng.random() < 0.7 else sh(phi.pure[:1], phi.cells)
        got = sh_entails(phi, psi)
        assert got == sh_entails_oracle(phi, psi, nlocs=4), (phi, psi)
        valid += got
    assert 50 < valid < 450


heaps = st.builds(
    lambda pure, cells: sh([l for l in pure if l.lhs != l.rhs], cells),
    st.lists(st.builds(lambda p, s, t: (eq if p else neq)(s, t), st.booleans(), st.sampled_from(VS), st.sampled_from(VS)), max_size=3),
    st.lists(st.builds(pto, st.sampled_from(VS), st.sampled_from(VS)), max_size=3),
)


@settings(max_examples=300, deadline=None)
@given(heaps)
def test_sat_has_small_models(phi):
    assert (sh_sat(phi) is Sat.SAT) == sh_sat_oracle(phi)
