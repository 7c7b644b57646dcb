import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bienayme_lab import paths, sample, tree
from bienayme_lab.paths import LatticePath, PathKind
from bienayme_lab.rng import stream

FIG_WALK = [0, -1, -2, -3, -1, -1, 0, -1, -2, -3, -1]
FIG_BFS = [0, 2, 2, 3, 2, 1, 0, 2, 1, 0, -1]
FIG_LEX = [0, 2, 2, 1, 2, 1, 3, 2, 1, 0, -1]


def all_trees(n):
    for degs in sample._excursion_degree_seqs(n):
        yield tree.PlaneTree.from_bfs_degrees(np.array(degs))


def random_tree(n, seed):
    from bienayme_lab import dist
    g = dist.load_spec({"kind": "geometric"})
    exc, _ = sample.sample_bridges_exact(g, n, stream(seed, 0), 1)
    return tree.PlaneTree.from_bfs_degrees(exc[0] + 1)


class TestGoldenWalk:
    def test_vervaat_reproduces_the_picture(self):
        exc, m = paths.vervaat(LatticePath(FIG_WALK))
        assert exc.values.tolist() == FIG_BFS
        assert m == 3

    def test_bfs_decode_gives_the_tree(self):
        t = paths.decode(LatticePath(FIG_BFS), "bfs")
        assert tree.height(t) == 3
        w, profile = tree.width_profile(t)
        assert w == 3 and profile.tolist() == [1, 3, 3, 3]
        assert paths.encode(t, "lex").values.tolist() == FIG_LEX
        assert paths.encode(t, "bfs").values.tolist() == FIG_BFS


class TestCodec:
    def test_single_vertex(self):
        t = tree.PlaneTree.from_bfs_degrees([0])
        for order in ("lex", "bfs"):
            assert paths.encode(t, order).values.tolist() == [0, -1]
            assert paths.decode(LatticePath([0, -1]), order) == t

    def test_three_vertex_codes(self):
        # (0,0,0,-1) is the 3-path, (0,1,0,-1) the 2-leaf star
        chain = paths.decode(LatticePath([0, 0, 0, -1]), "lex")
        assert tree.height(chain) == 2
        cherry = paths.decode(LatticePath([0, 1, 0, -1]), "lex")
        assert tree.height(cherry) == 1
        assert tree.max_degree(cherry)[0] == 2

    @pytest.mark.parametrize("order", ["lex", "bfs"])
    def test_roundtrip_exhaustive(self, order):
        # all plane trees through n = 10 (4862 at n = 10)
        for n in range(1, 11):
            count = 0
            for t in all_trees(n):
                p = paths.encode(t, order)
                assert paths.classify(p.values) is PathKind.EXCURSION
                assert paths.decode(p, order) == t
                count += 1
        assert count == 4862

    @pytest.mark.parametrize("order", ["lex", "bfs"])
    def test_roundtrip_random_large(self, order):
        for seed in range(10):
            t = random_tree(64, seed)
            assert paths.decode(paths.encode(t, order), order) == t

    def test_decode_rejects_non_excursions(self):
        with pytest.raises(ValueError):
            paths.decode(LatticePath([0, -1, -2, 1]), "lex")


class TestClassify:
    @pytest.mark.parametrize("values,kind", [
        (FIG_BFS, PathKind.EXCURSION),
        ([0, -1, -2], PathKind.WALK),
        ([0, -2], PathKind.INVALID),
        (FIG_WALK, PathKind.BRIDGE),
        ([0, -1], PathKind.EXCURSION),
        ([1, 0], PathKind.INVALID),
    ])
    def test_examples(self, values, kind):
        assert paths.classify(values) is kind


class TestVervaat:
    def test_excursion_fixed(self):
        e = LatticePath(FIG_BFS)
        out, m = paths.vervaat(e)
        assert out == e and m == len(e)

    def test_tiny(self):
        out, m = paths.vervaat(LatticePath([0, -1]))
        assert out.values.tolist() == [0, -1] and m == 1

    @given(st.lists(st.integers(min_value=-1, max_value=4), min_size=1, max_size=40))
    @settings(max_examples=300, deadline=None)
    def test_always_excursion_same_multiset(self, increments):
        # force a bridge: append steps of -1 until the sum is -1
        s = sum(increments)
        if s >= 0:
            increments = increments + [-1] * (s + 1)
        elif s < -1:
            increments = increments + [abs(s) - 1]
        b = LatticePath.from_increments(np.array(increments))
        out, m = paths.vervaat(b)
        assert paths.classify(out.values) is PathKind.EXCURSION
        assert sorted(out.increments) == sorted(b.increments)
        assert 0 <= m <= len(b)

    def test_cycle_lemma_exhaustive(self):
        # every excursion of length n <= 9 has exactly n bridge preimages;
        # increment words summing to -1 cannot be periodic, so no
        # multiplicity correction ever applies
        for n in range(1, 10):
            for t in all_trees(n):
                e = paths.encode(t, "lex")
                inc = e.increments
                preimages = set()
                for m in range(n):
                    rot = np.concatenate([inc[m:], inc[:m]])
                    b = LatticePath.from_increments(rot)
                    out, _ = paths.vervaat(b)
                    assert out == e
                    preimages.add(rot.tobytes())
                assert len(preimages) == n

    def test_rejects_walks(self):
        with pytest.raises(ValueError):
            paths.vervaat(LatticePath([0, -1, -2]))


class TestWidthUpper:
    def test_examples(self):
        assert paths.width_upper(LatticePath(FIG_BFS)) == 3
        assert paths.width_upper(LatticePath([0, -1])) == 0

    def test_path_tree(self):
        t = tree.PlaneTree.from_bfs_degrees([1] * 9 + [0])
        assert paths.width_upper(paths.encode(t, "bfs")) == 1

    def test_sandwich_random(self):
        for seed in range(200):
            t = random_tree(40, seed + 1000)
            w, _ = tree.width_profile(t)
            delta, _ = tree.max_degree(t)
            assert delta <= w <= paths.width_upper(paths.encode(t, "bfs"))
