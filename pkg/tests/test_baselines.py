"""Nearest-class voting and the traditional-LF reduction."""

import numpy as np

import plmodel as pm
from conftest import philox

A_ = pm.ABSTAIN


class TestNearestClass:
    def test_compatibility_count_example(self):
        # votes {0,1} and {1,2} on k=3: compatibility counts (1, 2, 1) -> class 1
        specs = [
            pm.PlfSpec.from_sets("a", [[0, 1], [2]], 3),
            pm.PlfSpec.from_sets("b", [[1, 2], [0]], 3),
        ]
        votes = pm.VoteMatrix([[0, 0]])
        assert pm.nearest_class(specs, votes).labels.tolist() == [1]

    def test_all_abstain_row_gets_sentinel(self):
        specs = [pm.traditional_lf(pm.LabelSpace(3))]
        votes = pm.VoteMatrix([[A_]])
        assert pm.nearest_class(specs, votes).labels.tolist() == [pm.UNLABELED]

    def test_tie_broken_by_balance_then_index(self):
        # single vote {0,2}: counts tie between classes 0 and 2
        specs = [pm.PlfSpec.from_sets("a", [[0, 2], [1]], 3)]
        votes = pm.VoteMatrix([[0]])
        balance = np.array([0.2, 0.3, 0.5])
        assert pm.nearest_class(specs, votes, balance).labels.tolist() == [2]
        # uniform balance: same tie falls to the lower index
        assert pm.nearest_class(specs, votes).labels.tolist() == [0]

    def test_column_order_invariance(self):
        rng = philox(3)
        specs = pm.random_plf_specs(pm.LabelSpace(4), 5, rng)
        params = pm.random_params(5, 4, rng)
        data = pm.sample(specs, params, 300, 0)
        base = pm.nearest_class(specs, data.votes)
        perm = rng.permutation(5)
        shuffled = pm.nearest_class(
            [specs[i] for i in perm], data.votes.select_columns(perm)
        )
        assert base == shuffled

    def test_matches_plurality_vote_oracle(self):
        # With traditional, non-abstaining labelers, nearest-class is plurality
        # voting; the oracle recounts with plain loops and the same tie policy.
        rng = philox(6)
        k = 4
        specs = [pm.traditional_lf(pm.LabelSpace(k), f"lf{i}") for i in range(5)]
        votes = pm.VoteMatrix(rng.integers(0, k, size=(200, 5)))
        balance = np.array([0.1, 0.4, 0.3, 0.2])
        got = pm.nearest_class(specs, votes, balance).labels

        for a in range(200):
            counts = [0] * k
            for i in range(5):
                counts[votes.votes[a, i]] += 1
            best = max(range(k), key=lambda j: (counts[j], balance[j], -j))
            assert got[a] == best


class TestLfsOnly:
    def mixed(self):
        k = 3
        specs = [
            pm.traditional_lf(pm.LabelSpace(k), "t0"),
            pm.PlfSpec.from_sets("p0", [[0, 1], [2]], k),
            pm.traditional_lf(pm.LabelSpace(k), "t1"),
            pm.PlfSpec.from_sets("p1", [[1, 2], [0]], k),
            pm.PlfSpec.from_sets("p2", [[0, 2], [1]], k),
        ]
        rng = philox(8)
        votes = pm.VoteMatrix(
            np.column_stack([rng.integers(0, s.n_outcomes, size=50) for s in specs])
        )
        return specs, votes

    def test_keeps_only_traditional(self):
        specs, votes = self.mixed()
        kept, reduced = pm.lfs_only(specs, votes)
        assert [s.name for s in kept] == ["t0", "t1"]
        assert reduced.n == 2
        np.testing.assert_array_equal(reduced.votes, votes.votes[:, [0, 2]])

    def test_all_partial_yields_empty(self, caplog):
        specs, votes = self.mixed()
        partial_only = [specs[1], specs[3], specs[4]]
        with caplog.at_level("WARNING"):
            kept, reduced = pm.lfs_only(partial_only, votes.select_columns([1, 3, 4]))
        assert kept == () and reduced.n == 0
        assert any("no traditional" in r.message for r in caplog.records)

    def test_traditional_lf_output_is_retained(self):
        space = pm.LabelSpace(4)
        specs = [pm.traditional_lf(space, "t")]
        votes = pm.VoteMatrix(np.zeros((3, 1), dtype=int))
        kept, _ = pm.lfs_only(specs, votes)
        assert len(kept) == 1

    def test_idempotent(self):
        specs, votes = self.mixed()
        once = pm.lfs_only(specs, votes)
        twice = pm.lfs_only(*once)
        assert [s.name for s in twice[0]] == [s.name for s in once[0]]
        assert twice[1] == once[1]
