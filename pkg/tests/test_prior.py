"""Prior model, exact satisfaction probability, information gain."""

import json
import math

import numpy as np
import pytest

from gtl.errors import InputError, OutOfScopeError, UsageError
from gtl.formula import parse
from gtl.graph import LabeledGraph, NodeProposition
from gtl.prior import (
    PriorModel, atom_probability, compute_ig, counters, exists_probability,
    letter_distribution, load_prior, reset_counters, satisfaction_probability,
    static_reach,
)

from conftest import prob_oracle, two_bin_prior


def one_node_prior(L=2):
    g = LabeledGraph(["a"], [])
    return two_bin_prior(g, L)


class TestPriorModel:
    def test_validation(self):
        g = LabeledGraph(["a"], [])
        with pytest.raises(InputError):
            PriorModel(g, 2, ((0.0, 1.0), (0.5, 2.0)),
                       {"a": np.tile([0.5, 0.5], (2, 1))}, {})
        with pytest.raises(InputError):
            PriorModel(g, 2, ((0.0, 1.0),), {"a": np.tile([0.7], (2, 1))}, {})
        with pytest.raises(InputError):
            PriorModel(g, 2, ((0.0, 1.0),), {"a": np.ones((3, 1))}, {})

    def test_missing_edge_label(self):
        g = LabeledGraph(["a", "b"], [("e1", "a", "b")])
        with pytest.raises(InputError):
            PriorModel(g, 1, ((0.0, 1.0),),
                       {v: np.ones((1, 1)) for v in g.nodes}, {})

    def test_default_pmf(self):
        g = LabeledGraph(["a", "b"], [])
        p = PriorModel(g, 2, ((0.0, 1.0), (1.0, 2.0)), {},
                       {}, default_pmf=np.array([0.25, 0.75]))
        assert np.allclose(p.node_pmf("b"), [[0.25, 0.75], [0.25, 0.75]])

    def test_json_round_trip(self, tmp_path):
        prior = one_node_prior()
        path = tmp_path / "prior.json"
        path.write_text(json.dumps(prior.to_json_dict()))
        back = load_prior(path, prior.graph)
        assert back.bins == prior.bins and back.L == prior.L
        assert np.allclose(back.node_pmf("a"), prior.node_pmf("a"))


class TestAtomProbability:
    def test_within_bin_uniform(self):
        prior = one_node_prior()
        # bins (0,1), (1,2) with mass 0.5 each; x <= 1.5 covers 0.5 + 0.25
        assert atom_probability(prior, parse("x <= 1.5"), "a", 1) == \
            pytest.approx(0.75)
        assert atom_probability(prior, NodeProposition(">=", 0.5), "a", 2) == \
            pytest.approx(0.75)
        assert atom_probability(prior, parse("x <= 0"), "a", 1) == 0.0
        assert atom_probability(prior, parse("x >= 1"), "a", 1) == \
            pytest.approx(0.5)

    def test_time_bounds_checked(self):
        with pytest.raises(InputError):
            atom_probability(one_node_prior(), parse("x <= 1"), "a", 3)


class TestStaticReach:
    def test_reach_and_exists(self, six_node):
        prior = two_bin_prior(
            six_node.graph, 1,
            edge_labels={e: six_node.edge_label(e, 1)
                         for e in six_node.graph.edges})
        chain = parse("E 1 via (y <= 1) : x <= 1").chain
        assert sorted(static_reach(prior, "v4", chain)) == ["v1", "v5"]
        # 2-of-2 independent successes with per-node P(x <= 1) = 0.5
        p = exists_probability(prior, 2, chain, parse("x <= 1").prop(), "v4", 1)
        assert p == pytest.approx(0.25)
        # asking for 3 of 2 reachable nodes is impossible
        p = exists_probability(prior, 3, chain, parse("x <= 1").prop(), "v4", 1)
        assert p == 0.0


class TestLetterDistribution:
    def test_single_atom(self):
        prior = one_node_prior()
        dist = letter_distribution(prior, [parse("x <= 1.5")], "a", 1)
        assert np.allclose(dist, [0.25, 0.75])
        assert dist.sum() == pytest.approx(1.0)

    def test_correlated_atoms_not_independent(self):
        # x <= 0.6 implies x <= 1.4, so the joint letter {ap1 only} has the
        # whole mass of (0.6, 1.4] and {ap0 only} is impossible
        prior = one_node_prior()
        aps = [parse("x <= 0.6"), parse("x <= 1.4")]
        dist = letter_distribution(prior, aps, "a", 1)
        assert dist[0b01] == pytest.approx(0.0)
        assert dist[0b11] == pytest.approx(0.3)
        assert dist[0b10] == pytest.approx(0.4)
        assert dist[0b00] == pytest.approx(0.3)

    def test_exists_letter(self, six_node):
        prior = two_bin_prior(
            six_node.graph, 1,
            edge_labels={e: six_node.edge_label(e, 1)
                         for e in six_node.graph.edges})
        f = parse("E 2 via (y <= 1) : x >= 1")
        dist = letter_distribution(prior, [f], "v4", 1)
        # both of v4's reached nodes must land at x >= 1 (P = 0.5 each)
        assert dist[1] == pytest.approx(0.25)
        assert dist.sum() == pytest.approx(1.0)


class TestSatisfactionProbability:
    def test_boundary_atom_spot_value(self):
        prior = one_node_prior(L=2)
        p = satisfaction_probability(prior, parse("F[<=1] x >= 1"), "a")
        assert p == pytest.approx(0.75, abs=1e-12)

    def test_constants(self):
        prior = one_node_prior()
        assert satisfaction_probability(prior, parse("TRUE"), "a") == 1.0
        assert satisfaction_probability(prior, parse("FALSE"), "a") == 0.0

    @pytest.mark.parametrize("text", [
        "F[<=1] x >= 1",
        "G x <= 1.5",
        "x <= 0.5 U x >= 1",
        "G (x >= 1 -> F[<=1] x <= 0.5)",
        "F[>=1][<=2] x >= 0.7",
        "! F x >= 1.2",
        "F E 1 via (y <= 1) : x >= 1",
        "G[<=1] E 2 via (y <= 2) : x <= 0.8",
    ])
    def test_against_enumeration_oracle(self, text):
        g = LabeledGraph(["a", "b", "c"], [("e1", "a", "b"), ("e2", "b", "c")])
        rng = np.random.default_rng(13)
        prior = two_bin_prior(g, 3, rng_np=rng,
                              edge_labels={"e1": 1.0, "e2": 2.0})
        f = parse(text)
        for v in g.nodes:
            got = satisfaction_probability(prior, f, v)
            want = prob_oracle(prior, f, v)
            assert got == pytest.approx(want, abs=1e-10), (text, v)

    def test_type_two_against_oracle(self):
        g = LabeledGraph(["a", "b", "c"], [("e1", "a", "b"), ("e2", "b", "c")])
        rng = np.random.default_rng(17)
        prior = two_bin_prior(g, 2, rng_np=rng,
                              edge_labels={"e1": 1.0, "e2": 1.0})
        for text in ["E 1 via (y <= 1) : F x >= 1",
                     "E 2 via (y <= 1) : G x <= 1.5",
                     "E 2 via (y <= 1) via (y <= 1) : F[<=1] x >= 0.8"]:
            f = parse(text)
            got = satisfaction_probability(prior, f, "b")
            want = prob_oracle(prior, f, "b")
            assert got == pytest.approx(want, abs=1e-10), text

    def test_out_of_fragment_rejected(self):
        prior = one_node_prior()
        with pytest.raises(OutOfScopeError):
            satisfaction_probability(prior, parse("F x >= 1 & G x <= 1.5"), "a")

    def test_ungrounded_rejected(self):
        with pytest.raises(UsageError):
            satisfaction_probability(one_node_prior(), parse("x <= ?c"), "a")


class TestCounters:
    def test_transition_evals_scale_with_horizon(self):
        f = parse("G (x >= 1 -> F[<=1] x <= 0.5)")
        g = LabeledGraph(["a"], [])

        def evals(L):
            prior = two_bin_prior(g, L)
            reset_counters()
            satisfaction_probability(prior, f, "a")
            return counters["transition_evals"]

        e1, e2 = evals(4), evals(8)
        assert e2 == 2 * e1


class TestInfoGain:
    def test_trivial_formulas_zero(self):
        prior = one_node_prior()
        assert compute_ig(prior, parse("TRUE")).average_ig == 0.0
        assert compute_ig(prior, parse("FALSE")).average_ig == 0.0
        # alternate spellings of truth are also detected after desugaring
        assert compute_ig(prior, parse("x <= 1 -> x <= 1")).info_gain == \
            {"a": 0.0}

    def test_spot_value(self):
        prior = one_node_prior(L=2)
        rep = compute_ig(prior, parse("F[<=1] x >= 1"))
        assert rep.average_ig == pytest.approx(-math.log(0.75) / 2, abs=1e-12)
        assert rep.probabilities["a"] == pytest.approx(0.75, abs=1e-12)
        assert rep.units == "nats per time step"

    def test_zero_probability_zero_ig(self):
        prior = one_node_prior()
        rep = compute_ig(prior, parse("G x >= 5"))
        assert rep.probabilities["a"] == 0.0
        assert rep.info_gain["a"] == 0.0

    def test_node_subset(self, six_node):
        prior = two_bin_prior(
            six_node.graph, 2,
            edge_labels={e: six_node.edge_label(e, 1)
                         for e in six_node.graph.edges})
        rep = compute_ig(prior, parse("F x >= 1"), nodes=["v1", "v2"])
        assert set(rep.probabilities) == {"v1", "v2"}
        with pytest.raises(InputError):
            compute_ig(prior, parse("F x >= 1"), nodes=["zzz"])
