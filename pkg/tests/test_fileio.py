"""Round-trips and failure modes for every project file format."""

import numpy as np
import pytest

import plmodel as pm
from plmodel import fileio
from conftest import philox

A_ = pm.ABSTAIN


def demo_project():
    names = ("politics", "sports", "business")
    specs = (
        pm.PlfSpec.from_sets("president", [[0, 2], [1]], 3),
        pm.traditional_lf(pm.LabelSpace(3), "keywords"),
        pm.PlfSpec.from_sets("scores", [[1], [0, 2]], 3),
    )
    return fileio.ProjectSpec(pm.LabelSpace(3), names, specs)


def random_project(seed):
    rng = philox(seed)
    k = int(rng.integers(2, 6))
    n = int(rng.integers(1, 6))
    names = tuple(f"class_{j}" for j in range(k))
    specs = tuple(pm.random_plf_specs(pm.LabelSpace(k), n, rng))
    project = fileio.ProjectSpec(pm.LabelSpace(k), names, specs)
    params = pm.random_params(n, k, rng, uniform_balance=False)
    data = pm.sample(specs, params, int(rng.integers(1, 40)), seed)
    return project, params, data


class TestSpecFile:
    def test_round_trip_value_and_bytes(self):
        project = demo_project()
        text = fileio.serialize_spec_file(project)
        parsed = fileio.parse_spec_file(text)
        assert parsed.class_names == project.class_names
        assert parsed.specs == project.specs
        assert fileio.serialize_spec_file(parsed) == text

    def test_randomized_round_trips(self):
        for seed in range(15):
            project, _, _ = random_project(seed)
            text = fileio.serialize_spec_file(project)
            assert fileio.serialize_spec_file(fileio.parse_spec_file(text)) == text

    def test_unknown_class_rejected(self):
        text = fileio.serialize_spec_file(demo_project()).replace('"sports"', '"soprts"', 1)
        with pytest.raises(pm.ParseError):
            fileio.parse_spec_file(text)

    def test_invalid_codomain_rejected(self):
        bad = '{"classes": ["a", "b"], "plfs": [{"name": "x", "codomain": [["a"]]}]}'
        with pytest.raises(pm.SpecValidationError):
            fileio.parse_spec_file(bad)

    def test_not_json(self):
        with pytest.raises(pm.ParseError):
            fileio.parse_spec_file("not json {")

    def test_duplicate_plf_names(self):
        bad = (
            '{"classes": ["a", "b"], "plfs": ['
            '{"name": "x", "codomain": [["a"], ["b"]]},'
            '{"name": "x", "codomain": [["a"], ["b"]]}]}'
        )
        with pytest.raises(pm.ParseError):
            fileio.parse_spec_file(bad)


class TestVotesFile:
    def test_round_trip(self):
        project = demo_project()
        votes = pm.VoteMatrix(np.array([[0, 2, A_], [1, A_, 0], [A_, A_, 1]]))
        text = fileio.serialize_votes(votes, project)
        parsed = fileio.parse_votes(text, project)
        assert parsed == votes
        assert fileio.serialize_votes(parsed, project) == text

    def test_randomized_round_trips(self):
        for seed in range(15):
            project, _, data = random_project(100 + seed)
            text = fileio.serialize_votes(data.votes, project)
            assert fileio.serialize_votes(fileio.parse_votes(text, project), project) == text

    def test_header_mismatch(self):
        project = demo_project()
        votes = pm.VoteMatrix(np.zeros((1, 3), dtype=int))
        text = fileio.serialize_votes(votes, project).replace("president", "mayor")
        with pytest.raises(pm.ParseError):
            fileio.parse_votes(text, project)

    def test_out_of_range_index(self):
        project = demo_project()
        text = "president,keywords,scores\n9,0,0\n"
        with pytest.raises(pm.VoteValidationError):
            fileio.parse_votes(text, project)

    def test_garbage_cell(self):
        project = demo_project()
        text = "president,keywords,scores\nhello,0,0\n"
        with pytest.raises(pm.ParseError):
            fileio.parse_votes(text, project)


class TestParamsFile:
    def test_round_trip_exact(self):
        rng = philox(7)
        params = pm.random_params(4, 3, rng, uniform_balance=False)
        text = fileio.serialize_params(params)
        parsed = fileio.parse_params(text)
        np.testing.assert_array_equal(parsed.A, params.A)
        np.testing.assert_array_equal(parsed.B, params.B)
        np.testing.assert_array_equal(parsed.class_balance, params.class_balance)
        assert fileio.serialize_params(parsed) == text

    def test_bad_mode(self):
        text = fileio.serialize_params(pm.default_params(2, 2)).replace("fixed", "floating")
        with pytest.raises(pm.ParseError):
            fileio.parse_params(text)

    def test_inconsistent_shapes(self):
        bad = '{"A": [[0.0, 0.0]], "B": [0.0, 0.0], "class_balance": [0.5, 0.5], "balance_mode": "fixed"}'
        with pytest.raises(pm.ParseError):
            fileio.parse_params(bad)


class TestPosteriorFile:
    def test_round_trip_and_stochastic_rows(self):
        rng = philox(8)
        probs = rng.dirichlet(np.ones(4), size=25)
        names = ("a", "b", "c", "d")
        text = fileio.serialize_posterior(probs, names)
        parsed, header = fileio.parse_posterior(text)
        assert header == names
        # 9 significant digits keep rows stochastic within 1e-6
        np.testing.assert_allclose(parsed.sum(axis=1), 1.0, atol=1e-6)
        np.testing.assert_allclose(parsed, probs, atol=1e-8)
        assert fileio.serialize_posterior(parsed, header) == text

    def test_ragged_row_rejected(self):
        with pytest.raises(pm.ParseError):
            fileio.parse_posterior("a,b\n0.5,0.5\n0.5\n")


class TestLabelFiles:
    def test_round_trip_with_unlabeled(self):
        names = ("x", "y", "z")
        labels = np.array([0, 2, pm.UNLABELED, 1])
        text = fileio.serialize_labels(labels, names)
        parsed = fileio.parse_labels(text, names)
        np.testing.assert_array_equal(parsed, labels)
        assert fileio.serialize_labels(parsed, names) == text

    def test_unknown_label_rejected(self):
        with pytest.raises(pm.ParseError):
            fileio.parse_labels("label\nmystery\n", ("x", "y"))

    def test_header_required(self):
        with pytest.raises(pm.ParseError):
            fileio.parse_labels("x\n", ("x", "y"))


class TestFeatureAndModelFiles:
    def test_features_round_trip_full_precision(self):
        rng = philox(9)
        X = rng.normal(size=(10, 3))
        text = fileio.serialize_features(X)
        parsed = fileio.parse_features(text)
        np.testing.assert_array_equal(parsed, X)
        assert fileio.serialize_features(parsed) == text

    def test_end_model_round_trip(self):
        rng = philox(10)
        model = pm.LinearModel(rng.normal(size=(3, 2)), rng.normal(size=2))
        text = fileio.serialize_end_model(model)
        parsed = fileio.parse_end_model(text)
        np.testing.assert_array_equal(parsed.weights, model.weights)
        np.testing.assert_array_equal(parsed.bias, model.bias)
        assert fileio.serialize_end_model(parsed) == text
