"""Tests for structure and parameter estimation from a Kendall matrix."""

from __future__ import annotations

import logging

import numpy as np
import pytest
from pytest import LogCaptureFixture

from archimedean import (
    check_nesting,
    empirical_kendall_matrix,
    estimate_structure,
    exchangeable_model,
    parse_structure,
    sample_hac,
    theta_from_tau,
)
from archimedean.estimation import TAU_FLOOR
from archimedean.hac import iter_leaves
from errors import DataError

# S&P 500, NASDAQ, CAC 40, DAX, BRVM
INDEX_TAUS = [
    [1.0, 0.6978, -0.0012, 0.0350, 0.0014],
    [0.6978, 1.0, 0.0048, 0.0369, -0.0010],
    [-0.0012, 0.0048, 1.0, 0.0144, 0.0032],
    [0.0350, 0.0369, 0.0144, 1.0, -0.0027],
    [0.0014, -0.0010, 0.0032, -0.0027, 1.0],
]


@pytest.fixture(name="index_taus")
def fixture_index_taus() -> np.ndarray:
    return np.array(INDEX_TAUS)


def test_index_matrix_gives_fully_nested_topology(index_taus: np.ndarray):
    model = estimate_structure(index_taus, "gumbel")
    assert model.topology_string == "((((1 2) 4) 3) 5)"
    assert model.is_fully_nested
    assert check_nesting(model)
    groups = [sorted(iter_leaves(node)) for node in model.internal_nodes]
    assert groups == [[0, 1, 2, 3, 4], [0, 1, 2, 3], [0, 1, 3], [0, 1]]


@pytest.mark.slow
@pytest.mark.parametrize(
    ("family", "structure", "topology"),
    [
        ("gumbel", "((1 2)@4.0 (3 4)@3.0)@1.5", "((1 2) (3 4))"),
        ("clayton", "((1 2)@4.0 3)@1.0", "((1 2) 3)"),
    ],
)
def test_structure_estimated_from_its_own_sample_is_recovered(family: str, structure: str, topology: str):
    truth = parse_structure(structure, family)
    u = sample_hac(truth, 5000, seed=31)
    model = estimate_structure(empirical_kendall_matrix(u), family)
    assert model.topology_string == topology
    assert check_nesting(model)
    np.testing.assert_allclose(sorted(model.theta_vector), sorted(truth.theta_vector), rtol=0.1)


def test_node_taus_are_mean_pairwise_taus(index_taus: np.ndarray):
    model = estimate_structure(index_taus, "gumbel")
    np.testing.assert_allclose(model.tau_vector, [0.000225, 0.0060, 0.03595, 0.6978], atol=1e-12)


@pytest.mark.parametrize(
    ("family", "published"),
    [
        ("gumbel", (1.0002, 1.0060, 1.0373, 3.3100)),
        ("clayton", (0.00049, 0.0121, 0.0747, 4.6201)),
        ("frank", (0.0022, 0.0543, 0.3243, 11.3157)),
        ("joe", (1.0004, 1.0105, 1.0647, 5.4178)),
    ],
)
def test_theta_vector_is_close_to_published(index_taus: np.ndarray, family: str, published: tuple[float, ...]):
    model = estimate_structure(index_taus, family)
    thetas = model.theta_vector
    assert list(thetas) == sorted(thetas)
    # the root tau differs from the rounded published one by about 7%, so the root is compared loosely
    assert thetas[0] == pytest.approx(published[0], rel=0.15, abs=1e-4)
    for theta, expected in zip(thetas[1:], published[1:]):
        assert theta == pytest.approx(expected, rel=0.01)


def test_gumbel_thetas_follow_the_closed_form(index_taus: np.ndarray):
    model = estimate_structure(index_taus, "gumbel")
    expected = [1.0 / (1.0 - tau) for tau in model.tau_vector]
    np.testing.assert_allclose(model.theta_vector, expected, rtol=1e-12)


def test_negative_tau_is_floored_with_warning(caplog: LogCaptureFixture):
    tau = np.array([[1.0, -0.1], [-0.1, 1.0]])
    with caplog.at_level(logging.WARNING, logger="archimedean.estimation"):
        model = estimate_structure(tau, "clayton")
    assert model.tau_vector == (TAU_FLOOR,)
    assert model.theta_vector[0] == pytest.approx(theta_from_tau("clayton", TAU_FLOOR))
    assert "floored" in caplog.text


def test_exchangeable_model_uses_mean_off_diagonal_tau(index_taus: np.ndarray):
    model = exchangeable_model(index_taus, "gumbel")
    mean_tau = (index_taus.sum() - 5.0) / 20.0
    assert model.topology_string == "(1 2 3 4 5)"
    assert model.tau_vector[0] == pytest.approx(mean_tau)
    assert model.theta_vector[0] == pytest.approx(1.0 / (1.0 - mean_tau))


def test_two_assets_give_a_single_node():
    model = estimate_structure([[1.0, 0.5], [0.5, 1.0]], "gumbel")
    assert model.structure_string == "(1 2)@2.0"


@pytest.mark.parametrize(
    "matrix",
    [
        [[1.0, 0.2], [0.3, 1.0]],
        [[0.9, 0.2], [0.2, 1.0]],
        [[1.0]],
        [[1.0, np.nan], [np.nan, 1.0]],
        [[1.0, 1.5], [1.5, 1.0]],
    ],
)
def test_invalid_kendall_matrix_is_a_data_error(matrix: list[list[float]]):
    with pytest.raises(DataError):
        estimate_structure(matrix, "gumbel")
