import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gendercca.cca import fit_cca, project_and_correlate
from gendercca.errors import DegenerateInput
from gendercca.stats import bonferroni, permutation_p_value, permutation_test, replicate_stream
from oracles import exhaustive_permutation_p, one_hot
from synthetic import null_views, signal_views

# five training nouns: 120 column orders, exact p = 24/120
SMALL_G_TRAIN = one_hot([0, 1, 0, 1, 1])
SMALL_E_TRAIN = np.array([[1.2, -0.4, 0.3, 0.1, -0.9], [0.5, 0.8, -1.0, 0.2, 0.4]])
SMALL_G_TEST = one_hot([0, 1, 1, 0, 1, 0, 0, 1])
SMALL_E_TEST = np.array([
    [0.7, -0.2, 0.4, 0.9, -1.1, 0.1, 0.3, -0.5],
    [0.3, 0.1, -0.6, 1.2, 0.4, -0.8, 0.2, 0.9],
])
SMALL = (SMALL_G_TRAIN, SMALL_E_TRAIN, SMALL_G_TEST, SMALL_E_TEST)


def _split_views(codes, E, n_train):
    G = one_hot(codes)
    return G[:, :n_train], E[:, :n_train], G[:, n_train:], E[:, n_train:]


def test_zero_permutations_give_p_one():
    outcome = permutation_test(*SMALL, B=0, seed=1)
    assert outcome.p_raw == 1.0
    assert outcome.exceed_count == 0


def test_p_floor_when_observed_beats_all():
    codes, E = signal_views(np.random.default_rng(0), 400, 5, flip=0.0)
    outcome = permutation_test(*_split_views(codes, E, 300), B=99, seed=4)
    assert outcome.exceed_count == 0
    assert outcome.p_raw == 0.01


def test_observed_rho_matches_direct_fit():
    outcome = permutation_test(*SMALL, B=5, seed=0)
    model = fit_cca(SMALL_G_TRAIN, SMALL_E_TRAIN)
    assert outcome.rho_observed == project_and_correlate(model, SMALL_G_TEST, SMALL_E_TEST).r


def test_exact_p_of_small_fixture():
    p, _ = exhaustive_permutation_p(*SMALL, 1e-8, fit_cca, project_and_correlate)
    assert p == pytest.approx(24 / 120)


def test_monte_carlo_tracks_exact_p():
    outcome = permutation_test(*SMALL, B=5000, seed=2)
    # binomial standard error at p = 0.2, B = 5000 is about 0.006
    assert outcome.p_raw == pytest.approx(0.2, abs=0.03)


def test_deterministic_across_workers():
    codes, E = null_views(np.random.default_rng(3), 120, 6)
    views = _split_views(codes, E, 90)
    one = permutation_test(*views, B=300, seed=17, workers=1)
    many = permutation_test(*views, B=300, seed=17, workers=4)
    again = permutation_test(*views, B=300, seed=17, workers=1)
    assert one == many == again
    assert permutation_test(*views, B=300, seed=18) != one


def test_replicate_streams_are_independent_of_order():
    first = [replicate_stream(5, b).permutation(10) for b in (1, 2, 3)]
    second = [replicate_stream(5, b).permutation(10) for b in (3, 2, 1)][::-1]
    for x, y in zip(first, second):
        np.testing.assert_array_equal(x, y)
    assert not np.array_equal(first[0], first[1])


def test_unpermuted_degenerate_input_propagates():
    with pytest.raises(DegenerateInput):
        permutation_test(SMALL_G_TRAIN, SMALL_E_TRAIN, one_hot([1, 1, 1, 1]), np.ones((2, 4)), B=3)


@given(st.integers(0, 1000), st.integers(0, 1000))
def test_p_value_bounds(exceed, extra):
    B = exceed + extra
    p = permutation_p_value(exceed, B)
    assert 1 / (B + 1) <= p <= 1
    assert p > 0


def test_bonferroni_values():
    assert bonferroni(0.0005, 90) == pytest.approx(0.045, rel=1e-12)
    assert bonferroni(0.02, 90) == 1.0
    assert bonferroni(0.0001, 90) == pytest.approx(0.009, rel=1e-12)
    assert bonferroni(0.3, 1) == 0.3


@pytest.mark.parametrize("p, m", [(0.0, 3), (1.5, 3), (0.1, 0)])
def test_bonferroni_domain(p, m):
    with pytest.raises(ValueError):
        bonferroni(p, m)


unit = st.floats(1e-9, 1.0)


@given(unit, unit, st.integers(1, 500), st.integers(1, 500))
def test_bonferroni_monotone(p1, p2, m1, m2):
    lo, hi = sorted((p1, p2))
    assert bonferroni(lo, m1) <= bonferroni(hi, m1)
    assert bonferroni(lo, min(m1, m2)) <= bonferroni(lo, max(m1, m2))
    assert bonferroni(lo, 1) == lo
