from fractions import Fraction

import pytest

from config import Config
from diagrams import coloring_determinant, link_metadata
from khovanov import ResourceLimitError, determinant, kh_reduced, width
from twistlab import (TwistKnotSpec, beta, branch_set_table, continued_fraction, ell,
                      evaluate_continued_fraction, extra_column_check, finite_filling_report,
                      rational_width_samples, require_engine, stability_check, tau, tau_rational,
                      width_profile)
from validators import ValidationError


@pytest.fixture
def basic_engine(monkeypatch):
    monkeypatch.setattr(Config, 'ENABLE_EXTENDED', False)


def test_minimal_framing():
    assert [ell(t) for t in range(4)] == [-5, -1, -5, -1]


def test_beta_words():
    assert beta(0, -5).to_text() == "3: 1 2 1 1 1 2"
    assert len(beta(1, -1)) == 12
    assert beta(0, -8).letters[:2] == ((1, -1), (1, -1))
    with pytest.raises(ValidationError):
        beta(-1, 0)


@pytest.mark.parametrize("t,n", [(0, -5), (0, -8), (1, -1), (1, 3), (2, -5)])
def test_spec_letter_count_matches_word(t, n):
    spec = TwistKnotSpec(t, n)
    assert spec.letter_count == len(spec.braid)
    assert spec.ell == ell(t)


def test_parity_of_framing_decides_component_count():
    for n in range(-6, 3):
        spec = TwistKnotSpec(0, n)
        expected = 1 if n % 2 else 2
        assert spec.component_count == expected
        assert link_metadata(spec.diagram()).component_count == expected


def test_positivity():
    assert TwistKnotSpec(0, -5).is_positive
    assert not TwistKnotSpec(0, -7).is_positive
    assert TwistKnotSpec(1, -1).is_positive


@pytest.mark.parametrize("p,q,terms", [(13, 10, [1, 3, 3]), (7, 2, [3, 2]), (5, 1, [5]), (-7, 2, [-4, 2])])
def test_continued_fraction(p, q, terms):
    assert continued_fraction(p, q) == terms
    assert evaluate_continued_fraction(terms) == Fraction(p, q)


def test_continued_fraction_needs_nonzero_q():
    with pytest.raises(ValidationError):
        continued_fraction(1, 0)
    with pytest.raises(ValidationError):
        evaluate_continued_fraction([])


@pytest.mark.parametrize("n", range(-5, 4))
def test_determinant_is_framing(n):
    assert coloring_determinant(tau(0, n)) == abs(n)


@pytest.mark.parametrize("t", [0, 1, pytest.param(2, marks=pytest.mark.slow)])
def test_khovanov_determinant_is_framing(t):
    for n in range(-5, 4):
        assert determinant(kh_reduced(tau(t, n))) == abs(n), n


def test_determinant_at_zero_framing():
    assert coloring_determinant(tau(0, 0)) == 0
    assert coloring_determinant(tau(1, 0)) == 0


def test_continued_fraction_needs_lowest_terms():
    with pytest.raises(ValidationError):
        continued_fraction(4, 2)
    with pytest.raises(ValidationError):
        continued_fraction(-6, 4)


def test_rational_slope_needs_lowest_terms():
    with pytest.raises(ValidationError):
        tau_rational(0, 4, 2)
    with pytest.raises(ValidationError):
        tau_rational(1, 2, 0)
    assert tau_rational(1, -1, 0).crossing_count == 0


def test_rational_trivial_filling():
    d = tau_rational(1, 1, 0)
    assert d.crossing_count == 0
    assert coloring_determinant(d) == 1


def test_rational_integer_slope_matches_braid_closure():
    assert kh_reduced(tau_rational(0, 3, 1)) == kh_reduced(tau(0, 3))


@pytest.mark.parametrize("p,q", [(3, 1), (7, 2), (5, 3)])
def test_rational_determinant(p, q):
    assert coloring_determinant(tau_rational(0, p, q)) == abs(p)


def test_width_profile_even_t():
    profile = width_profile(0, -5, -4)
    assert profile.entries == {-5: 1, -4: 2}
    assert profile.jump_framing == -5
    assert profile.w_K == 1
    assert profile.two_valued
    assert profile.to_json()['widths'] == {'-5': 1, '-4': 2}


def test_width_profile_odd_t():
    profile = width_profile(1, -1, 0)
    assert profile.entries == {-1: 2, 0: 3}
    assert profile.jump_framing == -1
    assert profile.w_K == 2


def test_width_profile_range_must_cover_minimum():
    with pytest.raises(ValidationError):
        width_profile(0, -3, 0)


def test_large_t_needs_extended_engine(basic_engine):
    with pytest.raises(ResourceLimitError):
        width_profile(3, -1, 0)
    with pytest.raises(ResourceLimitError):
        require_engine(4)
    require_engine(2)


def test_verdict_even_base_case():
    verdict = finite_filling_report(0)
    assert verdict.verdict == "inconclusive"
    assert verdict.w_K == 1


def test_verdict_first_odd_case():
    verdict = finite_filling_report(1)
    assert verdict.verdict == "no finite fillings"
    assert verdict.jump_framing == -1
    assert any('amphichirality' in caveat for caveat in verdict.caveats)
    assert verdict.to_json()['w_K'] == 2


@pytest.mark.slow
def test_verdict_two_full_twists():
    verdict = finite_filling_report(2)
    assert verdict.w_K == 3
    assert verdict.verdict == "no finite fillings"


@pytest.mark.slow
@pytest.mark.extended
def test_verdict_three_full_twists():
    verdict = finite_filling_report(3)
    assert verdict.w_K == 4
    assert verdict.verdict == "no finite fillings"


@pytest.mark.parametrize("t", [0, 1, pytest.param(2, marks=pytest.mark.slow)])
def test_extra_column(t):
    report = extra_column_check(t)
    assert report.passed, report.problems
    assert 'extra' in report.details


@pytest.mark.parametrize("t", [0, 1, pytest.param(2, marks=pytest.mark.slow)])
def test_stability_window(t):
    report = stability_check(t, m_max=5)
    assert report.passed, report.problems
    assert set(report.details) == {'1', '2', '3', '4', '5'}
    assert all(entry['width'] == t + 2 for entry in report.details.values())


def test_rational_samples():
    report = rational_width_samples(0, [(7, 2), (13, 10)])
    assert report.passed, report.problems
    assert set(report.details) == {'7/2', '13/10'}


@pytest.mark.parametrize("t", [0, 1])
def test_branch_set_determinant(t):
    table = branch_set_table(t, ell(t))
    assert coloring_determinant(tau(t, ell(t))) == abs(ell(t))
    assert width(table) == t + 1
