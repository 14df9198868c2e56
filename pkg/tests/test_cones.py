import pytest

from cones import (ConeError, cone_consistency, cone_page, e1_dominates, e1_page, skein_split,
                   torus_step_page, twist_pipeline, twist_region_e1)
from diagrams import BraidWord, braid_from_text, full_twist, link_metadata
from khovanov import Bigrading, KhTable, kh_reduced

TREFOIL_BRAID = "2: 1 1 1"


def test_skein_split_of_trefoil(trefoil):
    oriented, unoriented, c = skein_split(trefoil, 2)
    assert c == 2
    assert link_metadata(oriented).component_count == 2
    assert link_metadata(unoriented).component_count == 1


def test_negative_crossing_is_rejected(figure_eight):
    with pytest.raises(ConeError):
        skein_split(figure_eight, 1)


@pytest.mark.parametrize("crossing", [-1, 3, 10])
def test_out_of_range_crossing(trefoil, crossing):
    with pytest.raises(ConeError):
        cone_page(trefoil, crossing)


def test_trefoil_cone_is_exact(trefoil):
    page = cone_page(trefoil, 0)
    assert page.constants == (2,)
    assert [summand.shift for summand in page.summands] == [Bigrading(-1, 1), Bigrading(-2, 8)]
    assert page.total_table() == kh_reduced(trefoil)
    report = cone_consistency(trefoil, 0)
    assert report.passed
    assert report.defect == 0


def test_kink_cone_has_defect_two(diagram):
    report = cone_consistency(diagram('kink'), 0)
    assert report.passed
    assert report.defect == 2


@pytest.mark.parametrize("name,crossing", [('hopf', 0), ('t33', 3), ('t34', 0)])
def test_cone_consistency(diagram, name, crossing):
    report = cone_consistency(diagram(name), crossing)
    assert report.passed, report.violations
    assert report.defect % 2 == 0


def test_domination_failure_is_reported(trefoil):
    page = cone_page(trefoil, 0)
    exact = KhTable.from_ranks({(-2, 2): 2}, 1)
    report = e1_dominates(page, exact)
    assert not report.passed
    assert report.domination
    assert report.to_json()['dominates'] is False


def test_single_crossing_page_matches_cone(trefoil):
    page = e1_page(braid_from_text(TREFOIL_BRAID), [1])
    cone = cone_page(trefoil, 1)
    assert page.shifted_multiset() == cone.shifted_multiset()
    assert [s.label for s in page.summands] == ['beta_1', 'R_1']


def test_e1_page_rejects_bad_requests():
    with pytest.raises(ConeError):
        e1_page(braid_from_text("3: 1 -2 1 -2"), [0])
    with pytest.raises(ConeError):
        e1_page(braid_from_text(TREFOIL_BRAID), [0, 0])
    with pytest.raises(ConeError):
        e1_page(braid_from_text(TREFOIL_BRAID), [])
    with pytest.raises(ConeError):
        e1_page(braid_from_text(TREFOIL_BRAID), [5])


def test_two_crossing_page_dominates(t34):
    page = e1_page(braid_from_text("3: 2 1 2 1 2 1 2 1"), [0, 2])
    assert len(page.summands) == 3
    report = e1_dominates(page, kh_reduced(t34))
    assert report.passed, report.violations


def test_page_json_keeps_unshifted_entries(trefoil):
    data = cone_page(trefoil, 0).to_json()
    assert data['constants'] == [2]
    assert data['summands'][1]['shift2'] == [-2, 8]
    assert data['summands'][1]['entries'] == [{'delta2': 0, 'q2': 0, 'rank': 1}]


def test_torus_step_divisible():
    step = torus_step_page(3)
    assert step.page.constants == (3, 3)
    assert step.report.passed
    assert step.report.defect == 0


def test_torus_step_knot_has_positive_defect():
    step = torus_step_page(4)
    assert step.page.constants == (4, 4)
    assert step.report.passed
    assert step.report.defect >= 2


def test_torus_step_last_residue():
    step = torus_step_page(5)
    assert step.page.constants == (6, 5)
    assert step.report.passed


def test_torus_step_needs_two_letters():
    with pytest.raises(ConeError):
        torus_step_page(1)


def test_twist_region_constant_for_full_twist():
    page = twist_region_e1(BraidWord.identity(3), 2, 2, full_twist(3))
    assert page.constants == (4,)
    assert len(page.summands) == 3


def test_twist_region_of_length_one_is_a_cone(trefoil):
    page = twist_region_e1(BraidWord.identity(2), 1, 1, braid_from_text("2: 1 1"))
    assert page.shifted_multiset() == cone_page(trefoil, 0).shifted_multiset()


def test_twist_region_rejects_negative_words():
    with pytest.raises(ConeError):
        twist_region_e1(braid_from_text("3: -1"), 2, 2, full_twist(3))
    with pytest.raises(ConeError):
        twist_region_e1(BraidWord.identity(3), 2, 0, full_twist(3))


@pytest.mark.slow
@pytest.mark.parametrize("t", [1, 2])
def test_twist_pipeline_constants(t):
    steps = twist_pipeline(t)
    assert [step.page.constants[0] for step in steps] == [4 * t, 4 * t, 4 * t + 2]
    for step in steps:
        assert step.report.passed, (step.label, step.report.violations)
