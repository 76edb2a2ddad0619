"""End-to-end verdicts of the spectral classifier."""

import math

import pytest

from substrum.classify import classify
from substrum.coincidence import bijectivity_profile
from substrum.core import parse_substitution, power_substitution
from substrum.corpus import CORPUS, load

APERIODIC = [e.name for e in CORPUS if e.name != "periodic"]


@pytest.mark.parametrize("entry", CORPUS, ids=lambda e: e.name)
def test_corpus_verdicts(entry):
    verdict = classify(entry.substitution())
    assert verdict.verdict == entry.expected_verdict
    assert entry.expected_reason in verdict.reasons


def test_reason_detail():
    assert classify(load("thue_morse")).reasons == (
        "NoSqrtQEigenvalue",
        "SecondEigenvalueSmall",
    )
    assert classify(load("bijective_nonabelian")).reasons == ("NoSqrtQEigenvalue",)
    assert classify(load("height_two")).reasons == ("DekkingCoincidence",)


@pytest.mark.parametrize(
    "rules,tag",
    [
        ("0 -> 0 1\n1 -> 0\n", "not-constant-length"),
        ("0 -> 0 1\n1 -> 1 1\n", "not-primitive"),
        ("0 -> 0 1 0\n1 -> 1 0 1\n", "periodic"),
        ("0 -> 0 1\n1 -> 0 1\n", "pansiot-precondition"),
    ],
)
def test_precondition_failures(rules, tag):
    verdict = classify(parse_substitution(rules))
    assert verdict.verdict == "Inconclusive"
    assert verdict.reasons == (f"PreconditionFailed({tag})",)
    assert verdict.precondition_failed
    assert verdict.eigenvalue_group is None


def test_eigenvalue_groups():
    expected = {
        "thue_morse": (2, 1),
        "bijective_nonabelian": (3, 1),
        "height_two": (3, 2),
        "small_second_eigenvalue": (3, 1),
        "rudin_shapiro": (2, 1),
        "modified_rudin_shapiro": (2, 1),
    }
    for name, group in expected.items():
        assert classify(load(name)).eigenvalue_group == group


@pytest.mark.parametrize("name", APERIODIC)
def test_bijective_never_purely_discrete(name):
    z = load(name)
    if bijectivity_profile(z).bijective:
        # a bijective aperiodic substitution has no coincidence, so the
        # Dekking branch must never fire for it
        assert classify(z).verdict != "PurelyDiscrete"


@pytest.mark.parametrize("name", APERIODIC)
@pytest.mark.parametrize("j", [2, 3])
def test_verdict_invariant_under_powers(name, j):
    z = load(name)
    base = classify(z)
    powered = classify(power_substitution(z, j))
    assert powered.verdict == base.verdict


def test_evidence_complete_for_full_run():
    verdict = classify(load("rudin_shapiro"))
    ev = verdict.evidence
    assert ev["alphabet_size"] == 4
    assert ev["q"] == 2
    assert ev["primitive"] is True
    assert ev["aperiodic"] is True
    assert ev["h"] == 1
    assert ev["bijective"] is False
    assert ev["k"] == 2
    assert ev["transitive_size"] == 8
    assert ev["sqrt_q"].present is True
    assert ev["sqrt_q"].exact_witnesses


def test_inconclusive_states_sufficiency():
    # the criterion is one-directional; an Inconclusive verdict must say so
    for name in ("rudin_shapiro", "modified_rudin_shapiro"):
        verdict = classify(load(name))
        assert "sufficient" in verdict.detail
        assert "not necessary" in verdict.detail


def test_singular_detail_names_gap():
    verdict = classify(load("thue_morse"))
    assert "sqrt" in verdict.detail
    assert verdict.evidence["sqrt_q"].present is False


def test_height_two_evidence():
    verdict = classify(load("height_two"))
    assert verdict.evidence["pure_base_size"] == 6
    assert verdict.evidence["h"] == 2
    assert verdict.verdict == "PurelyDiscrete"


def test_second_eigenvalue_reason_matches_theta():
    # SecondEigenvalueSmall is claimed exactly when |theta_2| < sqrt(q)
    from substrum.eigen import eigenvalues, second_eigenvalue_below_sqrt_q
    from substrum.core import substitution_matrix, constant_length

    for name in APERIODIC:
        z = load(name)
        S = substitution_matrix(z)
        q = constant_length(z)
        below = second_eigenvalue_below_sqrt_q(S, q)
        reasons = classify(z).reasons
        if "SecondEigenvalueSmall" in reasons:
            assert below
