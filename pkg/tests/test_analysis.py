import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mimgan.analysis import (
    BinaryPerturbation,
    Mode,
    StabilityScenario,
    large_event_proportion,
    rare_event_proportion,
    renyi_divergence,
    stability_factor,
)
from mimgan.objectives import EQUILIBRIUM, ObjectiveKind, equilibrium_objective
from mimgan.tensor import DomainError

MIM = ObjectiveKind.MIM
KL = ObjectiveKind.KL_SATURATING
KLNS = ObjectiveKind.KL_NONSATURATING
PERFECT, WORST = StabilityScenario.PERFECT_D, StabilityScenario.WORST_D


def brute_upsilon(kind, p, q):
    """Direct ratio of the rare atom's term to the whole optimal-discriminator value."""
    P, Q = np.array([p, 1 - p]), np.array([q, 1 - q])
    if kind is MIM:
        terms = np.sqrt(P * Q)
    else:
        # saturating KL game value with D* plugged in; every term is negative
        terms = P * np.log(P / (P + Q)) + Q * np.log(Q / (P + Q))
    return terms[0] / terms.sum()


class TestRenyi:
    def test_identical(self):
        assert renyi_divergence([0.3, 0.7], [0.3, 0.7], 0.5) == 0.0

    def test_half_value(self):
        assert renyi_divergence([0.5, 0.5], [0.25, 0.75], 0.5) == pytest.approx(
            -2 * math.log(0.965926), abs=1e-5)

    def test_bad_alpha(self):
        with pytest.raises(ValueError):
            renyi_divergence([1.0], [1.0], 1.0)
        with pytest.raises(ValueError):
            renyi_divergence([1.0], [1.0], 0.0)

    def test_absolute_continuity(self):
        with pytest.raises(DomainError):
            renyi_divergence([0.5, 0.5], [1.0, 0.0], 2.0)

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    def test_half_is_symmetric_and_matches_equilibrium(self, p, q):
        P, Q = [p, 1 - p], [q, 1 - q]
        r = renyi_divergence(P, Q, 0.5)
        assert r == pytest.approx(renyi_divergence(Q, P, 0.5), abs=1e-12)
        assert equilibrium_objective(MIM, P, Q) == pytest.approx(
            EQUILIBRIUM * math.exp(-0.5 * r), abs=1e-9)

    def test_co_monotone_family(self):
        # moving q toward p raises the game value and lowers the divergence sum
        P = [0.3, 0.7]
        qs = np.linspace(0.31, 0.9, 30)
        value = [equilibrium_objective(MIM, P, [q, 1 - q]) for q in qs]
        div = [renyi_divergence(P, [q, 1 - q], 0.5) + renyi_divergence([q, 1 - q], P, 0.5)
               for q in qs]
        assert np.all(np.diff(value) < 0)
        assert np.all(np.diff(div) > 0)


class TestRareEventProportion:
    @pytest.mark.parametrize("kind", [MIM, KL])
    @pytest.mark.parametrize("mode", [Mode.EXACT, Mode.APPROX])
    def test_zero_disturbance_gives_p(self, kind, mode):
        bp = BinaryPerturbation(0.03, 0.0, 1.5)
        assert rare_event_proportion(kind, mode, bp) == 0.03

    def test_hand_values(self):
        bp = BinaryPerturbation(0.01, 0.1, 1.0)
        assert rare_event_proportion(MIM, Mode.APPROX, bp) == pytest.approx(0.0104876, abs=1e-6)
        assert rare_event_proportion(KL, Mode.APPROX, bp) == pytest.approx(0.0104822, abs=1e-6)

    @given(st.floats(1e-3, 0.3), st.floats(-0.2, 0.2), st.sampled_from([1.0, 1.5, 2.0]))
    def test_exact_matches_brute_force(self, p, eps, gamma):
        bp = BinaryPerturbation(p, eps, gamma)
        for kind in (MIM, KL):
            assert rare_event_proportion(kind, Mode.EXACT, bp) == pytest.approx(
                brute_upsilon(kind, p, bp.q), rel=1e-9)

    def test_nonsaturating_maps_to_kl(self):
        bp = BinaryPerturbation(0.01, 0.1)
        assert rare_event_proportion(KLNS, Mode.EXACT, bp) == rare_event_proportion(KL, Mode.EXACT, bp)

    def test_validation(self):
        with pytest.raises(ValueError):
            BinaryPerturbation(0.5, 0.1)
        with pytest.raises(ValueError):
            BinaryPerturbation(0.01, 0.1, gamma=0.5)
        with pytest.raises(ValueError):
            BinaryPerturbation(0.4, 0.5, 1.0)  # q = 0.6
        with pytest.raises(ValueError):
            rare_event_proportion(ObjectiveKind.LS, Mode.EXACT, BinaryPerturbation(0.1, 0.1))

    @given(st.floats(1e-4, 0.05), st.floats(-0.2, 0.2).filter(lambda e: abs(e) > 1e-6),
           st.sampled_from([1.0, 1.5, 2.0]))
    def test_mim_keeps_more_rare_mass(self, p, eps, gamma):
        bp = BinaryPerturbation(p, eps, gamma)
        for mode in Mode:
            kl = rare_event_proportion(KL, mode, bp)
            # the gap scales like eps**2 * p**(2 gamma - 1) and can fall below one ulp
            assert rare_event_proportion(MIM, mode, bp) >= kl - 4 * np.spacing(kl)


class TestStability:
    def test_values(self):
        assert stability_factor(MIM, PERFECT, 0.0) == 1.0
        assert stability_factor(MIM, PERFECT, 0.1) == pytest.approx(1.10517, abs=1e-5)
        assert stability_factor(KL, PERFECT, 0.1) == pytest.approx(1.11111, abs=1e-5)
        assert stability_factor(KLNS, PERFECT, 0.1) == pytest.approx(10.0)
        assert stability_factor(MIM, WORST, 0.1) == pytest.approx(1.82212, abs=1e-5)
        assert stability_factor(KL, WORST, 0.1) == pytest.approx(2.5)

    def test_ranges(self):
        with pytest.raises(DomainError):
            stability_factor(MIM, PERFECT, -0.1)
        with pytest.raises(DomainError):
            stability_factor(MIM, WORST, 0.5)
        with pytest.raises(ZeroDivisionError):
            stability_factor(KL, PERFECT, 1.0)

    @given(st.floats(0.0, 0.99))
    def test_perfect_ordering_and_symmetry(self, eps):
        assert stability_factor(MIM, PERFECT, eps) <= stability_factor(KL, PERFECT, eps)
        if eps > 0.01:
            assert stability_factor(KL, PERFECT, 1 - eps) == pytest.approx(
                stability_factor(KLNS, PERFECT, eps), rel=1e-12)

    @given(st.floats(-0.49, 0.49))
    def test_worst_ordering(self, eps):
        assert stability_factor(MIM, WORST, eps) <= stability_factor(KL, WORST, eps)


class TestLargeEvent:
    def test_full_and_empty(self):
        P, Q = [0.2, 0.3, 0.5], [0.4, 0.4, 0.2]
        assert large_event_proportion(P, Q, [0, 1, 2]) == pytest.approx(1.0)
        assert large_event_proportion(P, Q, []) == 0.0

    def test_identical(self):
        assert large_event_proportion([0.9, 0.1], [0.9, 0.1], [0]) == pytest.approx(0.9)

    def test_bad_index(self):
        with pytest.raises(IndexError):
            large_event_proportion([0.5, 0.5], [0.5, 0.5], [2])
