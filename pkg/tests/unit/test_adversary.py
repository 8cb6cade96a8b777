import itertools

import numpy as np
import pytest

from app.core.adversary.continuous import ContAdversary, certified_hardness
from app.core.adversary.extension import (
    binary_fibers,
    closest_fiber,
    fiber_slope,
    psi_eval,
    psi_function,
)
from app.core.adversary.families import axis_positions, disjoint_solutions, ny_hard_family
from app.core.adversary.game import (
    BisectionStrategy,
    audit_continuous,
    audit_psi,
    make_strategy,
    measure_hardness,
    play_mi_game,
    psi_instance,
    run_game,
    starved_pair,
    transfer_bound,
)
from app.core.adversary.mixed import MIAdversary, hereditary_transform
from app.core.adversary.surviving import SurvivingSet, check_unambiguous
from app.core.exceptions import (
    ConstructionError,
    QueryFormatError,
    StructuralError,
    UnsupportedQueryClass,
)
from app.core.instances import ChartOutput, brute_force_opt
from app.core.oracles import BitForm, FullForm, Query, Target, ThresholdForm, respond, response_key

EPS = 0.04


def psi_unambiguous(adversary: MIAdversary) -> bool:
    """Whether every ψ_F built from the current fiber choices shares an eps-solution."""
    choices = adversary.fiber_choices()
    fibers = sorted(choices)
    instances = [
        psi_instance(dict(zip(fibers, combo)), adversary.n, adversary.M, adversary.R, adversary.opt, adversary.d)
        for combo in itertools.product(*(choices[x_bar] for x_bar in fibers))
    ]
    return check_unambiguous(instances, EPS) is not None


@pytest.fixture(scope="module")
def family():
    return ny_hard_family(d=1, M=1.0, R=1.0, eps=EPS, k=8)


@pytest.mark.unit
class TestHardFamily:
    def test_members_share_optimum_and_have_disjoint_solutions(self, family):
        # Assert
        assert len(family) == 8
        for inst in family:
            assert brute_force_opt(inst).value == pytest.approx(0.0, abs=1e-9)
        for f, g in itertools.combinations(family, 2):
            assert disjoint_solutions(f.objective, g.objective, EPS, 1.0)

    def test_centers_stay_in_half_box(self):
        assert all(abs(p) <= 0.5 for p in axis_positions(1.0, 1.0, EPS))

    def test_too_many_members(self):
        with pytest.raises(ConstructionError):
            ny_hard_family(d=1, M=1.0, R=1.0, eps=EPS, k=9)

    def test_certified_hardness(self):
        assert [certified_hardness(k) for k in (1, 2, 8, 9, 16)] == [0, 1, 3, 3, 4]


@pytest.mark.unit
class TestSurvivingSet:
    def test_keep_drops_inconsistent_members(self, family):
        # Arrange
        surviving = SurvivingSet(family)
        query = Query([0.0], Target.SUB, ThresholdForm([1.0], 0.0))

        # Act: sign of the subgradient at 0 is +1 exactly for centers below 0
        surviving.keep(query, 1)

        # Assert
        assert len(surviving) == 4
        assert all(inst.objective.subgradient([0.0])[0] > 0 for inst in surviving.instances)

    def test_single_member_is_unambiguous(self, family):
        assert check_unambiguous(family[:1], EPS) is not None
        assert check_unambiguous(family[:2], EPS) is None

    def test_closure_member_is_a_maximum(self, family):
        surviving = SurvivingSet(family)
        h = surviving.closure_member(0, 1)
        y = np.array([0.3])
        assert h.objective(y) == max(family[0].objective(y), family[1].objective(y))


@pytest.mark.unit
class TestContAdversary:
    def test_never_committing_adversary_survives_log_k_rounds(self, family):
        # Arrange
        adversary = ContAdversary(family, EPS, ell=None)

        # Act
        result = run_game(BisectionStrategy(0, 1, 1.0), adversary, EPS, max_rounds=50)

        # Assert
        assert result.reached_unambiguous
        assert result.stop_round >= certified_hardness(len(family))
        assert audit_continuous(adversary)

    def test_commits_at_horizon(self, family):
        # Arrange
        adversary = ContAdversary(family, EPS, ell=2)
        strategy = BisectionStrategy(0, 1, 1.0)

        # Act
        for _ in range(2):
            query = strategy.next_query()
            strategy.observe(query, adversary.respond(query))

        # Assert
        assert adversary.committed is not None
        assert adversary.committed_at == 2
        assert brute_force_opt(adversary.committed).value > EPS
        assert audit_continuous(adversary)

    def test_repeated_query_is_answered_from_cache(self, family):
        adversary = ContAdversary(family, EPS)
        query = Query([0.1], Target.VAL, FullForm())
        first = adversary.respond(query)
        second = adversary.respond(Query([0.1], Target.VAL, FullForm()))
        assert response_key(first) == response_key(second)
        assert adversary.round == 1

    def test_rejects_mixed_instances(self, family):
        inst = psi_instance({(0,): family[0].objective, (1,): family[1].objective}, 1, 1.0, 1.0, 0.0, 1)
        with pytest.raises(StructuralError):
            ContAdversary([inst], EPS)


@pytest.mark.unit
class TestExtension:
    def test_closest_fiber_ties_go_to_zero(self):
        assert closest_fiber([0.5, 0.51, 0.0, 1.0]) == (0, 1, 0, 1)

    def test_fiber_slope_points_away_from_fiber(self):
        np.testing.assert_allclose(fiber_slope((0, 1), M=1.0, R=2.0), [-6.0, 6.0])

    def test_psi_eval_matches_max_affine_form(self, family):
        # Arrange
        n = 2
        F = {x_bar: family[i].objective for i, x_bar in enumerate(binary_fibers(n))}
        psi = psi_function(F, n, 1.0, 1.0, 0.0)
        rng = np.random.default_rng(0)

        for _ in range(200):
            z = np.concatenate((rng.uniform(0.0, 1.0, size=n), rng.uniform(-1.0, 1.0, size=1)))

            # Act
            value = psi_eval(F, z, n, 1.0, 1.0, 0.0)

            # Assert
            assert value.value == pytest.approx(psi(z), abs=1e-9)
            assert value.value >= 0.0


@pytest.mark.unit
class TestHereditaryTransform:
    def test_value_threshold_shift(self):
        # Arrange
        delta, slope = -0.3, np.array([3.0])
        transform = hereditary_transform(ThresholdForm([1.0], 0.2), Target.VAL, delta, slope)

        for v in np.linspace(-1.0, 1.0, 20):
            inner = ChartOutput(separation=np.zeros(1), value=v, subgradient=np.zeros(1))
            outer = ChartOutput(separation=np.zeros(2), value=v + delta, subgradient=np.zeros(2))

            # Act & Assert
            assert respond(transform.inner_form, Target.VAL, inner) == respond(ThresholdForm([1.0], 0.2), Target.VAL, outer)

    def test_integer_subgradient_bits_are_constant(self):
        transform = hereditary_transform(BitForm(0, 1), Target.SUB, 0.0, np.array([3.0]))
        assert not transform.needs_inner_query
        assert transform.constant == 1

    def test_unsupported_forms(self):
        with pytest.raises(UnsupportedQueryClass):
            hereditary_transform(BitForm(0, 0), Target.VAL, 0.0, np.array([3.0]))
        with pytest.raises(UnsupportedQueryClass):
            hereditary_transform(FullForm(), Target.SEP, 0.0, np.array([3.0]))


@pytest.mark.unit
class TestMIAdversary:
    def test_separation_answered_from_domain(self, family):
        adversary = MIAdversary(family, 1, EPS, ell=3)
        info = adversary.respond(Query([0.5, 0.0], Target.SEP, FullForm()))
        assert info.is_feasible_marker
        assert adversary.inner_queries == [0]

    def test_point_outside_domain(self, family):
        adversary = MIAdversary(family, 1, EPS, ell=3)
        with pytest.raises(QueryFormatError):
            adversary.respond(Query([1.5, 0.0], Target.VAL, FullForm()))

    def test_at_most_two_inner_queries_per_round(self, family):
        # Arrange
        adversary = MIAdversary(family, 2, EPS, ell=3)
        strategy = make_strategy("random", 2, 1, 1.0, seed=1)

        # Act
        for _ in range(20):
            query = strategy.next_query()
            strategy.observe(query, adversary.respond(query))

        # Assert
        assert max(adversary.inner_queries) <= 2
        assert audit_psi(adversary, samples=10, seed=0)

    def test_one_pinned_fiber_makes_the_transcript_unambiguous(self, family):
        # Arrange: full subgradients on fiber 0 only, never committing
        adversary = MIAdversary(family, 1, EPS, ell=None)
        fiber = adversary.per_fiber[(0,)]
        assert not adversary.is_unambiguous()

        while len(fiber.surviving) > 1:
            centers = sorted(brute_force_opt(inst).point.y[0] for inst in fiber.surviving.instances)
            middle = len(centers) // 2

            # Act
            adversary.respond(Query([0.0, 0.5 * (centers[middle - 1] + centers[middle])], Target.SUB, FullForm()))

            # Assert
            assert adversary.is_unambiguous() == psi_unambiguous(adversary)

        assert len(adversary.per_fiber[(1,)].surviving) == len(family)
        assert adversary.is_unambiguous()
        assert tuple(adversary.common_solution().x) == (0,)

    def test_stop_rule_matches_every_psi_collection(self, family):
        # Arrange
        adversary = MIAdversary(family, 1, EPS, ell=3)
        strategy = make_strategy("bisect", 1, 1, 1.0)

        for _ in range(6):
            # Act
            query = strategy.next_query()
            strategy.observe(query, adversary.respond(query))

            # Assert
            assert adversary.is_unambiguous() == psi_unambiguous(adversary)


@pytest.mark.unit
class TestGame:
    def test_transfer_bound(self):
        assert transfer_bound(0, 3) == 3
        assert transfer_bound(1, 3) == 3
        assert transfer_bound(3, 3) == 12

    def test_unknown_strategy(self):
        with pytest.raises(StructuralError):
            make_strategy("oracle", 1, 1, 1.0)

    def test_measured_hardness_is_at_least_certified(self, family):
        assert measure_hardness(family, EPS, seeds=(0, 1)) >= certified_hardness(len(family))

    @pytest.mark.parametrize("name", ["bisect", "random", "centerpoint"])
    def test_one_integer_coordinate(self, family, name):
        # Act
        report = play_mi_game(family, 1, EPS, make_strategy(name, 1, 1, 1.0, seed=0), 200, audit_samples=20)

        # Assert
        assert report.bound == report.ell == 3
        assert report.bound_met
        assert report.consistent
        assert len(report.transcript) == report.stop_round

    @pytest.mark.slow
    def test_two_integer_coordinates(self, family):
        report = play_mi_game(family, 2, EPS, make_strategy("bisect", 2, 1, 1.0), 200, audit_samples=20)
        assert report.bound == 6
        assert report.bound_met
        assert report.consistent

    def test_explicit_horizon_overrides(self, family):
        report = play_mi_game(family, 1, EPS, make_strategy("bisect", 1, 1, 1.0), 50, ell=2, audit_samples=5)
        assert report.ell == 2 and report.certified_ell == 3


@pytest.mark.unit
class TestStarvedPair:
    def test_fresh_adversary_has_two_incompatible_collections(self, family):
        # Arrange
        adversary = MIAdversary(family, 1, EPS, ell=3)

        # Act
        pair = starved_pair(adversary)

        # Assert
        assert pair is not None
        first, second = (psi_instance(F, 1, 1.0, 1.0, 0.0, 1) for F in pair)
        assert check_unambiguous([first, second], EPS) is None
