import json
import math

import numpy as np
import pytest

from app.core.constants import MAX_BIT_INDEX, MIN_BIT_INDEX, SIGN_BIT_INDEX
from app.core.exceptions import QueryFormatError
from app.core.instances import InfoKind, Instance, InstanceParams, MaxAffineFunction, Polytope
from app.core.oracles import (
    BinaryForm,
    BitForm,
    FullForm,
    Oracle,
    Query,
    QueryCounter,
    QueryKind,
    Target,
    ThresholdForm,
    Transcript,
    answer,
    budget_report,
    fixed_point_bit,
    sgn,
)


@pytest.fixture
def plane() -> Instance:
    # f(y) = max(y1 + 2 y2, -y1) on [-1, 1]^2 ∩ {y1 <= 0.5}
    f = MaxAffineFunction.from_pieces([[1.0, 2.0, 0.0], [-1.0, 0.0, 0.0]])
    C = Polytope.from_halfspaces(2, 1.0, [([1.0, 0.0], 0.5)])
    return Instance(f, C, InstanceParams(n=0, d=2, R=1.0, rho=0.1, M=3.0), "plane")


@pytest.mark.unit
class TestEncoding:
    def test_sign_of_zero_is_positive(self):
        assert sgn(0.0) == 1
        assert sgn(-1e-300) == -1

    def test_fixed_point_bits(self):
        # 2.75 = 10.11 in binary
        assert [fixed_point_bit(2.75, i) for i in (1, 0, -1, -2, -3)] == [1, 0, 1, 1, 0]
        assert fixed_point_bit(-2.75, 1) == 1

    def test_sign_bit(self):
        assert fixed_point_bit(-0.5, 64) == 1
        assert fixed_point_bit(0.5, 64) == 0
        assert fixed_point_bit(0.0, 64) == 0

    @pytest.mark.parametrize("scale", [1e-3, 1.0, 1e3])
    def test_bits_reassemble_within_two_to_minus_63(self, scale):
        # Arrange
        rng = np.random.default_rng(7)
        values = rng.uniform(-scale, scale, size=500)

        for v in values:
            # Act
            magnitude = math.fsum(
                math.ldexp(1.0, index) for index in range(MAX_BIT_INDEX - 1, MIN_BIT_INDEX - 1, -1) if fixed_point_bit(v, index)
            )
            rebuilt = -magnitude if fixed_point_bit(v, SIGN_BIT_INDEX) else magnitude

            # Assert
            assert abs(rebuilt - v) <= 2.0**-63


@pytest.mark.unit
class TestAnswer:
    def test_full_value_and_subgradient(self, plane):
        # Arrange
        counter = QueryCounter()

        # Act
        value = answer(plane, Query([0.2, 0.1], Target.VAL, FullForm()), counter)
        sub = answer(plane, Query([0.2, 0.1], Target.SUB, FullForm()), counter)

        # Assert
        assert value.kind is InfoKind.VALUE and value.value == pytest.approx(0.4)
        np.testing.assert_array_equal(sub.vector, [1.0, 2.0])
        assert counter.counts[QueryKind.FULL] == 2

    def test_separation_of_infeasible_point(self, plane):
        info = answer(plane, Query([0.8, 0.0], Target.SEP, FullForm()), QueryCounter())
        np.testing.assert_array_equal(info.vector, [1.0, 0.0])

    def test_threshold_on_value_and_vector(self, plane):
        counter = QueryCounter()
        z = [0.2, 0.1]
        assert answer(plane, Query(z, Target.VAL, ThresholdForm([1.0], 0.4)), counter) == 1
        assert answer(plane, Query(z, Target.VAL, ThresholdForm([1.0], 0.5)), counter) == -1
        assert answer(plane, Query(z, Target.SUB, ThresholdForm([0.0, -1.0], 0.0)), counter) == -1
        assert counter.counts[QueryKind.THRESHOLD] == 3

    def test_value_bit_with_shift(self, plane):
        # f = 0.4; 0.4 + 2.6 = 3.0 has bit 1 set
        q = Query([0.2, 0.1], Target.VAL, BitForm(0, 1, shift=2.6))
        assert answer(plane, q, QueryCounter()) == 1

    def test_first_order_target(self, plane):
        # Act
        feasible = answer(plane, Query([0.0, 0.0], Target.FIRST_ORDER, FullForm()), QueryCounter())
        infeasible = answer(plane, Query([0.9, 0.0], Target.FIRST_ORDER, FullForm()), QueryCounter())

        # Assert
        assert feasible.kind is InfoKind.FIRST_ORDER
        assert feasible.value == 0.0
        assert infeasible.kind is InfoKind.SEPARATION

    def test_binary_predicate(self, plane):
        oracle = Oracle(plane)
        assert oracle.is_feasible([0.0, 0.0]) is True
        assert oracle.is_feasible([0.7, 0.0]) is False
        assert oracle.counter.counts[QueryKind.BINARY] == 2


@pytest.mark.unit
class TestValidation:
    @pytest.mark.parametrize(
        "query",
        [
            Query([0.0], Target.VAL, FullForm()),
            Query([0.0, np.nan], Target.VAL, FullForm()),
            Query([0.0, 0.0], Target.SUB, BitForm(2, 0)),
            Query([0.0, 0.0], Target.SUB, BitForm(0, 65)),
            Query([0.0, 0.0], Target.SUB, BitForm(0, 0, shift=1.0)),
            Query([0.0, 0.0], Target.VAL, ThresholdForm([1.0, 1.0], 0.0)),
            Query([0.0, 0.0], Target.FIRST_ORDER, ThresholdForm([1.0, 1.0], 0.0)),
        ],
    )
    def test_malformed_query_is_not_counted(self, plane, query):
        # Arrange
        counter = QueryCounter()

        # Act & Assert
        with pytest.raises(QueryFormatError):
            answer(plane, query, counter)
        assert counter.total == 0


@pytest.mark.unit
class TestTranscript:
    def test_records_every_answer_as_json_lines(self, plane, tmp_path):
        # Arrange
        transcript = Transcript()
        oracle = Oracle(plane, transcript=transcript)

        # Act
        oracle.ask([0.2, 0.1], Target.VAL, FullForm())
        oracle.ask([0.2, 0.1], Target.SUB, ThresholdForm([1.0, 0.0], 0.0))
        oracle.ask([0.2, 0.1], Target.SEP, BinaryForm("feasible", lambda info: not np.any(info.vector)))
        transcript.write(tmp_path / "log.jsonl")

        # Assert
        lines = (tmp_path / "log.jsonl").read_text().splitlines()
        records = [json.loads(line) for line in lines]
        assert [r["cumulative_total"] for r in records] == [1, 2, 3]
        assert records[0]["response"] == {"kind": "value", "value": pytest.approx(0.4)}
        assert records[1]["response"] == 1
        assert records[2]["form"] == {"kind": "binary", "identifier": "feasible"}
        assert records[2]["response"] is True

    def test_budget_report_totals(self):
        counter = QueryCounter()
        counter.record(QueryKind.BIT)
        counter.record(QueryKind.BIT)
        counter.record(QueryKind.BINARY)
        report = budget_report(counter)
        assert (report.bit, report.binary, report.total) == (2, 1, 3)


@pytest.mark.unit
class TestThresholdAgreesWithFull:
    @pytest.mark.parametrize("target", [Target.VAL, Target.SUB, Target.SEP])
    def test_threshold_is_sign_of_full_answer(self, plane, target):
        # Arrange
        rng = np.random.default_rng(11)
        width = 1 if target is Target.VAL else 2

        for _ in range(300):
            z = rng.uniform(-1.0, 1.0, size=2)
            u = rng.normal(size=width)
            c = float(rng.uniform(-1.0, 1.0))

            # Act
            full = answer(plane, Query(z, target, FullForm()), QueryCounter())
            threshold = answer(plane, Query(z, target, ThresholdForm(u, c)), QueryCounter())

            # Assert
            observed = full.value if target is Target.VAL else float(u @ full.vector)
            scale = float(u[0]) if target is Target.VAL else 1.0
            assert threshold == sgn(scale * observed - c)
