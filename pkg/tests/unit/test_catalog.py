from pathlib import Path

import pytest
from pydantic import ValidationError

from app.core.catalog import (
    SUITE_MAX_RHO,
    SUITE_MIN_RHO,
    SUITE_RADIUS,
    bundled_suite,
    dump_instance,
    instance_to_file,
    load_family,
    load_instance,
)
from app.core.exceptions import StructuralError
from app.core.instances import audit_class, brute_force_opt

DATA = Path(__file__).resolve().parents[2] / "data"


@pytest.mark.unit
class TestInstanceFiles:
    @pytest.mark.parametrize("name", ["abs-1d", "pyramid-2d", "mixed-n1-d1", "mixed-n2-d1"])
    def test_bundled_files_are_class_members(self, name):
        # Act
        inst = load_instance(DATA / "instances" / f"{name}.json")

        # Assert
        assert inst.label == name
        assert audit_class(inst).ok

    def test_known_optima(self):
        assert brute_force_opt(load_instance(DATA / "instances" / "abs-1d.json")).value == pytest.approx(0.0, abs=1e-9)
        pyramid = brute_force_opt(load_instance(DATA / "instances" / "pyramid-2d.json"))
        assert pyramid.value == pytest.approx(0.0, abs=1e-9)
        assert list(pyramid.point.y) == pytest.approx([0.0, 0.0], abs=1e-9)

    def test_dump_then_load_preserves_rows(self, tmp_path):
        # Arrange
        inst = load_instance(DATA / "instances" / "mixed-n2-d1.json")

        # Act
        dump_instance(inst, tmp_path / "copy.json")
        again = load_instance(tmp_path / "copy.json")

        # Assert
        assert instance_to_file(again) == instance_to_file(inst)

    def test_wrong_row_width(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 0, "d": 1, "R": 1, "rho": 0.1, "M": 1, "pieces": [[1, 2, 3]]}')
        with pytest.raises(ValidationError):
            load_instance(path)

    def test_lipschitz_above_M(self, tmp_path):
        path = tmp_path / "steep.json"
        path.write_text('{"n": 0, "d": 1, "R": 1, "rho": 0.1, "M": 1, "pieces": [[3, 0]]}')
        with pytest.raises(StructuralError):
            load_instance(path)


@pytest.mark.unit
class TestFamilies:
    def test_family_in_file_name_order(self):
        family = load_family(DATA / "families" / "shift-4")
        assert [inst.label for inst in family] == ["shift-0", "shift-1", "shift-2", "shift-3"]
        assert len({(inst.n, inst.d) for inst in family}) == 1

    def test_empty_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_family(tmp_path)


@pytest.mark.unit
class TestBundledSuite:
    def test_suite_is_deterministic(self):
        first = bundled_suite(n_values=(0, 1), d_values=(1, 2), per_cell=1, seed=4)
        second = bundled_suite(n_values=(0, 1), d_values=(1, 2), per_cell=1, seed=4)
        assert [instance_to_file(i) for i in first] == [instance_to_file(i) for i in second]

    def test_suite_members_pass_the_audit(self):
        # Act
        suite = bundled_suite(n_values=(0, 1, 2), d_values=(1, 2), per_cell=1, seed=0)

        # Assert
        assert [inst.label for inst in suite][:2] == ["suite-n0-d1-0", "suite-n0-d2-0"]
        for inst in suite:
            assert inst.params.R == SUITE_RADIUS
            assert SUITE_MIN_RHO <= inst.params.rho <= SUITE_MAX_RHO
            assert audit_class(inst).ok
