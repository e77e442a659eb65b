"""Tests for character tables, multiplicities and exponent bounds."""

from fractions import Fraction

import orjson
import pytest

from haupt.config import PACKAGE_DATA
from haupt.errors import (
    FileError,
    IrrationalResidue,
    Malformed,
    OrthogonalityFailure,
    PowerMapInconsistent,
)
from haupt.schemas.groups import GroupFile
from haupt.schemas.reports import Verdict
from haupt.services.moonshine import (
    QuadNum,
    build_table,
    check_exponent_group,
    check_order_bound,
    check_padic_moonshine,
    element_order_symbols,
    exponent_divisibility,
    load_assignment,
    load_group,
    max_feasible_exponent,
    multiplicity_series,
    order_bound_feasible,
    reconstruct_class_series,
    validate_assignment,
)


def cyclic_two(characters=None) -> dict:
    return {
        "name": "C2",
        "order": 2,
        "classes": [{"name": "1A", "size": 1, "order": 1}, {"name": "2A", "size": 1, "order": 2}],
        "characters": characters or [[1, 1], [1, -1]],
    }


def cyclic_three(power_map=None) -> dict:
    omega = ["-1/2", "1/2"]
    omega_bar = ["-1/2", "-1/2"]
    return {
        "name": "C3",
        "order": 3,
        "quad_d": -3,
        "classes": [
            {"name": "1A", "size": 1, "order": 1},
            {"name": "3A", "size": 1, "order": 3},
            {"name": "3B", "size": 1, "order": 3},
        ],
        "characters": [[1, 1, 1], [1, omega, omega_bar], [1, omega_bar, omega]],
        "power_map": power_map if power_map is not None else {"3A": {"2": "3B"}, "3B": {"2": "3A"}},
    }


def table_of(data: dict):
    return build_table(GroupFile.model_validate(data))


class TestQuadNum:
    def test_product_of_conjugates(self):
        assert QuadNum(Fraction(1), Fraction(1), 5) * QuadNum(Fraction(1), Fraction(-1), 5) == -4

    def test_golden_ratio(self):
        phi = QuadNum(Fraction(1, 2), Fraction(1, 2), 5)
        assert phi * phi == phi + 1

    def test_conjugation(self):
        i = QuadNum(Fraction(0), Fraction(1), -1)
        assert i.conj() == QuadNum(Fraction(0), Fraction(-1), -1)
        assert i * i.conj() == 1
        root5 = QuadNum(Fraction(0), Fraction(1), 5)
        assert root5.conj() == root5
        assert root5.galois() == -root5

    def test_rational_equality(self):
        assert QuadNum.of(3, 5) == QuadNum.of(3, -1)
        assert QuadNum.of(Fraction(1, 2)).is_rational


class TestTables:
    def test_a5(self, a5):
        assert [c.size for c in a5.classes] == [1, 15, 20, 12, 12]
        assert a5.group_order == 60
        assert a5.character_names[0] == "epsilon"

    def test_a5_power_maps(self, a5):
        five_a = a5.index("5A")
        assert a5.classes[a5.power_map(five_a, 2)].name == "5B"
        assert a5.power_map(five_a, 6) == five_a
        assert a5.power_map(five_a, 5) == a5.identity
        assert a5.classes[a5.power_map(a5.index("2A"), 3)].name == "2A"

    def test_trivial_group(self):
        table = load_group(PACKAGE_DATA / "groups" / "trivial.json")
        assert table.group_order == 1

    def test_bundled_name_lookup(self):
        assert load_group("a5.json").name == "A₅"

    def test_cyclic_three(self):
        table = table_of(cyclic_three())
        assert table.classes[table.power_map(1, 2)].name == "3B"

    def test_rows_not_orthogonal(self):
        with pytest.raises(OrthogonalityFailure):
            table_of(cyclic_two([[1, 1], [1, 1]]))

    def test_sizes_must_sum_to_order(self):
        data = cyclic_two()
        data["order"] = 3
        with pytest.raises(Malformed):
            table_of(data)

    def test_missing_prime_power(self):
        with pytest.raises(PowerMapInconsistent):
            table_of(cyclic_three(power_map={}))

    def test_power_with_wrong_order(self):
        with pytest.raises(PowerMapInconsistent):
            table_of(cyclic_three(power_map={"3A": {"2": "1A"}, "3B": {"2": "3A"}}))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(Malformed):
            load_group(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileError):
            load_group(tmp_path / "nowhere.json")

    def test_schema_errors(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_bytes(orjson.dumps({"order": 2, "classes": [], "characters": []}))
        with pytest.raises(Malformed):
            load_group(path)


class TestAssignments:
    def test_bundled_assignment(self, a5, a5_assignment):
        loaded = load_assignment("a5.json")
        assert {k: v.render() for k, v in loaded.items()} == a5_assignment

    def test_compatible(self, a5, a5_assignment):
        report = validate_assignment(a5, a5_assignment)
        assert report.verdict is Verdict.PASS
        assert report.details["failures"] == []

    def test_power_conflict(self, a5, a5_assignment):
        broken = dict(a5_assignment, **{"5B": "5+"})
        report = validate_assignment(a5, broken)
        assert report.verdict is Verdict.FAIL
        assert report.witness == 2

    def test_wrong_order(self, a5, a5_assignment):
        report = validate_assignment(a5, dict(a5_assignment, **{"2A": "3+"}))
        assert report.verdict is Verdict.FAIL
        assert {"class": "2A", "reason": "order", "found": "3+"} in report.details["failures"]

    def test_unassigned_class(self, a5, a5_assignment):
        partial = {k: v for k, v in a5_assignment.items() if k != "3A"}
        assert validate_assignment(a5, partial).verdict is Verdict.FAIL

    def test_unknown_order_is_indeterminate(self):
        table = table_of(cyclic_two())
        report = validate_assignment(table, {"1A": "1", "2A": "2+"}, order_symbols={1: ["1"]})
        assert report.verdict is Verdict.INDETERMINATE
        assert report.details["unchecked"] == ["2A"]

    def test_trivial_group(self):
        table = load_group(PACKAGE_DATA / "groups" / "trivial.json")
        assert validate_assignment(table, {"1A": "1"}).passed

    def test_order_symbols_are_canonical(self):
        symbols = element_order_symbols()
        assert "4|2+" in symbols[4]
        assert symbols[1] == ("1",)


class TestMultiplicities:
    def test_trivial_character(self, a5, a5_assignment, catalog):
        m = multiplicity_series(a5, a5_assignment, 0, catalog, high=6)
        assert m[-1] == 1
        assert m[0] == 0
        assert m[1] == 4378

    def test_four_dimensional_character(self, a5, a5_assignment, catalog):
        m = multiplicity_series(a5, a5_assignment, 1, catalog, high=6)
        assert m[1] == 13122

    def test_galois_conjugate_characters_agree(self, a5, a5_assignment, catalog):
        chi3 = multiplicity_series(a5, a5_assignment, 3, catalog, high=30)
        chi4 = multiplicity_series(a5, a5_assignment, 4, catalog, high=30)
        assert chi3 == chi4

    @pytest.mark.parametrize("class_name,symbol", [("1A", "1"), ("2A", "2+"), ("3A", "3|3"), ("5B", "5")])
    def test_reconstruction(self, a5, a5_assignment, catalog, class_name, symbol):
        series = reconstruct_class_series(a5, a5_assignment, a5.index(class_name), catalog, high=20)
        assert series == catalog.expand(symbol, 20)

    def test_split_fifth_classes_are_irrational(self, a5, a5_assignment, catalog):
        split = dict(a5_assignment, **{"5B": "5+"})
        with pytest.raises(IrrationalResidue):
            multiplicity_series(a5, split, 3, catalog, high=6)


class TestModuleCheck:
    def test_a5_at_five(self, a5, a5_assignment, catalog):
        report = check_padic_moonshine(a5, a5_assignment, 5, high=200, catalog=catalog)
        assert report.integrality.passed
        assert report.positivity.passed
        assert all(r.verdict is not Verdict.FAIL for r in report.evidence)
        assert report.verdict is Verdict.PASS
        assert report.conclusion == "A₅ has 5-adic moonshine"

    def test_evidence_lists_classes(self, a5, a5_assignment, catalog):
        report = check_padic_moonshine(a5, a5_assignment, 5, high=20, catalog=catalog)
        by_symbol = {r.params["symbol"]: r.params["classes"] for r in report.evidence}
        assert by_symbol["5"] == ["5A", "5B"]
        assert report.to_dict()["integrality"]["name"] == "integrality"

    def test_valuation_evidence_per_symbol(self, a5, a5_assignment, catalog):
        report = check_padic_moonshine(a5, a5_assignment, 5, high=20, catalog=catalog)
        growth = {r.params["symbol"]: r for r in report.evidence if r.name == "valuations"}
        weak = {r.params["symbol"] for r in report.evidence if r.name == "weak"}
        assert set(growth) == weak
        assert all(len(r.valuations) == 3 for r in growth.values())
        assert all(r.window == 3500 // 5**3 for r in report.evidence)
        assert growth["1"].valuations[0] >= 2
        assert growth["1"].witness == 1

    def test_non_integral_multiplicities(self, catalog):
        table = table_of(cyclic_two())
        report = check_padic_moonshine(table, {"1A": "1", "2A": "5"}, 2, high=10, catalog=catalog)
        assert report.integrality.verdict is Verdict.FAIL
        assert report.integrality.witness == 1
        assert report.verdict is Verdict.FAIL
        assert report.conclusion == "C2 does not have 2-adic moonshine on this window"


class TestExponents:
    @pytest.mark.parametrize(
        "q,symbol,r",
        [(2, "2+", 12), (2, "2", 13), (3, "3+", 6), (3, "3", 9), (5, "5", 5), (7, "7", 4)],
    )
    def test_rows(self, catalog, q, symbol, r):
        assert check_exponent_group(symbol, q, r, window=200, catalog=catalog).passed

    def test_exact_divisibility(self, catalog):
        assert exponent_divisibility("5", 5, window=50, catalog=catalog).value == 5

    def test_one_more_fails(self, catalog):
        report = check_exponent_group("2+", 2, 13, window=200, catalog=catalog)
        assert report.verdict is Verdict.FAIL
        assert report.witness == 1

    def test_order_bound_solution(self, catalog):
        feasible, x = order_bound_feasible(["2+"], 2, 12, window=200, catalog=catalog)
        assert feasible
        assert x == [2**12 - 1]

    def test_order_bound_infeasible(self, catalog):
        feasible, x = order_bound_feasible(["2+"], 2, 13, window=200, catalog=catalog)
        assert not feasible
        assert x is None

    def test_no_candidates(self, catalog):
        feasible, _ = order_bound_feasible([], 3, 1, window=20, catalog=catalog)
        assert not feasible

    def test_max_exponent(self, catalog):
        assert max_feasible_exponent(["5"], 5, 10, window=100, catalog=catalog) == 5

    def test_report(self, catalog):
        report = check_order_bound(["3"], 3, 9, window=100, catalog=catalog)
        assert report.passed
        assert report.details["coefficients"] == [3**9 - 1]
