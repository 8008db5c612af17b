import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from acfeas import formats
from acfeas.cli import main, parse_angle
from acfeas.power_model import PhaseSolution
from acfeas.reduction import DEFAULT_PARAMS, SubsetSumInstance, encode_subset_sum, witness_from_subset


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out, out.err

    return _run


class TestFormats:
    @settings(max_examples=40)
    @given(st.lists(st.integers(1, 500), min_size=1, max_size=8, unique=True), st.integers(1, 2000))
    def test_instance_round_trip(self, values, target):
        net = encode_subset_sum(SubsetSumInstance(tuple(values), target))
        doc = json.loads(json.dumps(formats.instance_to_dict(net)))
        assert formats.instance_from_dict(doc) == net

    def test_file_round_trip(self, tmp_path):
        net = encode_subset_sum(SubsetSumInstance((3, 5, 8), 11))
        formats.write_instance(tmp_path / "i.json", net)
        assert formats.read_instance(tmp_path / "i.json") == net
        sol = PhaseSolution({"l": 0.1, "g3": 1 / 3})
        formats.write_solution(tmp_path / "s.json", sol)
        assert formats.read_solution(tmp_path / "s.json") == sol

    @pytest.mark.parametrize(
        "doc",
        [
            {"buses": [], "lines": [], "extra": 1},
            {"buses": [{"id": "l", "kind": "load", "p_demand": 0, "q_demand": 0, "pd": 1}], "lines": []},
            {"buses": [{"id": "l", "kind": "load", "p_demand": 0}], "lines": []},
            {"buses": [{"id": "g", "kind": "generator", "p_demand": 1}], "lines": []},
            {"buses": [{"id": "l", "kind": "bus"}], "lines": []},
            {"buses": [{"id": "l", "kind": "load", "p_demand": 0, "q_demand": 0}], "lines": [{"from": "l"}]},
        ],
    )
    def test_strict_instance_schema(self, doc):
        with pytest.raises(formats.FormatError):
            formats.instance_from_dict(doc)

    def test_strict_solution_schema(self):
        with pytest.raises(formats.FormatError):
            formats.solution_from_dict({"angles": {"l": 0}})
        with pytest.raises(formats.FormatError):
            formats.solution_from_dict({"angles_rad": {"l": "zero"}})


class TestParseAngle:
    @pytest.mark.parametrize(
        "text, value",
        [
            ("pi/3", math.pi / 3),
            ("-pi/4", -math.pi / 4),
            ("2pi/3", 2 * math.pi / 3),
            ("2*pi/3", 2 * math.pi / 3),
            ("pi", math.pi),
            ("0.5pi", math.pi / 2),
            ("1.0471975511965976", 1.0471975511965976),
            ("π/6", math.pi / 6),
        ],
    )
    def test_forms(self, text, value):
        assert parse_angle(text) == pytest.approx(value, rel=1e-15)


class TestCommands:
    def test_encode_structure(self, run, tmp_path):
        out = tmp_path / "i.json"
        code, stdout, _ = run("encode", "--set", "1,2,3", "--target", 4, "--out", out)
        assert code == 0
        doc = json.loads(out.read_text())
        assert len(doc["buses"]) == 4 and len(doc["lines"]) == 3
        assert "np_max" in stdout and "nq_max" in stdout and "p_demand" in stdout

    def test_encode_condition_violated(self, run, tmp_path):
        code, _, err = run(
            "encode", "--set", "1,2", "--target", 3, "--susceptance", 0, "--conductance", 1, "--out", tmp_path / "x.json"
        )
        assert code == 2
        assert "tan(delta_max/2)" in err

    def test_encode_defaults_equal_explicit(self, run, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run("encode", "--set", "4,9", "--target", 9, "--out", a)
        run("encode", "--set", "4,9", "--target", 9, "--susceptance", -2, "--conductance", 0.5, "--delta-max", "pi/3", "--out", b)
        assert a.read_text() == b.read_text()

    def test_encode_rejects_duplicates(self, run, tmp_path):
        code, _, err = run("encode", "--set", "2,2", "--target", 2, "--out", tmp_path / "x.json")
        assert code == 2 and "distinct" in err

    def test_solve_feasible_writes_witness(self, run, tmp_path):
        inst, wit = tmp_path / "i.json", tmp_path / "w.json"
        run("encode", "--set", "1,2,3", "--target", 4, "--out", inst)
        code, stdout, _ = run("solve", inst, "--out", wit)
        assert code == 0
        assert "dp (auto)" in stdout and "feasible" in stdout
        assert formats.read_solution(wit).angles["l"] == 0.0

    def test_solve_infeasible(self, run, tmp_path):
        inst = tmp_path / "i.json"
        run("encode", "--set", "2,4", "--target", 3, "--out", inst)
        assert run("solve", inst)[0] == 3
        assert run("solve", inst, "--method", "brute")[0] == 3
        assert run("solve", inst, "--method", "grid")[0] == 4

    def test_solve_general_star(self, run, tmp_path):
        inst = tmp_path / "star.json"
        inst.write_text(
            json.dumps(
                {
                    "buses": [
                        {"id": "l", "kind": "load", "p_demand": -0.9, "q_demand": 0.7},
                        {"id": "a", "kind": "generator"},
                        {"id": "b", "kind": "generator"},
                    ],
                    "lines": [
                        {"from": "a", "to": "l", "susceptance": -1, "conductance": 0, "delta_max": 1.0},
                        {"from": "b", "to": "l", "susceptance": -3, "conductance": 0.4, "delta_max": 0.5},
                    ],
                }
            )
        )
        code, stdout, _ = run("solve", inst)
        assert code in (0, 4)
        assert "grid (auto)" in stdout
        assert run("solve", inst, "--method", "grid")[0] in (0, 4)
        assert run("solve", inst, "--method", "dp")[0] == 5

    def test_solve_malformed(self, run, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run("solve", bad)[0] == 2
        assert run("solve", tmp_path / "missing.json")[0] == 2

    def test_check_and_decode(self, run, tmp_path):
        inst, wit = tmp_path / "i.json", tmp_path / "w.json"
        run("encode", "--set", "3,5,7,11", "--target", 15, "--out", inst)
        code, _, _ = run("witness", "--set", "3,5,7,11", "--target", 15, "--subset", "3,5,7", "--out", wit)
        assert code == 0
        code, stdout, _ = run("check", inst, wit)
        assert code == 0 and stdout.strip().endswith("feasible")
        max_res = float(stdout.split("max residual")[1].split()[0])
        assert max_res <= 1e-8
        code, stdout, _ = run("decode", inst, wit)
        assert code == 0
        assert "subset    3,5,7" in stdout and "sum       15" in stdout

    def test_check_infeasible(self, run, tmp_path):
        inst, wit = tmp_path / "i.json", tmp_path / "w.json"
        run("encode", "--set", "3,5", "--target", 5, "--out", inst)
        formats.write_solution(wit, PhaseSolution({"l": 0.0, "g3": 0.0, "g5": 0.0}))
        code, stdout, _ = run("check", inst, wit)
        assert code == 3 and stdout.strip().endswith("infeasible")
        assert run("decode", inst, wit)[0] == 2

    def test_witness_wrong_sum(self, run):
        assert run("witness", "--set", "1,2,3", "--target", 4, "--subset", "3")[0] == 2

    def test_witness_to_stdout(self, run):
        code, stdout, _ = run("witness", "--set", "1,2", "--target", 2, "--subset", "2")
        assert code == 0
        expected = witness_from_subset(SubsetSumInstance((1, 2), 2), DEFAULT_PARAMS, [2])
        assert formats.solution_from_dict(json.loads(stdout)) == expected

    def test_capacity_from_angle(self, run):
        code, stdout, _ = run("capacity", "--b", -1, "--g", 0, "--delta-max", 1.5707963)
        assert code == 0
        assert float(stdout.split()[1]) == pytest.approx(2.0, abs=1e-6)

    def test_capacity_clamped_branch(self, run):
        code, stdout, _ = run("capacity", "--b", -1, "--g", 0, "--capacity", 5)
        assert code == 0
        assert float(stdout.split()[1]) == math.pi / 2
        assert "clamped" in stdout

    def test_capacity_needs_one_direction(self, run):
        assert run("capacity", "--b", -1, "--g", 0)[0] == 2

    def test_verify_lemmas_small(self, run):
        code, stdout, _ = run("verify-lemmas", "--samples", 2000, "--seed", 7)
        assert code == 0
        assert "lemma 1 inequality   2000/2000" in stdout
        assert "lemma 2 implication  2000/2000" in stdout

    def test_verify_lemmas_deterministic(self, run):
        first = run("verify-lemmas", "--samples", 500, "--seed", 3)
        assert run("verify-lemmas", "--samples", 500, "--seed", 3) == first

    def test_verify_lemmas_rejects_zero_samples(self, run):
        assert run("verify-lemmas", "--samples", 0)[0] == 2

    def test_unknown_subcommand(self, run):
        assert run("frobnicate")[0] == 2
