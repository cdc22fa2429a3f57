import io
import json
import math
import os
import subprocess
import sys

import pytest

from bernloewner.branching import MechanismSpec
from bernloewner.cli import CLIError, emit_table, fmt, fmt_complex, parse_complex, parse_grid, run
from bernloewner.evolution import HerglotzField
from bernloewner.generator import GeneratorRepr

LINEAR = '{"q":0,"a":1,"b":0,"pi":{"atoms":[],"panels":[]}}'
FELLER_FIELD = '{"breakpoints":[0,2],"slices":[{"kind":"feller","b":1}]}'
LINEAR_FIELD = '{"breakpoints":[0,3],"slices":[{"kind":"linear","a":1}]}'


def call(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    if env:
        old = {k: os.environ.get(k) for k in env}
        os.environ.update(env)
    try:
        code = run(list(argv), stdout=out, stderr=err)
    finally:
        if env:
            for k, v in old.items():
                if v is None:
                    os.environ.pop(k, None)
                else:
                    os.environ[k] = v
    return code, out.getvalue(), err.getvalue()


class TestFormatting:
    def test_fmt(self):
        assert fmt(math.exp(-1)) == "0.36787944117144233"
        assert fmt(-0.0) == "0"
        assert fmt(math.inf) == "inf"
        assert fmt(2.0) == "2"

    def test_fmt_complex(self):
        assert fmt_complex(complex(1.5, -0.0)) == "1.5,0"

    def test_parse_complex(self):
        assert parse_complex("1.5,-2") == 1.5 - 2j
        assert parse_complex("3") == 3 + 0j
        for bad in ("1+2i", "a,b", "1,2,3"):
            with pytest.raises(CLIError):
                parse_complex(bad)

    def test_parse_grid(self):
        assert parse_grid("0,1,2") == [0, 1, 2]
        assert parse_grid("lin:0:1:3") == [0, 0.5, 1]
        assert parse_grid("") == []
        with pytest.raises(CLIError):
            parse_grid("lin:0:1")


class TestCommands:
    def test_flow_example(self):
        code, out, _ = call("flow", "--gen", LINEAR, "--t", "1", "--z", "1,0")
        assert code == 0 and out == "0.36787944117144233,0\n"

    def test_flow_json(self):
        code, out, _ = call("flow", "--gen", LINEAR, "--t", "1", "--output", "json")
        obj = json.loads(out)
        assert code == 0 and obj["used_closed_form"] is True
        assert obj["w"] == {"re": math.exp(-1), "im": 0.0} or obj["w"][0] == math.exp(-1)

    def test_classify(self):
        code, out, _ = call("classify", "--gen", LINEAR)
        assert code == 0
        assert '"has_brfp_0":true' in out.replace(" ", "")
        assert '"dw_point":"zero"' in out.replace(" ", "")

    def test_eval(self):
        code, out, _ = call("eval", "--gen", '{"q":1,"a":0,"b":0}', "--z", "3,4")
        assert code == 0 and out == "-1,0\n"

    def test_eval_bernstein(self):
        code, out, _ = call("eval", "--bern", '{"alpha":0,"beta":1}', "--z", "2,1")
        assert code == 0 and out == "2,1\n"

    def test_eval_mechanism(self):
        code, out, _ = call("eval", "--mech", '{"kind":"feller","b":1}', "--z", "2,0")
        assert code == 0 and out == "4,0\n"

    def test_evolve_and_reverse(self):
        field = '{"breakpoints":[0,1,2],"slices":[{"a":1},{"b":1}]}'
        _, fwd, _ = call("evolve", "--field", field, "--t", "2")
        _, rev, _ = call("reverse", "--field", field, "--t", "2")
        assert float(fwd.split(",")[0]) == pytest.approx(math.exp(-1) / (1 + math.exp(-1)))
        assert float(rev.split(",")[0]) == pytest.approx(0.5 * math.exp(-1))

    def test_inverse_exit(self):
        field = '{"breakpoints":[0,1],"slices":[{"q":2}]}'
        code, _, err = call("inverse", "--field", field, "--t", "1")
        assert code == 2 and "t_exit" in err
        code, out, _ = call("inverse", "--field", field, "--t", "1", "--allow-exit")
        assert code == 0 and out.startswith("exit,0.5")
        code, out, _ = call("inverse", "--field", field, "--t", "0.4")
        assert code == 0 and float(out.split(",")[0]) == pytest.approx(0.2)

    def test_mech(self):
        code, out, _ = call("mech", "--mech", '{"kind":"feller","b":1}', "--t", "1", "--z", "1,0")
        obj = json.loads(out)
        assert code == 0 and obj["generator"]["b"] == 1
        assert "laplace_exponent" in obj

    def test_file_input(self, tmp_path):
        p = tmp_path / "gen.json"
        p.write_text(LINEAR)
        code, out, _ = call("flow", "--gen", str(p), "--t", "1")
        assert code == 0 and out == "0.36787944117144233,0\n"

    def test_out_file(self, tmp_path):
        p = tmp_path / "o.csv"
        code, out, _ = call("flow", "--gen", LINEAR, "--t", "1", "--out", str(p))
        assert code == 0 and out == "" and p.read_text() == "0.36787944117144233,0\n"


class TestExitCodes:
    def test_unknown_key(self):
        code, _, err = call("flow", "--gen", '{"q":0,"a":1,"zz":0}', "--t", "1")
        assert code == 1 and err

    def test_bad_json(self):
        assert call("flow", "--gen", "{not json", "--t", "1")[0] == 1

    def test_bad_flag(self):
        assert call("flow", "--bogus")[0] == 1

    def test_unknown_command(self):
        assert call("frobnicate")[0] == 1

    def test_missing_time(self):
        assert call("flow", "--gen", LINEAR)[0] == 1

    def test_no_brfp_is_domain_error(self):
        field = '{"breakpoints":[0,1],"slices":[{"q":1}]}'
        code, _, err = call("table", "--field", field, "--t-grid", "1", "--quantity", "deriv0")
        assert code == 2 and "NoBRFPError" in err

    def test_out_of_half_plane(self):
        assert call("flow", "--gen", LINEAR, "--t", "1", "--z=-1,0")[0] == 2


class TestCheck:
    def test_valid_field(self):
        code, out, _ = call("check", "--field", '{"breakpoints":[0,1,2],"slices":[{"a":1},{"kind":"stable","alpha":0.5,"scale":1}]}')
        assert code == 0 and json.loads(out)["passed"] is True

    def test_positive_phi0(self):
        # q = 0 with a hand-edited negative "q" term makes phi(0+) > 0
        field = '{"breakpoints":[0,1,2],"slices":[{"a":1},{"q":-0.5,"a":1}]}'
        code, out, err = call("check", "--field", field)
        rep = json.loads(out)
        assert code == 2 and rep["passed"] is False
        bad = rep["objects"][1]["categories"]["phi0_nonpositive"]
        assert bad["passed"] is False and bad["worst"] > 0
        assert rep["objects"][0]["categories"]["phi0_nonpositive"]["passed"] is True
        assert "phi0_nonpositive" in err

    def test_negative_quadratic(self):
        code, out, _ = call("check", "--gen", '{"b":-1}')
        assert code == 2 and not json.loads(out)["objects"][0]["categories"]["phi2_completely_monotone"]["passed"]

    def test_bernstein(self):
        assert call("check", "--bern", '{"alpha":1,"beta":0.5}')[0] == 0
        assert call("check", "--bern", '{"alpha":-1,"beta":0.5}')[0] == 2

    def test_deterministic(self):
        field = '{"breakpoints":[0,1],"slices":[{"q":-0.5}]}'
        assert call("check", "--field", field) == call("check", "--field", field)


class TestTable:
    def test_feller_row(self):
        code, out, _ = call("table", "--field", FELLER_FIELD, "--t-grid", "1", "--zeta", "1,0")
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == "s,t,re_zeta,im_zeta,re_val,im_val"
        assert lines[1] == "0,1,1,0,0.5,0"

    def test_empty_t_grid(self):
        code, out, _ = call("table", "--field", FELLER_FIELD)
        assert code == 0 and out == "s,t,re_zeta,im_zeta,re_val,im_val\n"

    def test_deriv0(self):
        code, out, _ = call("table", "--field", LINEAR_FIELD, "--t-grid", "0,1,2", "--quantity", "deriv0")
        lines = out.splitlines()
        assert lines[0] == "s,t,re_val,im_val"
        vals = [float(r.split(",")[2]) for r in lines[1:]]
        assert vals == [1.0, pytest.approx(math.exp(-1), rel=1e-15), pytest.approx(math.exp(-2), rel=1e-15)]

    def test_lexicographic_order_and_skip(self):
        F = HerglotzField.constant(MechanismSpec.feller(1).to_generator(), 2.0)
        rows = emit_table(F, [0.0, 1.0], [0.5, 2.0], [1 + 0j, 2 + 0j])
        keys = [(float(r[0]), float(r[1]), float(r[2])) for r in rows[1:]]
        assert keys == sorted(keys)
        assert (1.0, 0.5, 1.0) not in keys and len(keys) == 6

    def test_transition_and_mean(self):
        _, out, _ = call("table", "--field", FELLER_FIELD, "--t-grid", "1", "--quantity", "transition", "--x", "1")
        assert float(out.splitlines()[1].split(",")[4]) == pytest.approx(math.exp(-0.5))
        _, out, _ = call("table", "--field", FELLER_FIELD, "--t-grid", "1", "--quantity", "mean", "--x", "3")
        assert out.splitlines()[1] == "0,1,3,0"

    def test_json_output(self):
        _, out, _ = call("table", "--field", FELLER_FIELD, "--t-grid", "1", "--output", "json")
        assert json.loads(out) == [{"s": 0, "t": 1, "re_zeta": 1, "im_zeta": 0, "re_val": 0.5, "im_val": 0}]

    def test_byte_identical(self, tmp_path):
        args = ["table", "--field", '{"breakpoints":[0,1,2],"slices":[{"kind":"stable","alpha":0.5,"scale":1},{"a":1,"b":1}]}',
                "--s-grid", "0,0.5", "--t-grid", "lin:0:2:5", "--zeta", "1,0", "--zeta", "0.5,2"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert call(*args, "--out", str(a))[0] == 0
        assert call(*args, "--out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes() and len(a.read_bytes()) > 100


class TestEnvironment:
    def test_rtol_env_var(self):
        gen = '{"q":0,"a":0.5,"b":0,"pi":{"atoms":[{"x":1,"w":1}],"panels":[]}}'
        base = call("flow", "--gen", gen, "--t", "2", "--output", "json")[1]
        loose = call("flow", "--gen", gen, "--t", "2", "--output", "json", env={"LOEWNER_DEFAULT_RTOL": "1e-3"})[1]
        assert json.loads(loose)["steps"] < json.loads(base)["steps"]

    def test_bad_env_var(self):
        assert call("flow", "--gen", LINEAR, "--t", "1", env={"LOEWNER_DEFAULT_RTOL": "abc"})[0] == 1

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "bernloewner", "flow", "--gen", LINEAR, "--t", "1"],
                             capture_output=True, text=True, check=False)
        assert res.returncode == 0 and res.stdout == "0.36787944117144233,0\n"
