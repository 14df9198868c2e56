import io
import json

import pytest

from cli import EXIT_ERROR, EXIT_OK, EXIT_USAGE, run
from config import Config


def invoke(*argv):
    stream = io.StringIO()
    code = run(list(argv), stream=stream)
    return code, stream.getvalue()


def test_kh_ascii_layout():
    code, out = invoke("kh", "--braid", "2: 1 1 1", "--ascii")
    assert code == EXIT_OK
    lines = out.rstrip("\n").splitlines()
    # highest q first, delta axis at the bottom
    assert lines[0].strip().startswith("4 |")
    assert lines[-1].rstrip().endswith("(delta)")
    assert "-1" in lines[-1]


def test_kh_plain_entries():
    code, out = invoke("kh", "--braid", "2: 1 1 1")
    assert code == EXIT_OK
    assert out.splitlines() == ["delta=-1 q=1: 1", "delta=-1 q=3: 1", "delta=-1 q=4: 1"]


def test_twistknot_width():
    code, out = invoke("twistknot", "--t", "1", "--framing", "-1", "width")
    assert code == EXIT_OK
    assert out.strip() == "2"


def test_twistknot_rational_trivial_filling():
    code, out = invoke("twistknot", "--t", "1", "--slope", "1/0", "det")
    assert code == EXIT_OK
    assert out.strip() == "1"


def test_verify_figure_six():
    code, out = invoke("verify", "--figure", "6")
    assert code == EXIT_OK
    assert out.startswith("torus-base: PASS")


def test_json_output_is_sorted_and_stable():
    first = invoke("kh", "--braid", "3: 2 1 2 1 2 1", "--json")
    second = invoke("kh", "--braid", "3: 2 1 2 1 2 1", "--json")
    assert first == second
    payload = json.loads(first[1])
    assert first[1] == json.dumps(payload, sort_keys=True, indent=2) + "\n"
    assert payload['table']['components'] == 3
    assert len(payload['table']['entries']) == 5


@pytest.mark.parametrize("argv", [
    [],
    ["kh"],
    ["knot", "--braid", "1:"],
    ["kh", "--braid", "2: 5"],
    ["twistknot", "--t", "1"],
    ["twistknot", "--t", "1", "--framing", "1", "--slope", "1/2"],
    ["twistknot", "--t", "1", "--slope", "2/0"],
    ["verify", "--figure", "99"],
    ["e1", "--braid", "2: 1 1 1", "--crossings", "0,0"],
    ["kh", "--braid", "1:", "--threads", "-3"],
])
def test_usage_errors(argv):
    code, _ = invoke(*argv)
    assert code == EXIT_USAGE


def test_help_exits_cleanly():
    assert run(["--help"]) == EXIT_OK


def test_crossing_cap_is_a_computation_error():
    code, _ = invoke("kh", "--braid", "2: 1 1 1", "--max-crossings", "2")
    assert code == EXIT_ERROR


def test_negative_crossing_cone_is_a_computation_error():
    code, _ = invoke("cone", "--braid", "3: 1 -2 1 -2", "--crossing", "1")
    assert code == EXIT_ERROR


def test_extended_engine_gate(monkeypatch):
    monkeypatch.setattr(Config, 'ENABLE_EXTENDED', False)
    code, _ = invoke("twistknot", "--t", "3", "--framing", "-1", "width")
    assert code == EXIT_ERROR


@pytest.mark.parametrize("figure", ["branch-set", "torus-staircase", "8"])
def test_verify_large_t_needs_extended_engine(monkeypatch, figure):
    monkeypatch.setattr(Config, 'ENABLE_EXTENDED', False)
    code, _ = invoke("verify", "--figure", figure, "--t", "3")
    assert code == EXIT_ERROR


def test_cone_json():
    code, out = invoke("cone", "--braid", "2: 1 1 1", "--crossing", "0", "--json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload['c'] == 2
    assert payload['report']['passed'] is True


def test_e1_text():
    code, out = invoke("e1", "--braid", "3: 2 1 2 1 2 1", "--crossings", "0,1")
    assert code == EXIT_OK
    assert out.startswith("constants [3, 3], defect 0")


def test_turner_json():
    code, out = invoke("turner", "--braid", "2: 1 1", "--json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload['total'] == 2
    assert payload['diagonals'] == {'0': 1, '2': 1}
    assert payload['lower_bound']['passed'] is True


def test_jones_and_det():
    assert invoke("det", "--braid", "3: 1 -2 1 -2") == (EXIT_OK, "5\n")
    code, out = invoke("jones", "--braid", "2: 1 1 1", "--json")
    assert json.loads(out)['jones'] == {'2': 1, '6': 1, '8': -1}


def test_profile_and_verdict():
    code, out = invoke("profile", "--t", "0", "--from", "-5", "--to", "-4", "--json")
    assert code == EXIT_OK
    assert json.loads(out)['widths'] == {'-4': 2, '-5': 1}
    code, out = invoke("verdict", "--t", "1", "--json")
    assert code == EXIT_OK
    assert json.loads(out)['verdict'] == "no finite fillings"


def test_config_file_presets_and_flag_override(tmp_path):
    preset = tmp_path / "khwidth.conf"
    preset.write_text("max_crossings=2\njson=true\n")
    code, _ = invoke("kh", "--braid", "2: 1 1 1", "--config", str(preset))
    assert code == EXIT_ERROR
    code, out = invoke("width", "--braid", "2: 1 1 1", "--config", str(preset), "--max-crossings", "10")
    assert code == EXIT_OK
    assert json.loads(out)['width'] == 1


def test_config_file_unknown_key(tmp_path):
    preset = tmp_path / "khwidth.conf"
    preset.write_text("colour=blue\n")
    code, _ = invoke("kh", "--braid", "1:", "--config", str(preset))
    assert code == EXIT_USAGE


def test_missing_config_file(tmp_path):
    code, _ = invoke("kh", "--braid", "1:", "--config", str(tmp_path / "absent.conf"))
    assert code == EXIT_USAGE


def test_config_is_restored_after_run():
    before = (Config.MAX_CROSSINGS, Config.THREADS, Config.ENABLE_EXTENDED)
    invoke("kh", "--braid", "1:", "--max-crossings", "5", "--extended", "--threads", "2")
    assert (Config.MAX_CROSSINGS, Config.THREADS, Config.ENABLE_EXTENDED) == before
