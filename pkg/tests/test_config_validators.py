import pytest

from config import Config
from validators import InputValidator, ValidationError


def test_load_file_parses_known_keys(tmp_path):
    preset = tmp_path / "presets.conf"
    preset.write_text("max-crossings = 20\nthreads=4\nextended=TRUE\nascii=false\n")
    assert Config.load_file(str(preset)) == {
        'max_crossings': 20, 'threads': 4, 'extended': True, 'ascii': False,
    }


@pytest.mark.parametrize("content", ["verbose=true\n", "threads\n", "threads=many\n"])
def test_load_file_rejects_bad_entries(tmp_path, content):
    preset = tmp_path / "presets.conf"
    preset.write_text(content)
    with pytest.raises(ValueError):
        Config.load_file(str(preset))


def test_load_file_requires_file(tmp_path):
    with pytest.raises(OSError):
        Config.load_file(str(tmp_path / "missing.conf"))


def test_worker_count(monkeypatch):
    assert Config.worker_count(3) == 3
    monkeypatch.setattr(Config, 'THREADS', 5)
    assert Config.worker_count() == 5
    monkeypatch.setattr(Config, 'THREADS', 0)
    assert Config.worker_count(0) >= 1


def test_pin_single_worker(monkeypatch):
    monkeypatch.setattr(Config, 'THREADS', 8)
    Config.pin_single_worker()
    assert Config.worker_count() == 1


def test_parse_braid():
    assert InputValidator.parse_braid("3: 1 -2") == (3, [(1, 1), (2, -1)])
    assert InputValidator.parse_braid(" 2 :") == (2, [])
    with pytest.raises(ValidationError):
        InputValidator.parse_braid("17:")
    with pytest.raises(ValidationError):
        InputValidator.parse_braid("2:" + " 1" * 65)


def test_validate_braid_text():
    assert InputValidator.validate_braid_text("2: 1 1")[0]
    is_valid, error, parsed = InputValidator.validate_braid_text("2: 3")
    assert not is_valid and parsed is None and "out of range" in error


@pytest.mark.parametrize("text,expected", [
    ("7/2", (7, 2)), ("-7/2", (-7, 2)), ("7/-2", (-7, 2)), ("5", (5, 1)),
    ("1/0", (1, 0)), ("-1/0", (1, 0)),
])
def test_valid_slopes(text, expected):
    assert InputValidator.validate_slope(text) == (True, "", expected)


@pytest.mark.parametrize("text", ["2/0", "4/2", "a/b", "", "1/2/3"])
def test_invalid_slopes(text):
    assert not InputValidator.validate_slope(text)[0]


def test_crossing_ids():
    assert InputValidator.validate_crossing_ids("2, 0 1", 3) == (True, "", [2, 0, 1])
    assert InputValidator.validate_crossing_ids([1, 0], 3) == (True, "", [1, 0])
    assert not InputValidator.validate_crossing_ids("0,3", 3)[0]
    assert not InputValidator.validate_crossing_ids("1,1", 3)[0]
    assert not InputValidator.validate_crossing_ids("x", 3)[0]
    assert not InputValidator.validate_crossing_ids("", 3)[0]


def test_figure_ids():
    assert InputValidator.validate_figure_id("6") == (True, "", 'torus-base')
    assert InputValidator.validate_figure_id(" Branch-Set ") == (True, "", 'branch-set')
    assert not InputValidator.validate_figure_id("15")[0]


def test_thread_count():
    assert InputValidator.validate_thread_count(None) == (True, "")
    assert InputValidator.validate_thread_count(8)[0]
    assert not InputValidator.validate_thread_count(-1)[0]
    assert not InputValidator.validate_thread_count("8")[0]


def test_twist_parameter_bounds():
    assert InputValidator.validate_twist_parameter("2") == (True, "", 2)
    assert not InputValidator.validate_twist_parameter(-1)[0]
    assert not InputValidator.validate_twist_parameter(4)[0]


def test_framing_bounds():
    assert InputValidator.validate_framing("-5") == (True, "", -5)
    assert not InputValidator.validate_framing(41)[0]


def test_twistknot_request():
    ok, _, cleaned = InputValidator.validate_twistknot_request({'t': '1', 'framing': '-1', 'action': 'width'})
    assert ok and cleaned == {'t': 1, 'p': -1, 'q': 1, 'action': 'width'}
    ok, _, cleaned = InputValidator.validate_twistknot_request({'t': 0, 'slope': '7/2'})
    assert ok and cleaned == {'t': 0, 'p': 7, 'q': 2, 'action': 'kh'}
    assert not InputValidator.validate_twistknot_request({'t': 0, 'framing': 1, 'slope': '1'})[0]
    assert not InputValidator.validate_twistknot_request({'t': 0, 'framing': 1, 'action': 'plot'})[0]
    assert not InputValidator.validate_twistknot_request({'framing': 1})[0]
