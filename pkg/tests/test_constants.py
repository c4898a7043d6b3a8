import json

import pytest

from mdat import constants
from mdat.constants import DEFAULTS, INVERSION_MODES, SOLVER_NAMES, load_defaults


def test_no_file(tmp_path):
    assert load_defaults(tmp_path / 'missing.json') == DEFAULTS


def test_user_defaults(tmp_path):
    path = tmp_path / 'defaults.json'
    path.write_text(json.dumps({'tau': 0, 'mode': 'v1', 'jobs': '3'}))
    defaults = load_defaults(path)
    assert defaults == {'tau': 0.0, 'mode': 'v1', 'jobs': 3, 'solver': 'bvls'}
    assert isinstance(defaults['tau'], float)


def test_unknown_key(tmp_path, caplog):
    path = tmp_path / 'defaults.json'
    path.write_text(json.dumps({'colour': 'blue'}))
    assert load_defaults(path) == DEFAULTS
    assert 'colour' in caplog.text


def test_bad_file(tmp_path, caplog):
    path = tmp_path / 'defaults.json'
    path.write_text('{not json')
    assert load_defaults(path) == DEFAULTS
    assert 'Ignoring' in caplog.text
    path.write_text('[1, 2]')
    assert load_defaults(path) == DEFAULTS


def test_mode_and_solver_names_match_inverse():
    from mdat.inverse import SOLVERS, THETA_METHODS
    assert set(INVERSION_MODES) == set(THETA_METHODS)
    assert set(SOLVER_NAMES) == set(SOLVERS)


@pytest.mark.parametrize('entry', [
    {'solver': 'nope'},
    {'mode': 'v3'},
    {'tau': -1},
    {'tau': 'soon'},
    {'jobs': 0},
    {'jobs': 'many'},
    {'jobs': None},
])
def test_invalid_entries_fall_back(tmp_path, caplog, entry):
    path = tmp_path / 'defaults.json'
    path.write_text(json.dumps(entry))
    assert load_defaults(path) == DEFAULTS
    assert 'Ignoring' in caplog.text


def test_invalid_entry_keeps_the_others(tmp_path):
    path = tmp_path / 'defaults.json'
    path.write_text(json.dumps({'solver': 'nope', 'mode': 'v1'}))
    assert load_defaults(path) == dict(DEFAULTS, mode='v1')


def test_config_path_read_at_call_time(tmp_path, monkeypatch):
    path = tmp_path / 'defaults.json'
    path.write_text(json.dumps({'tau': 0.5}))
    monkeypatch.setattr(constants, 'CONFIG_PATH', path)
    assert load_defaults()['tau'] == 0.5
