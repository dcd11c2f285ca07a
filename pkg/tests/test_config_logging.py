"""
Config and Logging Tests
Layered configuration (defaults, file, environment) and the structured
log output of the CLI.
"""

import io
import json
import logging

import pytest

from wlp.cli import dispatch
from wlp.config import (DEFAULT_CONFIG_PATH, load_config, proof_limits_from_config,
                        solve_options_from_config)
from wlp.corpus import materialize
from wlp.errors import ConfigError, UsageError
from wlp.logging_setup import ROOT_LOGGER, JSONFormatter, configure_logging


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv('WLP_CONFIG', raising=False)
    monkeypatch.delenv('WLP_LOG_LEVEL', raising=False)


class TestConfig:
    """load_config layering"""

    def test_packaged_defaults(self):
        """Test 1: the packaged file is the default"""
        config = load_config()
        assert config['solver']['tolerance'] == 1e-12
        assert config['proofs'] == {'max_depth': 12, 'max_count': 10000}
        assert config['output']['significant_digits'] == 12
        assert load_config(DEFAULT_CONFIG_PATH) == config

    def test_partial_file_is_merged(self, tmp_path):
        """Test 2: missing keys keep their defaults"""
        path = tmp_path / 'partial.json'
        path.write_text(json.dumps({'solver': {'max_iterations': 7}}))
        config = load_config(str(path))
        assert config['solver']['max_iterations'] == 7
        assert config['solver']['mode'] == 'auto'
        assert config['logging']['level'] == 'WARNING'

    def test_missing_file_uses_defaults(self, tmp_path):
        """Test 3: a missing file is not an error"""
        config = load_config(str(tmp_path / 'absent.json'))
        assert config['proofs']['max_depth'] == 12

    def test_malformed_file(self, tmp_path):
        """Test 4: broken JSON is a ConfigError"""
        path = tmp_path / 'broken.json'
        path.write_text('{"solver": ')
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_environment(self, tmp_path, monkeypatch):
        """Test 5: WLP_CONFIG picks the file, WLP_LOG_LEVEL the level"""
        path = tmp_path / 'env.json'
        path.write_text(json.dumps({'proofs': {'max_count': 3}}))
        monkeypatch.setenv('WLP_CONFIG', str(path))
        monkeypatch.setenv('WLP_LOG_LEVEL', 'debug')
        config = load_config()
        assert config['proofs']['max_count'] == 3
        assert config['logging']['level'] == 'DEBUG'

    def test_typed_sections(self):
        """Test 6: solver and proof sections become option objects"""
        config = load_config()
        config['solver']['mode'] = 'iterate'
        config['proofs']['max_depth'] = 4
        opts = solve_options_from_config(config)
        assert (opts.mode, opts.max_iterations) == ('iterate', 10000)
        assert proof_limits_from_config(config).max_depth == 4
        config['solver']['mode'] = 'fastest'
        with pytest.raises(UsageError):
            solve_options_from_config(config)

    def test_cli_uses_config(self, tmp_path):
        """Test 7: --config changes proof limits and digits"""
        path = tmp_path / 'cli.json'
        path.write_text(json.dumps({'proofs': {'max_depth': 4},
                                    'output': {'significant_digits': 3}}))
        wlp_path, tsv_path = materialize('diverge', str(tmp_path))
        out = io.StringIO()
        code = dispatch(['--config', str(path), 'proofs', wlp_path, '--facts', tsv_path,
                         '--goal', 'reachable(a)'], stdout=out, stderr=io.StringIO())
        assert code == 0
        assert out.getvalue().splitlines()[-1] == '% 3 proofs (truncated)'

        wlp_path, tsv_path = materialize('graph4', str(tmp_path))
        out = io.StringIO()
        dispatch(['--config', str(path), 'solve', wlp_path, '--facts', tsv_path,
                  '--semiring', 'real', '--query', 'reachable(d)'], stdout=out,
                 stderr=io.StringIO())
        assert out.getvalue() == 'reachable(d) 1.25\n'

    def test_cli_malformed_config(self, tmp_path):
        """Test 8: a broken config file exits 1"""
        path = tmp_path / 'broken.json'
        path.write_text('[')
        err = io.StringIO()
        code = dispatch(['--config', str(path), 'fixtures', '--list'],
                        stdout=io.StringIO(), stderr=err)
        assert code == 1
        assert err.getvalue().startswith('error: Malformed config file')


class TestLogging:
    """Handlers and record formats"""

    def test_json_formatter_context_fields(self):
        """Test 1: extra= context lands in the JSON object"""
        record = logging.LogRecord('wlp.solver', logging.INFO, __file__, 10,
                                   'converged', None, None)
        record.semiring = 'real'
        record.iterations = 42
        data = json.loads(JSONFormatter().format(record))
        assert data['level'] == 'INFO'
        assert data['logger'] == 'wlp.solver'
        assert data['message'] == 'converged'
        assert data['semiring'] == 'real'
        assert data['iterations'] == 42
        assert 'residual' not in data

    def test_reconfiguring_replaces_handlers(self):
        """Test 2: repeated setup never stacks handlers"""
        configure_logging('INFO')
        logger = configure_logging('DEBUG', json_format=True)
        assert logger.name == ROOT_LOGGER
        assert len(logger.handlers) == 1
        assert logger.level == logging.DEBUG
        assert not logger.propagate

    def test_log_file(self, tmp_path):
        """Test 3: the file handler writes JSON lines"""
        path = tmp_path / 'wlp.log'
        logger = configure_logging('INFO', log_file=str(path))
        assert len(logger.handlers) == 2
        logging.getLogger('wlp.corpus.fixtures').info('written', extra={'atoms': 3})
        for handler in logger.handlers:
            handler.flush()
        record = json.loads(path.read_text().splitlines()[-1])
        assert record['message'] == 'written'
        assert record['atoms'] == 3

    def test_cli_json_logs_on_stderr(self, tmp_path, capsys):
        """Test 4: --log-json keeps stdout clean"""
        out = io.StringIO()
        code = dispatch(['--log-level', 'INFO', '--log-json', 'fixtures', 'cost3',
                         '-o', str(tmp_path)], stdout=out, stderr=io.StringIO())
        assert code == 0
        assert all(line.endswith('.wlp') or line.endswith('.tsv')
                   for line in out.getvalue().splitlines())
        records = [json.loads(line) for line in capsys.readouterr().err.splitlines()]
        assert any(r['message'].startswith('Materialized fixture cost3') for r in records)
