"""
Shared pytest fixtures for disklab tests.

Test Philosophy:
- Numeric kernels are unit tested against closed forms
- Pipelines are grey-box: write a scenario config, run the CLI verb, check
  stdout and the written CSV/JSON files
- Grids in tests are reduced (few radii, few angles, loose tolerances) so
  the suite stays fast; the full acceptance grids run through `verify`
"""
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

# Add parent directory to path so we can import disklab
sys.path.insert(0, str(Path(__file__).parent.parent))

import disklab

__all__ = ['cli_run', 'lab_dir', 'write_config', 'small_radii']

# Radii ladder used by most tests instead of SUP_RADII
small_radii = (0.0, 0.5, 0.9)


def cli_run(args: list, env: dict = None, cwd: str = None) -> subprocess.CompletedProcess:
    """
    Run disklab.py CLI command.

    Args:
        args: Command arguments (without 'python disklab.py' prefix)
        env: Environment variables (merged with current env)
        cwd: Working directory

    Returns:
        CompletedProcess with stdout, stderr, returncode

    Example:
        result = cli_run(['flow', '--config', 'flow.json'])
        assert result.returncode == 0
        assert '✓' in result.stdout
    """
    cmd = [sys.executable, str(Path(__file__).parent.parent / 'disklab.py')] + args

    run_env = os.environ.copy()
    if env:
        run_env.update(env)

    return subprocess.run(
        cmd,
        capture_output=True,
        text=True,
        env=run_env,
        cwd=cwd
    )


@pytest.fixture
def lab_dir(tmp_path, monkeypatch):
    """
    Fixture pointing DISKLAB_OUTPUT at a temp directory.

    Directory structure:
        tmp_path/out/
        ├── <output>.csv
        ├── <output>.json
        └── <output>.<label>.<kind>.dat
    """
    out = tmp_path / 'out'
    monkeypatch.setenv('DISKLAB_OUTPUT', str(out))
    return out


@pytest.fixture
def write_config(tmp_path):
    """Fixture returning a helper that writes a scenario config and returns its path."""
    def _write(name: str, config) -> Path:
        path = tmp_path / f'{name}.json'
        if isinstance(config, str):
            path.write_text(config, encoding='utf-8')
        else:
            path.write_text(json.dumps(config, indent=2), encoding='utf-8')
        return path
    return _write
