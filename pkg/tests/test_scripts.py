import runpy
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


@pytest.mark.parametrize(
    "name, argv",
    [("perturbation_sweep.py", ["--configs", "2", "--points", "3"]), ("classification_demo.py", ["--seed", "3"])],
)
def test_script_runs(monkeypatch, capsys, name, argv):
    monkeypatch.setattr(sys, "argv", [name, *argv])
    runpy.run_path(str(SCRIPTS / name), run_name="__main__")
    out = capsys.readouterr().out
    assert len(out.strip().splitlines()) >= 3
