import runpy
from pathlib import Path

import pytest

SCRIPTS = sorted((Path(__file__).parent.parent / "gallery").glob("*.py"))


@pytest.mark.parametrize("path", SCRIPTS, ids=[p.stem for p in SCRIPTS])
def test_gallery_script_runs(path, capsys):
    runpy.run_path(str(path), run_name="__main__")
    assert capsys.readouterr().out.strip()


def test_quintic_script_prints_result(capsys):
    runpy.run_path(str(Path(__file__).parent.parent / "gallery" / "quintic_surface.py"))
    assert capsys.readouterr().out.rstrip().endswith("result = -1")
