"""End-to-end: render figures from a real margin-ordering sweep.

Skipped when the training package is not installed; all other tests in this
suite run against fabricated CSVs and need only the file interface.
"""

from pathlib import Path

import pytest

normdescent_runner = pytest.importorskip("normdescent.runner")

from ndplots import panels

CONFIG = Path(__file__).resolve().parents[2] / "configs" / "criterion6_sweep.json"


@pytest.fixture(scope="module")
def sweep_csvs(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    config = normdescent_runner.load_config(CONFIG)
    config["seeds"] = [0, 1]  # two seeds keep the fixture quick; bands still drawn
    normdescent_runner.sweep(config, out_override=out, workers=2)
    return sorted(out.glob("*/seed*.csv"))


def test_renders_margin_and_alignment_figures(sweep_csvs, tmp_path):
    job = panels.PlotJob(csv_paths=tuple(str(p) for p in sweep_csvs), out_dir=tmp_path / "fig")
    written = panels.render(job)
    names = {p.name for p in written}
    for norm_name in ("l2", "linf", "msp"):
        assert f"margin_vs_loss_{norm_name}.png" in names
        assert f"margin_vs_loss_{norm_name}.svg" in names
    assert "alignment_vs_time.png" in names and "alignment_vs_time.svg" in names


def test_repeated_invocations_are_byte_identical(sweep_csvs, tmp_path):
    job_a = panels.PlotJob(csv_paths=tuple(str(p) for p in sweep_csvs), out_dir=tmp_path / "a")
    job_b = panels.PlotJob(csv_paths=tuple(str(p) for p in sweep_csvs), out_dir=tmp_path / "b")
    for fa, fb in zip(sorted(panels.render(job_a)), sorted(panels.render(job_b))):
        assert fa.read_bytes() == fb.read_bytes(), fa.name
