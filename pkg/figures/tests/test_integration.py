"""End-to-end: render figures from artifacts produced by the simulation CLI.

Exercises the real CSV contract between the two packages; skipped when the
simulation package is not installed.
"""

import pytest

diffid_cli = pytest.importorskip("diffid.cli")

from diffid_figures import render_figure  # noqa: E402


def run_cli(args):
    return diffid_cli.main([str(a) for a in args])


def test_rmse_artifact_renders(tmp_path):
    assert run_cli(["rmse", "--horizon", 0.02, "--out-dir", tmp_path]) == 0
    paths = render_figure(4, tmp_path / "rmse.csv", tmp_path / "figs")
    assert all(p.exists() for p in paths)


def test_profile_artifact_renders(tmp_path):
    assert run_cli(["diffusion-profile", "--times", 0.013, 0.05,
                    "--out-dir", tmp_path]) == 0
    paths = render_figure(2, tmp_path / "diffusion_profile.csv", tmp_path / "figs")
    assert all(p.exists() for p in paths)


def test_sweep_artifacts_render_both_error_figures(tmp_path):
    assert run_cli(["sweep-n", "--n-min", 10, "--n-max", 11, "--iter1", 300,
                    "--iter2", 80, "--seed", 3, "--workers", 1,
                    "--out-dir", tmp_path]) == 0
    for fig_id in (5, 6):
        paths = render_figure(fig_id, tmp_path / "sweep_n.csv", tmp_path / "figs")
        assert all(p.exists() for p in paths)


def test_primary_cli_figures_flag(tmp_path):
    assert run_cli(["rmse", "--horizon", 0.02, "--out-dir", tmp_path,
                    "--figures"]) == 0
    assert (tmp_path / "fig4.png").exists()
    assert (tmp_path / "fig4.svg").exists()
