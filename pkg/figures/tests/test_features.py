"""Qualitative figure features: curve counts, log axes, bound overlays."""

import matplotlib.pyplot as plt
import pytest

from diffid_figures import read_artifact
from diffid_figures.render import _PLOTTERS

from test_render import CASES, make_csv


@pytest.fixture
def plotted(tmp_path):
    def build(fig_id):
        kind, cols = CASES[fig_id]
        csv = make_csv(tmp_path / f"f{fig_id}.csv", kind, cols)
        fig, ax = plt.subplots()
        _PLOTTERS[fig_id](ax, read_artifact(csv))
        return ax
    yield build
    plt.close("all")


@pytest.mark.parametrize("fig_id,n_curves", [(2, 4), (3, 4), (4, 1), (5, 6),
                                             (6, 2), (7, 4)])
def test_curve_counts(plotted, fig_id, n_curves):
    assert len(plotted(fig_id).get_lines()) == n_curves


@pytest.mark.parametrize("fig_id,scale", [(2, "linear"), (3, "linear"),
                                          (4, "linear"), (5, "log"),
                                          (6, "log"), (7, "log")])
def test_error_plots_use_log_y(plotted, fig_id, scale):
    assert plotted(fig_id).get_yscale() == scale


@pytest.mark.parametrize("fig_id,n_bounds", [(5, 2), (6, 1)])
def test_bound_curves_overlaid(plotted, fig_id, n_bounds):
    labels = [line.get_label() for line in plotted(fig_id).get_lines()]
    assert sum("bound" in lab for lab in labels) == n_bounds
    assert any("bound" not in lab for lab in labels)  # empirical curves too
