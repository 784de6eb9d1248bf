import xml.etree.ElementTree as ET

import pytest

from asrbias import report
from asrbias.errors import DataError

STATS = {
    "DC": {"min": 0.82, "q1": 0.84, "median": 0.86, "q3": 0.88, "max": 0.92},
    "Norm": {"min": 0.96, "q1": 0.98, "median": 1.0, "q3": 1.02, "max": 1.04},
}


class TestShade:
    def test_equal_column_white(self):
        assert report.shade_hex(5.0, 5.0, 5.0) == "#FFFFFF"

    def test_extremes(self):
        assert report.shade_hex(21.32, 21.32, 33.24) == "#FFFFFF"
        assert report.shade_hex(33.24, 21.32, 33.24) == "#E67C73"

    def test_interpolation_matches_published_shading(self):
        # 26.62 in the span 21.32..33.24 shades to #F4C5C1.
        assert report.shade_hex(26.62, 21.32, 33.24) == "#F4C5C1"


class TestShadedTable:
    def test_equal_column_all_white(self):
        html, _ = report.render_shaded_table([[3.0], [3.0]], ["a", "b"], ["c"])
        assert html.count("#FFFFFF") == 2

    def test_darkest_and_lightest(self):
        values = [[21.32], [26.62], [33.24]]
        html, _ = report.render_shaded_table(values, ["a", "b", "c"], ["col"])
        assert "#FFFFFF" in html and "#E67C73" in html

    def test_csv_round_trip(self):
        values = [[31.62, 26.62, 29.12], [28.66, 21.74, 25.20]]
        _, csv_text = report.render_shaded_table(
            values, ["none", "best"], ["Read", "HMI", "Average"]
        )
        back, row_labels, col_labels = report.parse_shaded_table_csv(csv_text)
        assert back == values
        assert row_labels == ["none", "best"]
        assert col_labels == ["Read", "HMI", "Average"]

    def test_non_finite_rejected(self):
        with pytest.raises(DataError):
            report.render_shaded_table([[float("nan")]], ["a"], ["b"])


class TestWarpBoxplot:
    def test_valid_svg(self):
        svg = report.plot_warp_boxplot(STATS)
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")

    def test_deterministic_bytes(self):
        assert report.plot_warp_boxplot(STATS) == report.plot_warp_boxplot(STATS)

    def test_reference_line_and_group_order(self):
        fig = report.build_warp_boxplot(STATS)
        ax = fig.axes[0]
        ref_lines = [
            ln
            for ln in ax.get_lines()
            if list(ln.get_ydata()) == [1.0, 1.0] and ln.get_linestyle() == "--"
        ]
        assert ref_lines, "missing dashed reference line at 1.0"
        assert [t.get_text() for t in ax.get_xticklabels()] == ["DC", "Norm"]

    def test_degenerate_box(self):
        stats = {"DC": {"min": 0.9, "q1": 0.9, "median": 0.9, "q3": 0.9, "max": 0.9}}
        svg = report.plot_warp_boxplot(stats)
        ET.fromstring(svg)

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            report.plot_warp_boxplot({})


class TestBiasBars:
    BIASES = {"baseline": {"DT": 10.0, "NnA": 40.0}}

    def test_bar_height_ratio(self):
        fig = report.build_bias_bars(self.BIASES)
        heights = [p.get_height() for p in fig.axes[0].patches]
        assert heights == [10.0, 40.0]

    def test_zero_bias_zero_height(self):
        fig = report.build_bias_bars({"m": {"DT": 0.0, "NnA": 5.0}})
        heights = [p.get_height() for p in fig.axes[0].patches]
        assert heights[0] == 0.0

    def test_deterministic_bytes(self):
        a = report.plot_bias_bars(self.BIASES)
        b = report.plot_bias_bars(self.BIASES)
        assert a == b

    def test_legend_has_model_labels(self):
        fig = report.build_bias_bars(
            {"sp+specaug | vtln-diverse": {"DC": 1.0}, "none | none": {"DC": 2.0}}
        )
        labels = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
        assert labels == ["sp+specaug | vtln-diverse", "none | none"]

    def test_multiple_models_grouped(self):
        fig = report.build_bias_bars(
            {"a": {"DC": 1.0, "DT": 2.0}, "b": {"DC": 3.0, "DT": 4.0}},
            group_order=["DC", "DT"],
        )
        assert len(fig.axes[0].patches) == 4
