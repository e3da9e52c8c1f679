"""Figure rendering against the committed reference tables.

The reference directory holds solver CSV outputs checked in with the
package; every test renders from those fixed files, so results are
reproducible without running the solver.
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest

from fpme_figures import (
    FIGURE_KINDS,
    GREEN_HEADER,
    SWEEP_HEADER,
    TRAJECTORY_HEADER,
    FigureSpec,
    InputFormatError,
    make_figure,
    plot_green,
    plot_monotonicity,
    plot_smoothing,
    plot_sweep,
)
from fpme_figures.cli import main
from fpme_figures.figures import theta1

REFERENCE = Path(__file__).resolve().parent.parent / "reference"

GREEN_CSV = REFERENCE / "green" / "green.csv"
SLOPE_CSV = REFERENCE / "smoothing_slope" / "m2_s0.5_mass1" / "trajectory.csv"
FAMILY_CSVS = tuple(
    REFERENCE / "smoothing_family" / f"m2_s0.5_mass{m}" / "trajectory.csv"
    for m in ("0.1", "1", "10")
)
MONO_CSV = REFERENCE / "monotonicity" / "trajectory.csv"
STUDY_CSV = REFERENCE / "study" / "sweep_summary.csv"


def test_reference_fixtures_present():
    for path in (GREEN_CSV, SLOPE_CSV, *FAMILY_CSVS, MONO_CSV, STUDY_CSV):
        assert path.is_file(), f"missing committed reference table {path}"


def test_theta1_value():
    assert theta1(2.0, 0.5) == pytest.approx(0.25)
    assert -3.0 * theta1(2.0, 0.5) == pytest.approx(-0.75)


# -- smoothing decay figure --------------------------------------------------


def test_smoothing_slope_annotation_within_tolerance(tmp_path):
    out = tmp_path / "smoothing.png"
    ann = plot_smoothing(FigureSpec((str(SLOPE_CSV),), "smoothing_decay", str(out)))
    assert out.is_file() and out.stat().st_size > 0
    assert ann["target_slope"] == pytest.approx(-0.75)
    # fitted decay slope of the narrow-datum run agrees with the theoretical
    # exponent to better than 5 percent
    assert ann["fitted_slope"] == pytest.approx(-0.75, rel=0.05)
    # frozen regression value for this committed table
    assert ann["fitted_slope"] == pytest.approx(-0.759882, rel=1e-3)


def test_smoothing_family_collapse(tmp_path):
    out = tmp_path / "family.png"
    ann = plot_smoothing(
        FigureSpec(tuple(str(p) for p in FAMILY_CSVS), "smoothing_decay", str(out))
    )
    assert out.is_file()
    assert ann["n_curves"] == 3
    assert ann["q_spread"] <= 3.0
    assert ann["q_spread"] == pytest.approx(1.525985, rel=1e-3)


def test_smoothing_missing_sup_norm_column(tmp_path):
    bad = tmp_path / "trajectory.csv"
    bad.write_text("t,l1,l2\n0.0,1.0,1.0\n0.1,0.9,0.8\n", encoding="utf-8")
    with pytest.raises(InputFormatError, match="linf"):
        plot_smoothing(FigureSpec((str(bad),), "smoothing_decay", str(tmp_path / "x.png")))


def test_smoothing_needs_two_positive_times(tmp_path):
    run = tmp_path / "run"
    run.mkdir()
    bad = run / "trajectory.csv"
    lines = SLOPE_CSV.read_text(encoding="utf-8").splitlines()
    bad.write_text("\n".join(lines[:3]) + "\n", encoding="utf-8")
    shutil.copy(SLOPE_CSV.parent / "meta.json", run / "meta.json")
    with pytest.raises(InputFormatError, match="positive-time"):
        plot_smoothing(FigureSpec((str(bad),), "smoothing_decay", str(tmp_path / "x.png")))


# -- kernel figure -----------------------------------------------------------


def test_green_two_regime_figure(tmp_path):
    out = tmp_path / "green.png"
    ann = plot_green(FigureSpec((str(GREEN_CSV),), "green_asymptotics", str(out)))
    assert out.is_file() and out.stat().st_size > 0
    assert ann["near_target"] == pytest.approx(-2.0)
    assert ann["far_target"] == pytest.approx(-2.0)
    # the two fitted regimes match the algebraic pole and the exponential tail
    assert ann["near_exponent"] == pytest.approx(-2.0, abs=0.02)
    assert ann["far_rate"] == pytest.approx(-2.0, rel=0.02)


def test_green_header_mismatch_names_expected_columns(tmp_path):
    with pytest.raises(InputFormatError, match="r,G,quad_err"):
        plot_green(FigureSpec((str(SLOPE_CSV),), "green_asymptotics", str(tmp_path / "x.png")))


def test_green_empty_file(tmp_path):
    empty = tmp_path / "green.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(InputFormatError, match="empty"):
        plot_green(FigureSpec((str(empty),), "green_asymptotics", str(tmp_path / "x.png")))


# -- monotonicity figure -----------------------------------------------------


def test_monotonicity_figure_no_increases(tmp_path):
    out = tmp_path / "mono.png"
    ann = plot_monotonicity(FigureSpec((str(MONO_CSV),), "monotonicity", str(out)))
    assert out.is_file()
    assert ann["max_increase_l1"] == 0.0
    assert ann["max_increase_l1_phi1"] == 0.0
    assert ann["max_increase_l1_phiW"] == 0.0


# -- sweep figure ------------------------------------------------------------


def test_sweep_per_cell_slope_annotations(tmp_path):
    out = tmp_path / "study.png"
    ann = plot_sweep(FigureSpec((str(STUDY_CSV),), "sweep_summary", str(out)))
    assert out.is_file()
    assert ann["n_cells"] == 2
    assert ann["all_passed"] is True
    assert set(ann["slopes"]) == {"m2_s0.25_mass1", "m2_s0.75_mass1"}
    for combo, slope in ann["slopes"].items():
        target = ann["slope_targets"][combo]
        assert slope == pytest.approx(target, rel=0.05), combo
    assert ann["slopes"]["m2_s0.25_mass1"] == pytest.approx(-0.860570, rel=1e-3)
    assert ann["slopes"]["m2_s0.75_mass1"] == pytest.approx(-0.674021, rel=1e-3)
    assert ann["slope_targets"]["m2_s0.25_mass1"] == pytest.approx(-3.0 / 3.5)
    assert ann["slope_targets"]["m2_s0.75_mass1"] == pytest.approx(-3.0 / 4.5)


def test_sweep_eight_cells(tmp_path):
    rows = []
    for m in (1.5, 2.0):
        for s in (0.2, 0.4, 0.6, 0.8):
            rows.append(f"{m},{s},1,1.1,1.2,1.3,true")
    table = tmp_path / "sweep_summary.csv"
    table.write_text(SWEEP_HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    ann = plot_sweep(FigureSpec((str(table),), "sweep_summary", str(tmp_path / "s.png")))
    assert ann["n_cells"] == 8
    assert ann["all_passed"] is True
    assert ann["slopes"] == {}


def test_sweep_failed_cells_marked(tmp_path):
    table = tmp_path / "sweep_summary.csv"
    table.write_text(
        SWEEP_HEADER + "\n2,0.5,1,1.1,1.2,1.3,true\n2,0.75,1,nan,nan,nan,false\n",
        encoding="utf-8",
    )
    ann = plot_sweep(FigureSpec((str(table),), "sweep_summary", str(tmp_path / "s.png")))
    assert ann["n_cells"] == 2
    assert ann["all_passed"] is False


def test_sweep_bad_boolean(tmp_path):
    table = tmp_path / "sweep_summary.csv"
    table.write_text(SWEEP_HEADER + "\n2,0.5,1,1.1,1.2,1.3,maybe\n", encoding="utf-8")
    with pytest.raises(InputFormatError, match="boolean"):
        plot_sweep(FigureSpec((str(table),), "sweep_summary", str(tmp_path / "s.png")))


# -- input validation --------------------------------------------------------


def test_spec_rejects_unknown_kind():
    with pytest.raises(ValueError, match="unknown figure kind"):
        FigureSpec((str(GREEN_CSV),), "histogram", "/tmp/x.png")
    assert "histogram" not in FIGURE_KINDS


def test_spec_rejects_empty_inputs():
    with pytest.raises(ValueError, match="at least one input"):
        FigureSpec((), "monotonicity", "/tmp/x.png")


def test_spec_rejects_missing_file(tmp_path):
    with pytest.raises(InputFormatError, match="does not exist"):
        FigureSpec((str(tmp_path / "nope.csv"),), "monotonicity", "/tmp/x.png")


def test_ragged_row_rejected(tmp_path):
    bad = tmp_path / "trajectory.csv"
    bad.write_text(TRAJECTORY_HEADER + "\n1,2,3\n", encoding="utf-8")
    with pytest.raises(InputFormatError, match="fields"):
        plot_monotonicity(FigureSpec((str(bad),), "monotonicity", str(tmp_path / "x.png")))


def test_missing_meta_record(tmp_path):
    orphan = tmp_path / "trajectory.csv"
    shutil.copy(SLOPE_CSV, orphan)
    with pytest.raises(InputFormatError, match="meta.json"):
        plot_smoothing(FigureSpec((str(orphan),), "smoothing_decay", str(tmp_path / "x.png")))


def test_corrupt_meta_record(tmp_path):
    run = tmp_path / "run"
    run.mkdir()
    shutil.copy(SLOPE_CSV, run / "trajectory.csv")
    (run / "meta.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(InputFormatError, match="not valid JSON"):
        plot_smoothing(
            FigureSpec((str(run / "trajectory.csv"),), "smoothing_decay", str(tmp_path / "x.png"))
        )


def test_headers_match_solver_contract():
    assert GREEN_CSV.read_text(encoding="utf-8").splitlines()[0] == GREEN_HEADER
    assert SLOPE_CSV.read_text(encoding="utf-8").splitlines()[0] == TRAJECTORY_HEADER
    assert STUDY_CSV.read_text(encoding="utf-8").splitlines()[0] == SWEEP_HEADER


# -- determinism -------------------------------------------------------------


@pytest.mark.parametrize(
    "kind,inputs",
    [
        ("green_asymptotics", (GREEN_CSV,)),
        ("smoothing_decay", (SLOPE_CSV,)),
        ("sweep_summary", (STUDY_CSV,)),
    ],
)
def test_double_render_is_byte_identical(tmp_path, kind, inputs):
    paths = tuple(str(p) for p in inputs)
    out_a, out_b = tmp_path / "a.png", tmp_path / "b.png"
    make_figure(FigureSpec(paths, kind, str(out_a)))
    make_figure(FigureSpec(paths, kind, str(out_b)))
    assert out_a.read_bytes() == out_b.read_bytes()


# -- command line ------------------------------------------------------------


def test_cli_renders_figure(tmp_path, capsys):
    out = tmp_path / "green.png"
    code = main(["--input", str(GREEN_CSV), "--kind", "green_asymptotics",
                 "--output", str(out)])
    assert code == 0
    assert out.is_file()
    captured = capsys.readouterr()
    assert f"wrote {out}" in captured.out
    assert "near_exponent" in captured.out


def test_cli_repeated_inputs(tmp_path):
    out = tmp_path / "family.png"
    argv = []
    for p in FAMILY_CSVS:
        argv += ["--input", str(p)]
    code = main(argv + ["--kind", "smoothing_decay", "--output", str(out)])
    assert code == 0
    assert out.is_file()


def test_cli_bad_data_exits_one(tmp_path, capsys):
    code = main(["--input", str(SLOPE_CSV), "--kind", "green_asymptotics",
                 "--output", str(tmp_path / "x.png")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_cli_missing_file_exits_one(tmp_path, capsys):
    code = main(["--input", str(tmp_path / "ghost.csv"), "--kind", "monotonicity",
                 "--output", str(tmp_path / "x.png")])
    assert code == 1
    assert "does not exist" in capsys.readouterr().err


def test_cli_unknown_kind_exits_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["--input", str(GREEN_CSV), "--kind", "pie", "--output", "x.png"])
    assert exc.value.code == 2


def test_cli_requires_arguments():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
