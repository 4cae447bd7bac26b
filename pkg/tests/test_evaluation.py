import numpy as np
import pytest

from hashfactor.evaluation import (
    CSV_HEADER,
    ExperimentReport,
    ReportRow,
    evaluate_cell,
    heldout_size,
    make_split,
    mask_dataset,
    plot_report_svg,
    rmse,
    run_experiment,
)
from hashfactor.factorization import TrainConfig
from hashfactor.ingest import InteractionDataset, UserHashtagMatrix, build_matrices

FAST = TrainConfig(max_iters=30)


class TestSplit:
    @pytest.mark.parametrize("n,f,expected", [(10, 0.3, 3), (5, 0.1, 1), (5, 0.5, 3), (1000, 0.25, 250)])
    def test_heldout_size(self, n, f, expected):
        assert heldout_size(n, f) == expected

    def test_partition(self, small_matrices):
        X, _ = small_matrices
        split = make_split(X, 0.3, 7)
        assert len(split) == heldout_size(X.nnz, 0.3)
        held = set(split.heldout)
        kept = set(split.masked_X.entries())
        assert not held & kept
        assert held | kept == set(X.entries())

    def test_seeded(self, small_matrices):
        X, _ = small_matrices
        a, b = make_split(X, 0.2, 1), make_split(X, 0.2, 1)
        assert a.heldout == b.heldout
        assert a.heldout != make_split(X, 0.2, 2).heldout

    @pytest.mark.parametrize("f", [0.0, 1.0, -0.1])
    def test_bad_fraction(self, small_matrices, f):
        with pytest.raises(ValueError):
            make_split(small_matrices[0], f, 0)

    def test_empty_matrix(self):
        with pytest.raises(ValueError):
            make_split(UserHashtagMatrix.from_entries(2, 2, []), 0.5, 0)


class TestRmse:
    def test_example(self):
        assert rmse([0.0, 1.0], [1.0, 1.0]) == pytest.approx(np.sqrt(0.5))

    def test_perfect(self):
        assert rmse([1.0] * 4, [1.0] * 4) == 0.0

    def test_errors(self):
        with pytest.raises(ValueError):
            rmse([], [])
        with pytest.raises(ValueError):
            rmse([1.0], [1.0, 1.0])


class TestMaskDataset:
    def test_drops_held_out_adoptions(self):
        d = InteractionDataset(("a", "b"), ("x", "y", "z"), ((0, (0, 1)), (0, (1,)), (1, (1, 2))))
        masked = mask_dataset(d, [(0, 1)])
        assert masked.tweets == ((0, (0,)), (1, (1, 2)))
        X, _ = build_matrices(masked)
        assert (0, 1) not in set(X.entries())


class TestReport:
    def rows(self):
        return [ReportRow("mf", 0.3, 10, 1, 0.2, 1.5), ReportRow("hwmf", 0.3, 10, 0, 0.1, 0.5),
                ReportRow("hwmf", 0.3, 10, 1, 0.3, 0.7)]

    def test_csv_sorted(self):
        csv = ExperimentReport(self.rows()).to_csv().splitlines()
        assert csv[0] == CSV_HEADER
        assert [line.split(",")[0] for line in csv[1:]] == ["hwmf", "hwmf", "mf"]

    def test_csv_without_timing(self):
        csv = ExperimentReport(self.rows()).to_csv(timing=False)
        assert all(line.endswith(",0") for line in csv.splitlines()[1:])

    def test_summary(self):
        s = ExperimentReport(self.rows()).summary()
        mean, std, n = s[("hwmf", 0.3, 10)]
        assert (mean, n) == (pytest.approx(0.2), 2)
        assert std == pytest.approx(np.std([0.1, 0.3], ddof=1))


class TestExperiment:
    def test_grid_size(self, small_corpus):
        report = run_experiment(small_corpus, ["hwmf"], [0.1, 0.3, 0.5], [3], [0, 1, 2, 3, 4], FAST)
        assert len(report.rows) == 15 and not report.failures

    def test_all_methods(self, small_corpus):
        report = run_experiment(small_corpus, ["hwmf", "mf", "knn", "random"], [0.3], [3], [0], FAST)
        assert {r.method for r in report.rows} == {"hwmf", "mf", "knn", "random"}
        assert all(np.isfinite(r.rmse) for r in report.rows)

    def test_deterministic_rmse(self, small_corpus):
        a = run_experiment(small_corpus, ["hwmf", "random"], [0.2], [3], [0, 1], FAST)
        b = run_experiment(small_corpus, ["hwmf", "random"], [0.2], [3], [0, 1], FAST)
        assert a.to_csv(timing=False) == b.to_csv(timing=False)

    def test_parallel_matches_serial(self, small_corpus):
        a = run_experiment(small_corpus, ["mf"], [0.2], [2, 3], [0], FAST)
        b = run_experiment(small_corpus, ["mf"], [0.2], [2, 3], [0], FAST, workers=2)
        assert a.to_csv(timing=False) == b.to_csv(timing=False)

    def test_failed_cell_recorded(self, small_corpus):
        X, _ = build_matrices(small_corpus)
        too_big = min(X.shape) + 1
        report = run_experiment(small_corpus, ["mf"], [0.2], [2, too_big], [0], FAST)
        assert len(report.rows) == 1 and len(report.failures) == 1
        assert report.failures[0][2] == too_big

    def test_strict_mask_changes_hwmf(self, small_corpus):
        loose = evaluate_cell(small_corpus, "hwmf", 0.3, 3, 0, FAST)
        strict = evaluate_cell(small_corpus, "hwmf", 0.3, 3, 0, FAST, strict_y_mask=True)
        assert loose.rmse != strict.rmse

    def test_unknown_method(self, small_corpus):
        with pytest.raises(ValueError):
            run_experiment(small_corpus, ["svd"])
        with pytest.raises(ValueError):
            run_experiment(small_corpus, ["mf"], fractions=[])


def test_svg_deterministic(tmp_path, small_corpus):
    pytest.importorskip("matplotlib")
    report = run_experiment(small_corpus, ["mf", "random"], [0.2, 0.4], [2], [0], FAST)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_report_svg(report, a)
    plot_report_svg(report, b)
    assert a.read_bytes() == b.read_bytes()
    assert b"<svg" in a.read_bytes()
