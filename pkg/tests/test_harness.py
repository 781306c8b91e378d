import numpy as np
import pytest

from conftest import make_clusters, make_separated_clusters, small_config
from gpembed.dataset import from_arrays
from gpembed.evolution import EvolutionConfig, GenerationStats, RunResult, run
from gpembed.expr import Individual, parse
from gpembed.harness import fold_assignment, knn_cv_accuracy, report, summary_stats
from oracles import brute_census


class TestKnn:
    def test_separable_clusters_are_perfect(self):
        X, labels = make_separated_clusters(100, 3, 2, seed=1, sigma=1.0, separation=10.0)
        ds = from_arrays(X, labels=labels)
        mean, std = knn_cv_accuracy(ds.instances, ds.labels, k=5, folds=10,
                                    rng=np.random.default_rng(0))
        assert mean == 1.0
        assert std == 0.0

    def test_random_labels_score_at_chance(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(200, 4))
        labels = rng.integers(0, 2, size=200)
        means = []
        for seed in range(10):
            mean, _ = knn_cv_accuracy(X, labels, k=5, folds=10,
                                      rng=np.random.default_rng(seed))
            means.append(mean)
        assert 0.4 <= float(np.mean(means)) <= 0.6

    def test_k_of_n_minus_one_votes_globally(self):
        # balanced 2-class set: majority over (almost) all points always ties,
        # and ties break to the smallest class id, so accuracy is exactly 0.5
        rng = np.random.default_rng(3)
        X = rng.normal(size=(20, 2))
        labels = np.array([0, 1] * 10)
        mean, _ = knn_cv_accuracy(X, labels, k=19, folds=10, rng=np.random.default_rng(1))
        assert mean == 0.5

    def test_scaling_invariance(self):
        X, labels = make_clusters(30, 3, 3, seed=5, spread=2.0, separation=6.0)
        ds = from_arrays(X, labels=labels)
        a = knn_cv_accuracy(ds.instances, ds.labels, rng=np.random.default_rng(4))
        b = knn_cv_accuracy(ds.instances * 1000.0, ds.labels, rng=np.random.default_rng(4))
        assert a == b

    def test_missing_labels_rejected(self):
        with pytest.raises(ValueError, match="labels"):
            knn_cv_accuracy(np.zeros((10, 2)), None)

    def test_too_few_instances(self):
        with pytest.raises(ValueError, match="10-fold"):
            knn_cv_accuracy(np.zeros((5, 2)), np.zeros(5, dtype=int), folds=10)

    def test_small_class_falls_back_with_warning(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(30, 2))
        labels = np.array([0] * 27 + [1] * 3)
        with pytest.warns(UserWarning, match="non-stratified"):
            mean, std = knn_cv_accuracy(X, labels, k=3, folds=10,
                                        rng=np.random.default_rng(0))
        assert 0.0 <= mean <= 1.0


class TestFoldAssignment:
    def test_partition_is_exact(self):
        labels = np.array([0, 1] * 25)
        assignment = fold_assignment(labels, 10, np.random.default_rng(0))
        assert assignment.shape == (50,)
        assert int((assignment >= 0).sum()) == 50
        # every instance lands in exactly one fold; per-class counts are
        # as even as 25 over 10 folds allows
        for f in range(10):
            for c in (0, 1):
                count = int(((assignment == f) & (labels == c)).sum())
                assert count in (2, 3)
        assert sum(int((assignment == f).sum()) for f in range(10)) == 50

    def test_stratification_balances_classes(self):
        labels = np.array([0] * 40 + [1] * 20)
        assignment = fold_assignment(labels, 10, np.random.default_rng(1))
        for f in range(10):
            fold_labels = labels[assignment == f]
            assert int((fold_labels == 0).sum()) == 4
            assert int((fold_labels == 1).sum()) == 2

    def test_seeded_reproducibility(self):
        labels = np.array([0, 1, 2] * 20)
        a = fold_assignment(labels, 10, np.random.default_rng(9))
        b = fold_assignment(labels, 10, np.random.default_rng(9))
        assert np.array_equal(a, b)


class TestSummaryStats:
    def test_two_add_trees(self):
        ind = Individual(trees=(parse("(add f0 f1)"), parse("(add f0 f1)")))
        stats = summary_stats(ind)
        assert stats.n_nodes == 6
        assert stats.n_sum == 2
        assert stats.n_prod == 0
        assert stats.n_exp == 0
        assert stats.n_leaf == 4
        assert stats.n_unique_features == 2

    def test_single_sigmoid(self):
        stats = summary_stats(Individual(trees=(parse("(sigmoid f3)"),)))
        assert (stats.n_exp, stats.n_leaf, stats.n_unique_features) == (1, 1, 1)

    def test_counts_sum_to_total(self):
        ind = Individual(
            trees=(parse("(mul (add f0 f1) (relu f2))"), parse("(pdiv f3 (max f1 f4))"))
        )
        stats = summary_stats(ind)
        assert stats.n_nodes == stats.n_exp + stats.n_prod + stats.n_sum + stats.n_leaf

    def test_matches_census_oracle(self):
        from gpembed.evolution import initialise

        rng = np.random.default_rng(11)
        ds = from_arrays(rng.normal(size=(10, 8)))
        from gpembed.complexity import DEFAULT_COST_MODEL

        for ind in initialise(small_config(population_size=10, seed=0), ds, rng):
            stats = summary_stats(ind)
            total, n_exp, n_prod, n_sum, n_leaf, n_feat = brute_census(ind, DEFAULT_COST_MODEL)
            assert (
                stats.n_nodes,
                stats.n_exp,
                stats.n_prod,
                stats.n_sum,
                stats.n_leaf,
                stats.n_unique_features,
            ) == (total, n_exp, n_prod, n_sum, n_leaf, n_feat)


@pytest.fixture
def finished_run():
    X, labels = make_clusters(20, 6, 2, seed=4)
    ds = from_arrays(X, labels=labels)
    config = EvolutionConfig(generations=5, population_size=8, moead_neighbourhood=4, seed=1)
    return ds, config, run(ds, config)


class TestReport:
    def test_report_files_and_schema(self, finished_run, tmp_path):
        ds, config, result = finished_run
        out = tmp_path / "out"
        records = report(result, ds, config, out)
        front = (out / "front.csv").read_text().splitlines()
        assert front[0] == (
            "id,cost,complexity,n_trees,n_nodes,n_exp,n_prod,n_sum,n_leaf,"
            "n_unique_feat,knn_acc_mean,knn_acc_std"
        )
        assert len(front) == len(result.archive) + 1
        complexities = [float(line.split(",")[2]) for line in front[1:]]
        assert complexities == sorted(complexities)
        telemetry = (out / "telemetry.csv").read_text().splitlines()
        assert telemetry[0] == "generation,min_cost,min_complexity,archive_size"
        assert len(telemetry) == config.generations + 2
        assert (out / "final_front.csv").exists()
        assert (out / "summary.csv").exists()
        assert (out / "baseline.csv").read_text().splitlines()[0] == "knn_acc_mean,knn_acc_std"
        for rec in records:
            assert (out / "trees" / f"{rec.entry_id}.sexp").exists()
            assert (out / "trees" / f"{rec.entry_id}.dot").exists()

    def test_rerun_is_byte_identical(self, finished_run, tmp_path):
        ds, config, result = finished_run
        report(result, ds, config, tmp_path / "a")
        report(result, ds, config, tmp_path / "b")
        for name in ("front.csv", "final_front.csv", "summary.csv", "telemetry.csv", "baseline.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_empty_archive_writes_headers_only(self, tmp_path):
        X, labels = make_clusters(10, 4, 2, seed=8)
        ds = from_arrays(X, labels=labels)
        config = EvolutionConfig(generations=0, population_size=8, moead_neighbourhood=4, seed=0)
        result = RunResult(
            archive=[],
            final_front=[],
            telemetry=[GenerationStats(0, 0.0, 0.0, 0)],
        )
        report(result, ds, config, tmp_path / "empty")
        front = (tmp_path / "empty" / "front.csv").read_text().splitlines()
        assert len(front) == 1

    def test_sexp_files_round_trip(self, finished_run, tmp_path):
        ds, config, result = finished_run
        records = report(result, ds, config, tmp_path / "rt")
        from gpembed.harness import sorted_entries

        entries = sorted_entries(result.archive)
        for rec, entry in zip(records, entries):
            lines = (tmp_path / "rt" / "trees" / f"{rec.entry_id}.sexp").read_text().split()
            parsed = tuple(parse(line) for line in
                           (tmp_path / "rt" / "trees" / f"{rec.entry_id}.sexp").read_text().splitlines())
            assert tuple(t for t in parsed) == entry.individual.trees

    def test_accuracy_in_unit_interval(self, finished_run, tmp_path):
        ds, config, result = finished_run
        records = report(result, ds, config, tmp_path / "acc")
        for rec in records:
            assert 0.0 <= rec.knn_acc_mean <= 1.0
            assert rec.knn_acc_std >= 0.0
