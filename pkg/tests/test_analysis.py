import numpy as np
import pytest
import scipy.stats

from eegselect.analysis import (
    CandidateResult,
    RunResult,
    anova_oneway,
    choose_final_subset,
    choose_final_subset_index,
    selection_frequency,
    write_selection_frequency_csv,
    write_topomap_svg,
)
from eegselect.montage import builtin_montage


def mask_of(n, bits):
    m = np.zeros(n, dtype=bool)
    m[list(bits)] = True
    return m


class TestChooseFinalSubset:
    REFS = (0, 1)  # pretend channels 0/1 are C3/C4

    def test_reference_rule_beats_raw_accuracy(self):
        candidates = [(mask_of(6, [0, 3]), 0.80), (mask_of(6, [2, 3]), 0.90)]
        chosen = choose_final_subset(candidates, self.REFS)
        assert np.array_equal(chosen, candidates[0][0])

    def test_fallback_to_global_best(self):
        candidates = [(mask_of(6, [2, 3]), 0.70), (mask_of(6, [4, 5]), 0.85)]
        assert choose_final_subset_index(candidates, self.REFS) == 1

    def test_tie_prefers_smaller_subset(self):
        candidates = [
            (mask_of(16, range(12)), 0.85),
            (mask_of(16, range(9)), 0.85),
        ]
        assert choose_final_subset_index(candidates, (0,)) == 1

    def test_tie_then_lowest_index(self):
        candidates = [(mask_of(4, [0, 2]), 0.85), (mask_of(4, [0, 3]), 0.85)]
        assert choose_final_subset_index(candidates, (0,)) == 0

    def test_result_is_member(self):
        candidates = [(mask_of(4, [1]), 0.5), (mask_of(4, [0]), 0.6)]
        chosen = choose_final_subset(candidates, (0, 1))
        assert any(np.array_equal(chosen, m) for m, _ in candidates)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            choose_final_subset_index([], (0,))


def run_result(montage, names, subject="s1", algorithm="nsga2"):
    mask = np.zeros(montage.n_channels, dtype=bool)
    for n in names:
        mask[montage.index(n)] = True
    cand = CandidateResult(mask, 0.7, 0.8, (-1.0, -2.0))
    return RunResult(subject, algorithm, 0, (cand,), 0)


class TestSelectionFrequency:
    def test_counts_chosen_subsets(self):
        montage = builtin_montage("bciiv2a22")
        results = [run_result(montage, ["C3", "C4"], subject=f"s{i}") for i in range(3)]
        counts = selection_frequency(results, montage)
        assert counts[montage.index("C3")] == 3
        assert counts[montage.index("C4")] == 3
        assert counts.sum() == 6

    def test_empty_results(self):
        montage = builtin_montage("bciiv2a22")
        counts = selection_frequency([], montage)
        assert counts.sum() == 0

    def test_counting_identity(self):
        montage = builtin_montage("bciiv2a22")
        results = [
            run_result(montage, ["C3"]),
            run_result(montage, ["C3", "C4", "Cz"]),
        ]
        counts = selection_frequency(results, montage)
        assert counts.sum() == sum(r.pr for r in results)

    def test_csv_and_svg_emission(self, tmp_path):
        montage = builtin_montage("bciiv2a22")
        counts = selection_frequency([run_result(montage, ["C3", "Cz"])], montage)
        csv_path = tmp_path / "freq.csv"
        svg_path = tmp_path / "topo.svg"
        write_selection_frequency_csv(counts, montage, csv_path)
        write_topomap_svg(counts, montage, svg_path)
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "channel,count"
        assert f"C3,1" in lines
        svg = svg_path.read_text()
        assert svg.startswith("<svg") and "C3" in svg


class TestAnova:
    def test_identical_groups(self):
        g = [1.0, 2.0, 3.0]
        f_stat, p = anova_oneway([g, list(g), list(g)])
        assert f_stat == 0.0
        assert p == 1.0

    def test_extreme_separation(self):
        rng = np.random.default_rng(0)
        a = 0.0 + 1e-6 * rng.standard_normal(5)
        b = 1.0 + 1e-6 * rng.standard_normal(5)
        _, p = anova_oneway([a, b])
        assert p < 0.001

    def test_matches_scipy(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            groups = [rng.normal(rng.random(), 1.0, size=rng.integers(3, 20)) for _ in range(3)]
            f_stat, p = anova_oneway(groups)
            ref = scipy.stats.f_oneway(*groups)
            assert f_stat == pytest.approx(ref.statistic, rel=1e-10)
            assert p == pytest.approx(ref.pvalue, rel=1e-9)

    def test_translation_invariance(self):
        rng = np.random.default_rng(1)
        groups = [rng.standard_normal(10) for _ in range(3)]
        f0, _ = anova_oneway(groups)
        f1, _ = anova_oneway([g + 123.456 for g in groups])
        assert f1 == pytest.approx(f0, rel=1e-9)

    def test_quick_null_calibration(self):
        rng = np.random.default_rng(7)
        rejections = 0
        reps = 300
        for _ in range(reps):
            groups = [rng.standard_normal(20) for _ in range(3)]
            _, p = anova_oneway(groups)
            rejections += p < 0.05
        assert 0.02 <= rejections / reps <= 0.09

    def test_validation_errors(self):
        with pytest.raises(ValueError, match="2 groups"):
            anova_oneway([[1.0, 2.0]])
        with pytest.raises(ValueError, match="2 observations"):
            anova_oneway([[1.0], [2.0, 3.0]])
        with pytest.raises(ValueError, match="zero within-group"):
            anova_oneway([[1.0, 1.0], [2.0, 2.0]])

    def test_f_nonnegative_p_in_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            groups = [rng.standard_normal(6) for _ in range(4)]
            f_stat, p = anova_oneway(groups)
            assert f_stat >= 0
            assert 0 < p <= 1
