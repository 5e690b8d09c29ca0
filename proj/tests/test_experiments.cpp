#include "sensel/experiments.hpp"

#include <cmath>

#include "sensel/errors.hpp"
#include "test_util.hpp"

using namespace sensel;

namespace {

void test_config_parsing() {
    const std::string text = R"({
        "m": 12, "n": 3, "k_s": 6, "N": 2, "sigma_corr": 0.2,
        "num_correlated_pairs": 3, "trials": 5, "master_seed": 99,
        "strategies": ["centralized", "decentralized", "fdm", "lpm"],
        "n_sweep": [0, 1, 2],
        "solver": {"max_outer_stages": 10}
    })";
    ExperimentConfig cfg = ExperimentConfig::from_json_string(text);
    REQUIRE(cfg.m == 12 && cfg.n == 3 && cfg.k_s == 6 && cfg.n_shared == 2, "fields");
    REQUIRE(cfg.master_seed == 99 && cfg.trials == 5, "seed and trials");
    REQUIRE(cfg.solver.max_outer_stages == 10, "solver override");
    REQUIRE(cfg.n_sweep == (std::vector<int>{0, 1, 2}), "sweep list");

    REQUIRE_THROWS(ExperimentConfig::from_json_string(R"({"budget": 4})"), InvalidArgument,
                   "unknown key rejected");
    REQUIRE_THROWS(ExperimentConfig::from_json_string(R"({"m": 13})"), InvalidArgument,
                   "odd m rejected");
    REQUIRE_THROWS(ExperimentConfig::from_json_string(R"({"m": 12, "n": 3, "k_s": 5})"),
                   InvalidArgument, "odd k rejected");
    // Defaults echo back through the effective-config rendering.
    ExperimentConfig defaults;
    const std::string echoed = defaults.to_json_string();
    REQUIRE(echoed.find("\"m\":100") != std::string::npos &&
                echoed.find("\"N\":5") != std::string::npos,
            "defaults echoed");
    testutil::pass("config parsing");
}

void test_generator_sigma_zero() {
    ExperimentConfig cfg;
    cfg.m = 20;
    cfg.n = 4;
    cfg.k_s = 8;
    cfg.sigma_corr = 0.0;
    cfg.num_correlated_pairs = 5;
    std::vector<std::pair<int, int>> pairs;
    Partition p = generate_instance(cfg, 31337, &pairs);
    REQUIRE(pairs.size() == 5, "five modified pairs");
    for (const auto& [i, j] : pairs) {
        REQUIRE((p.a1.rows().row(i) - p.a2.rows().row(j)).cwiseAbs().maxCoeff() == 0.0,
                "sigma = 0 copies b into both rows");
    }
    // Distinctness of the modified rows on each side.
    for (std::size_t a = 0; a < pairs.size(); ++a) {
        for (std::size_t b = a + 1; b < pairs.size(); ++b) {
            REQUIRE(pairs[a].first != pairs[b].first && pairs[a].second != pairs[b].second,
                    "rows drawn without replacement");
        }
    }
    testutil::pass("generator sigma = 0");
}

void test_generator_sigma_one() {
    ExperimentConfig cfg;  // m=100, n=40, 15 pairs
    cfg.sigma_corr = 1.0;
    double total = 0.0;
    int count = 0;
    std::vector<std::pair<int, int>> pairs;
    for (std::uint64_t seed = 0; count < 1000; ++seed) {
        Partition p = generate_instance(cfg, 50000 + seed, &pairs);
        for (const auto& [i, j] : pairs) {
            const double ip = p.a1.rows().row(i).dot(p.a2.rows().row(j)) /
                              (p.a1.rows().row(i).norm() * p.a2.rows().row(j).norm());
            total += ip;
            if (++count == 1000) break;
        }
    }
    REQUIRE(std::abs(total / 1000.0) < 0.1,
            "sigma = 1 rows are uncorrelated, mean " << total / 1000.0);
    testutil::pass("generator sigma = 1");
}

void test_generator_moment() {
    // E[a_1i^T a_2j] = (1 - sigma^2) n = 39.6 at the defaults; the variance
    // of one inner product is (1-s^2)^2*2n + 2(1-s^2)s^2*n + s^4*n.
    ExperimentConfig cfg;
    const double s2 = cfg.sigma_corr * cfg.sigma_corr;
    const double expected = (1.0 - s2) * cfg.n;
    const double variance = (1.0 - s2) * (1.0 - s2) * 2.0 * cfg.n +
                            2.0 * (1.0 - s2) * s2 * cfg.n + s2 * s2 * cfg.n;
    const int wanted_pairs = 10000;
    const double standard_error = std::sqrt(variance / wanted_pairs);

    double total = 0.0;
    int count = 0;
    std::vector<std::pair<int, int>> pairs;
    for (std::uint64_t seed = 0; count < wanted_pairs; ++seed) {
        Partition p = generate_instance(cfg, 90000 + seed, &pairs);
        for (const auto& [i, j] : pairs) {
            total += p.a1.rows().row(i).dot(p.a2.rows().row(j));
            if (++count == wanted_pairs) break;
        }
    }
    const double mean = total / wanted_pairs;
    REQUIRE(std::abs(mean - expected) < 3.0 * standard_error,
            "pair moment: mean " << mean << " expected " << expected << " 3se "
                                 << 3.0 * standard_error);
    testutil::pass("generator correlation moment");
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.m = 12;
    cfg.n = 3;
    cfg.k_s = 6;
    cfg.n_shared = 2;
    cfg.num_correlated_pairs = 3;
    cfg.trials = 6;
    cfg.master_seed = 7;
    return cfg;
}

void test_run_trials_determinism() {
    ExperimentConfig cfg = small_config();
    cfg.trials = 1;
    TrialStats first = run_trials(cfg);
    TrialStats second = run_trials(cfg);
    REQUIRE(trials_to_csv(first) == trials_to_csv(second), "per-trial CSV identical");
    REQUIRE(summary_to_csv(first) == summary_to_csv(second), "summary CSV identical");

    ExperimentConfig more = small_config();
    TrialStats seq = run_trials(more, 1);
    TrialStats par = run_trials(more, 3);
    REQUIRE(trials_to_csv(seq) == trials_to_csv(par), "job count does not change results");
    REQUIRE(summary_to_csv(seq) == summary_to_csv(par), "summaries match across jobs");

    // Aggregate means are recomputable from the records.
    for (const auto& agg : seq.aggregates) {
        double total = 0.0;
        int count = 0;
        for (const auto& record : seq.records) {
            if (record.strategy == agg.strategy && record.n_shared == agg.n_shared &&
                record.status == "ok") {
                total += record.gap_rel_percent;
                ++count;
            }
        }
        REQUIRE(count == agg.trials_ok, "ok counts agree");
        if (count > 0) {
            testutil::require_close(total / count, agg.mean_gap, 1e-12,
                                    "mean recomputable from records");
        }
    }
    testutil::pass("run_trials determinism");
}

void test_run_trials_enumeration() {
    ExperimentConfig cfg = small_config();
    cfg.trials = 20;
    TrialStats stats = run_trials(cfg, 2);
    REQUIRE(stats.bound_violations == 0, "no bound violations");

    // Every recorded L sits below the enumerated Boolean optimum, which
    // sits below U_cen.
    for (int t = 0; t < cfg.trials; ++t) {
        Partition instance = generate_instance(cfg, trial_seed(cfg.master_seed, t));
        Eigen::MatrixXd full(cfg.m, cfg.n);
        full << instance.a1.rows(), instance.a2.rows();
        const double best = testutil::boolean_optimum(full, cfg.k_s);
        for (const auto& record : stats.records) {
            if (record.trial != t || record.status != "ok") continue;
            REQUIRE(record.lower <= best + 1e-9,
                    "L below Boolean optimum at trial " << t);
            REQUIRE(best <= record.u_cen + 1e-6, "Boolean optimum below U_cen");
        }
    }
    testutil::pass("run_trials enumeration oracle");
}

void test_sweep() {
    ExperimentConfig cfg = small_config();
    TrialStats sweep = sweep_shared_vectors(cfg, {0, 2}, 2);

    // The N = 0 fdm/lpm columns equal the naive column exactly.
    const auto find_agg = [&](Strategy s, int n_value) -> const StrategyAggregate& {
        for (const auto& agg : sweep.aggregates) {
            if (agg.strategy == s && agg.n_shared == n_value) return agg;
        }
        std::cerr << "[FAIL] aggregate not found\n";
        std::exit(1);
    };
    const auto& naive0 = find_agg(Strategy::NaiveDecentralized, 0);
    const auto& fdm0 = find_agg(Strategy::FocusedDiversity, 0);
    const auto& lpm0 = find_agg(Strategy::LinearPenalty, 0);
    REQUIRE(naive0.mean_gap == fdm0.mean_gap && naive0.std_gap == fdm0.std_gap,
            "fdm N=0 column equals naive");
    REQUIRE(naive0.mean_gap == lpm0.mean_gap && naive0.std_gap == lpm0.std_gap,
            "lpm N=0 column equals naive");

    // A repeated N produces identical columns.
    TrialStats repeated = sweep_shared_vectors(cfg, {2, 2}, 1);
    std::vector<const StrategyAggregate*> fdm_cols;
    for (const auto& agg : repeated.aggregates) {
        if (agg.strategy == Strategy::FocusedDiversity) fdm_cols.push_back(&agg);
    }
    REQUIRE(fdm_cols.size() == 2, "two fdm columns");
    REQUIRE(fdm_cols[0]->mean_gap == fdm_cols[1]->mean_gap &&
                fdm_cols[0]->std_gap == fdm_cols[1]->std_gap,
            "repeated N gives identical columns");

    // Centralized and naive aggregates are N-independent.
    const auto& cen0 = find_agg(Strategy::Centralized, 0);
    const auto& cen2 = find_agg(Strategy::Centralized, 2);
    REQUIRE(cen0.mean_gap == cen2.mean_gap, "centralized column repeated across N");
    testutil::pass("sweep_shared_vectors");
}

void test_trial_time_budget() {
    ExperimentConfig cfg = small_config();
    cfg.trials = 2;
    cfg.trial_seconds_budget = 1e-9;
    TrialStats stats = run_trials(cfg, 1);
    for (const auto& record : stats.records) {
        REQUIRE(record.status == "timeout", "expired budget marks the row, got "
                                                << record.status);
    }
    for (const auto& agg : stats.aggregates) {
        REQUIRE(agg.trials_ok == 0 && agg.trials_failed == cfg.trials,
                "timed-out trials counted as failures");
    }
    testutil::pass("trial time budget");
}

void test_csv_shapes() {
    ExperimentConfig cfg = small_config();
    cfg.trials = 2;
    TrialStats stats = run_trials(cfg);
    const std::string trials_csv = trials_to_csv(stats);
    const std::string summary_csv = summary_to_csv(stats);
    REQUIRE(trials_csv.rfind("trial,strategy,N,U_cen,L,gap_rel_percent,status\n", 0) == 0,
            "per-trial header");
    REQUIRE(summary_csv.rfind("strategy,N,mean_gap,std_gap,trials_ok,trials_failed\n", 0) == 0,
            "summary header");
    const auto count_lines = [](const std::string& text) {
        return std::count(text.begin(), text.end(), '\n');
    };
    REQUIRE(count_lines(trials_csv) == 1 + cfg.trials * 4, "one row per trial and strategy");
    REQUIRE(count_lines(summary_csv) == 1 + 4, "one row per strategy");
    testutil::pass("csv shapes");
}

}  // namespace

int main() {
    test_config_parsing();
    test_generator_sigma_zero();
    test_generator_sigma_one();
    test_generator_moment();
    test_run_trials_determinism();
    test_run_trials_enumeration();
    test_sweep();
    test_trial_time_budget();
    test_csv_shapes();
    std::cout << "[PASS] experiments suite\n";
    return 0;
}
