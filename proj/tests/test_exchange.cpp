#include "sensel/exchange.hpp"

#include <cstring>

#include "sensel/errors.hpp"
#include "sensel/experiments.hpp"
#include "test_util.hpp"

using namespace sensel;

namespace {

void test_encode_fixtures() {
    SharedVectorSet empty{2, {}};
    REQUIRE(encode_message(empty) == R"({"sender":1,"n":2,"vectors":[]})",
            "empty set encoding, got " << encode_message(empty));

    SharedVectorSet one{2, {Eigen::Vector2d(4, 0)}};
    REQUIRE(encode_message(one) == R"({"sender":1,"n":2,"vectors":[[4.0,0.0]]})",
            "single vector encoding, got " << encode_message(one));
    testutil::pass("encode fixtures");
}

void test_round_trip() {
    Rng rng(2718);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_below(6));
        const int count = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n + 1)));
        SharedVectorSet original;
        original.dimension = n;
        for (int j = 0; j < count; ++j) {
            Eigen::VectorXd g(n);
            for (int i = 0; i < n; ++i) g(i) = rng.normal() * std::pow(10.0, rng.normal());
            original.vectors.push_back(std::move(g));
        }
        SharedVectorMessage decoded = decode_message(encode_message(original));
        REQUIRE(decoded.sender == 1, "sender preserved");
        REQUIRE(decoded.dimension == original.dimension, "dimension preserved");
        REQUIRE(decoded.vectors.size() == original.vectors.size(), "count preserved");
        for (std::size_t j = 0; j < original.vectors.size(); ++j) {
            REQUIRE(std::memcmp(decoded.vectors[j].data(), original.vectors[j].data(),
                                sizeof(double) * static_cast<std::size_t>(n)) == 0,
                    "values bit-exact after round trip");
        }
    }
    REQUIRE_THROWS(decode_message("not json"), InvalidArgument, "malformed bytes rejected");
    testutil::pass("round trip");
}

void test_session_budget() {
    ExperimentConfig cfg;
    cfg.m = 16;
    cfg.n = 4;
    cfg.k_s = 8;
    cfg.num_correlated_pairs = 4;
    Partition instance = generate_instance(cfg, 404);

    SessionResult naive = run_session(instance, cfg.k_s, 2, Strategy::NaiveDecentralized);
    REQUIRE(naive.transcript.payload_scalars == 0 && naive.transcript.message.empty(),
            "naive session sends nothing");

    SessionResult fdm = run_session(instance, cfg.k_s, 3, Strategy::FocusedDiversity);
    REQUIRE(fdm.transcript.payload_scalars == 3u * 4u, "payload is N*n scalars");
    REQUIRE(fdm.transcript.payload_bytes == fdm.transcript.message.size(),
            "byte budget matches the encoded message");

    // Reference-scale check: N = 5 shared vectors in dimension 40.
    ExperimentConfig big;
    big.trials = 1;
    Partition large = generate_instance(big, 7);
    SessionResult session = run_session(large, big.k_s, big.n_shared,
                                        Strategy::FocusedDiversity);
    REQUIRE(session.transcript.payload_scalars == 200, "5 vectors of dimension 40");
    testutil::pass("session information budget");
}

void test_session_equivalence() {
    ExperimentConfig cfg;
    cfg.m = 12;
    cfg.n = 3;
    cfg.k_s = 6;
    cfg.num_correlated_pairs = 4;
    const auto same_bits = [](const SelectionVector& a, const SelectionVector& b) {
        return a.size() == b.size() &&
               std::memcmp(a.entries().data(), b.entries().data(),
                           sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
    };
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Partition instance = generate_instance(cfg, 1000 + seed);
        const int n_shared = static_cast<int>(seed % 4);

        SessionResult fdm_session =
            run_session(instance, cfg.k_s, n_shared, Strategy::FocusedDiversity);
        StrategyOutcome fdm_direct = select_fdm(instance, cfg.k_s, n_shared);
        REQUIRE(same_bits(fdm_session.outcome.z_relaxed, fdm_direct.z_relaxed) &&
                    same_bits(fdm_session.outcome.z_boolean, fdm_direct.z_boolean),
                "FDM session equals direct call at seed " << seed);

        SessionResult lpm_session =
            run_session(instance, cfg.k_s, n_shared, Strategy::LinearPenalty);
        StrategyOutcome lpm_direct = select_lpm(instance, cfg.k_s, n_shared);
        REQUIRE(same_bits(lpm_session.outcome.z_relaxed, lpm_direct.z_relaxed) &&
                    same_bits(lpm_session.outcome.z_boolean, lpm_direct.z_boolean),
                "LPM session equals direct call at seed " << seed);

        if (seed < 10) {
            SessionResult naive_session =
                run_session(instance, cfg.k_s, 0, Strategy::NaiveDecentralized);
            StrategyOutcome naive_direct = select_naive(instance, cfg.k_s);
            REQUIRE(same_bits(naive_session.outcome.z_relaxed, naive_direct.z_relaxed),
                    "naive session equals direct call");
        }
    }
    testutil::pass("session equivalence");
}

}  // namespace

int main() {
    test_encode_fixtures();
    test_round_trip();
    test_session_budget();
    test_session_equivalence();
    std::cout << "[PASS] exchange suite\n";
    return 0;
}
