#pragma once

#include <cstddef>
#include <string>

#include "sensel/strategies.hpp"

namespace sensel {

/// Wire form of the vectors node 1 shares with node 2. The payload is
/// exactly N * n scalars; neither A1 nor the node-1 selection ever crosses
/// the channel.
struct SharedVectorMessage {
  int sender = 1;
  Eigen::Index dimension = 0;  // n
  std::vector<Eigen::VectorXd> vectors;
  std::size_t byte_budget = 0;  // size of the encoded form

  std::size_t payload_scalars() const {
    return vectors.size() * static_cast<std::size_t>(dimension);
  }
};

/// Canonical JSON bytes: {"sender":1,"n":n,"vectors":[[...],...]}, decimals
/// rendered shortest-round-trip so decode(encode(s)) == s exactly.
std::string encode_message(const SharedVectorSet& shared);

SharedVectorMessage decode_message(const std::string& bytes);

/// The decoded payload as a SharedVectorSet for the node-2 solves.
SharedVectorSet to_shared_set(const SharedVectorMessage& message);

/// What actually crossed the channel during a session.
struct SessionTranscript {
  std::string message;  // empty for the naive strategy
  std::size_t payload_scalars = 0;
  std::size_t payload_bytes = 0;
};

struct SessionResult {
  StrategyOutcome outcome;
  SessionTranscript transcript;
};

/// Run the two-node protocol: node 1 solves, encodes its shared vectors,
/// node 2 decodes and solves, and the collector evaluates the stacked
/// selection. Value-identical to the corresponding strategies call; the
/// naive strategy sends nothing.
SessionResult run_session(const Partition& p, int k, int n_shared, Strategy strategy,
                          const SolverParams& params = SolverParams{});

}  // namespace sensel
