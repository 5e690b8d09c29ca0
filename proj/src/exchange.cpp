#include "sensel/exchange.hpp"

#include <sstream>

#include <json.hpp>

#include "sensel/errors.hpp"

namespace sensel {

std::string encode_message(const SharedVectorSet& shared) {
  nlohmann::ordered_json j;
  j["sender"] = 1;
  j["n"] = shared.dimension;
  nlohmann::ordered_json vectors = nlohmann::ordered_json::array();
  for (const auto& g : shared.vectors) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < g.size(); ++i) row.push_back(g(i));
    vectors.push_back(std::move(row));
  }
  j["vectors"] = std::move(vectors);
  return j.dump();
}

SharedVectorMessage decode_message(const std::string& bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed shared-vector message: ") + e.what());
  }
  SharedVectorMessage message;
  message.byte_budget = bytes.size();
  try {
    message.sender = j.at("sender").get<int>();
    message.dimension = j.at("n").get<Eigen::Index>();
    for (const auto& row : j.at("vectors")) {
      Eigen::VectorXd g(message.dimension);
      if (static_cast<Eigen::Index>(row.size()) != message.dimension) {
        throw DimensionMismatch("shared vector length does not match the declared n");
      }
      Eigen::Index i = 0;
      for (const auto& value : row) g(i++) = value.get<double>();
      message.vectors.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("shared-vector message missing fields: ") + e.what());
  }
  return message;
}

SharedVectorSet to_shared_set(const SharedVectorMessage& message) {
  SharedVectorSet shared;
  shared.dimension = message.dimension;
  shared.vectors = message.vectors;
  return shared;
}

SessionResult run_session(const Partition& p, int k, int n_shared, Strategy strategy,
                          const SolverParams& params) {
  if (strategy == Strategy::Centralized) {
    throw InvalidArgument("a session runs a decentralized strategy: naive, fdm or lpm");
  }
  TwoNodePipeline pipeline(p, k, params);

  if (strategy == Strategy::NaiveDecentralized) {
    return SessionResult{pipeline.naive(), SessionTranscript{}};
  }

  // Stage 1 output crosses the channel as encoded bytes; stage 2 only ever
  // sees the decoded message.
  const std::string bytes = encode_message(pipeline.shared_vectors(n_shared));
  const SharedVectorMessage message = decode_message(bytes);
  const SharedVectorSet shared = to_shared_set(message);

  SessionTranscript transcript;
  transcript.message = bytes;
  transcript.payload_scalars = message.payload_scalars();
  transcript.payload_bytes = message.byte_budget;
  if (transcript.payload_scalars !=
      static_cast<std::size_t>(n_shared) * static_cast<std::size_t>(shared.dimension)) {
    throw InvalidArgument("session transcript does not carry exactly N*n scalars");
  }

  StrategyOutcome outcome = strategy == Strategy::FocusedDiversity
                                ? pipeline.fdm_with(shared)
                                : pipeline.lpm_with(shared);
  return SessionResult{std::move(outcome), std::move(transcript)};
}

}  // namespace sensel
