#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scramblekit/resampler.hpp"

namespace scramblekit {

/// One masked position and the strings to score there. The mask is
/// positional: tokens[mask_index] is whatever the caller put there and is
/// never interpreted by the gateway.
struct ScoreRequest {
  std::string id;
  std::vector<std::string> tokens;
  std::size_t mask_index = 0;
  std::vector<std::string> candidates;

  /// Throws InvalidArgument on an out-of-range mask or no candidates.
  void validate() const;
};

/// Natural-log probabilities, one slot per candidate. Slots listed in
/// `skipped` are present but carry no meaning.
struct ScoreResponse {
  std::string id;
  std::vector<double> logprobs;
  std::vector<std::size_t> skipped;

  bool is_skipped(std::size_t candidate) const;
};

inline constexpr std::string_view kProtocolName = "scramblekit-score";
inline constexpr int kProtocolVersion = 1;

// Wire codec: one compact JSON object per line, without the trailing LF.
std::string encode_request(const ScoreRequest& req);
ScoreRequest decode_request(std::string_view line);
std::string encode_response(const ScoreResponse& resp);
/// Throws ProtocolError on malformed JSON, a JSON error object, non-finite
/// logprobs or out-of-range skipped indices.
ScoreResponse decode_response(std::string_view line);
std::string handshake_line();
/// Throws ProtocolError unless `line` is the version 1 handshake.
void check_handshake(std::string_view line);

/// Checks `resp` against `req`: matching id and one logprob per candidate.
void check_response(const ScoreRequest& req, const ScoreResponse& resp);

class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual ScoreResponse score(const ScoreRequest& req) = 0;
  /// Responses in request order.
  virtual std::vector<ScoreResponse> score_batch(std::span<const ScoreRequest> reqs);
  /// True when logprobs are logs of probabilities (so always <= 0).
  virtual bool normalized() const { return true; }
  virtual std::string describe() const = 0;
};

/// Every candidate gets -ln(vocab_size).
class UniformScorer final : public Scorer {
 public:
  explicit UniformScorer(std::uint64_t vocab_size);

  ScoreResponse score(const ScoreRequest& req) override;
  std::string describe() const override;

 private:
  std::uint64_t vocab_size_;
  double logprob_;
};

/// Context-free additive-smoothed unigram model:
/// ln((count(c) + alpha) / (total + alpha * |entries|)). With alpha = 0
/// unseen candidates are reported as skipped.
class UnigramScorer final : public Scorer {
 public:
  UnigramScorer(AtomTable table, double alpha);

  ScoreResponse score(const ScoreRequest& req) override;
  std::string describe() const override;

 private:
  AtomTable table_;
  double alpha_;
  double log_denominator_;
};

/// Adapts a callable; used for oracle and test scorers.
class FunctionScorer final : public Scorer {
 public:
  using Fn = std::function<ScoreResponse(const ScoreRequest&)>;
  FunctionScorer(Fn fn, std::string name, bool normalized = true)
      : fn_(std::move(fn)), name_(std::move(name)), normalized_(normalized) {}

  ScoreResponse score(const ScoreRequest& req) override;
  bool normalized() const override { return normalized_; }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
  bool normalized_;
};

struct ScorerOptions {
  double unigram_alpha = 1.0;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_in_flight = 64;
};

/// Builds a scorer from `uniform:N`, `unigram:TABLE_FILE`, `remote:HOST:PORT`
/// or `remote:SHELL_COMMAND`. A remote target of the form `name:digits`
/// without whitespace is treated as TCP.
std::unique_ptr<Scorer> make_scorer(std::string_view spec, const ScorerOptions& opts = {});

}  // namespace scramblekit
