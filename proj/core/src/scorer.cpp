#include "scramblekit/scorer.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "scramblekit/error.hpp"
#include "scramblekit/remote_scorer.hpp"

namespace scramblekit {

using nlohmann::json;

void ScoreRequest::validate() const {
  if (mask_index >= tokens.size())
    throw Error(Errc::invalid_argument, "request '" + id + "': mask_index " + std::to_string(mask_index) +
                                            " outside " + std::to_string(tokens.size()) + " tokens");
  if (candidates.empty()) throw Error(Errc::invalid_argument, "request '" + id + "' has no candidates");
}

bool ScoreResponse::is_skipped(std::size_t candidate) const {
  for (auto s : skipped)
    if (s == candidate) return true;
  return false;
}

std::string encode_request(const ScoreRequest& req) {
  nlohmann::ordered_json j = {{"id", req.id},
            {"tokens", req.tokens},
            {"mask_index", req.mask_index},
            {"candidates", req.candidates}};
  return j.dump();
}

ScoreRequest decode_request(std::string_view line) {
  try {
    auto j = json::parse(line);
    ScoreRequest req;
    req.id = j.at("id").get<std::string>();
    req.tokens = j.at("tokens").get<std::vector<std::string>>();
    req.mask_index = j.at("mask_index").get<std::size_t>();
    req.candidates = j.at("candidates").get<std::vector<std::string>>();
    return req;
  } catch (const json::exception& e) {
    throw Error(Errc::protocol_error, std::string("bad request: ") + e.what());
  }
}

std::string encode_response(const ScoreResponse& resp) {
  nlohmann::ordered_json j = {{"id", resp.id}, {"logprobs", resp.logprobs}};
  if (!resp.skipped.empty()) j["skipped"] = resp.skipped;
  return j.dump();
}

ScoreResponse decode_response(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(Errc::protocol_error, std::string("malformed response: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::protocol_error, "response is not a JSON object");
  if (j.contains("error")) {
    std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "?";
    throw Error(Errc::protocol_error, "scorer reported error for '" + id + "': " + j["error"].dump());
  }
  ScoreResponse resp;
  try {
    resp.id = j.at("id").get<std::string>();
    for (const auto& v : j.at("logprobs")) {
      if (!v.is_number()) throw Error(Errc::protocol_error, "non-numeric logprob in '" + resp.id + "'");
      resp.logprobs.push_back(v.get<double>());
    }
    if (j.contains("skipped") && !j["skipped"].is_null())
      resp.skipped = j["skipped"].get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw Error(Errc::protocol_error, std::string("bad response: ") + e.what());
  }
  for (auto s : resp.skipped)
    if (s >= resp.logprobs.size())
      throw Error(Errc::protocol_error, "skipped index " + std::to_string(s) + " out of range in '" + resp.id + "'");
  for (std::size_t i = 0; i < resp.logprobs.size(); ++i)
    if (!resp.is_skipped(i) && !std::isfinite(resp.logprobs[i]))
      throw Error(Errc::protocol_error, "non-finite logprob in '" + resp.id + "'");
  return resp;
}

std::string handshake_line() {
  nlohmann::ordered_json j = {{"protocol", std::string(kProtocolName)}, {"version", kProtocolVersion}};
  return j.dump();
}

void check_handshake(std::string_view line) {
  try {
    auto j = json::parse(line);
    if (j.at("protocol").get<std::string>() == kProtocolName && j.at("version").get<int>() == kProtocolVersion)
      return;
  } catch (const json::exception&) {
  }
  throw Error(Errc::protocol_error, "unexpected handshake: " + std::string(line.substr(0, 200)));
}

void check_response(const ScoreRequest& req, const ScoreResponse& resp) {
  if (resp.id != req.id)
    throw Error(Errc::protocol_error, "response id '" + resp.id + "' does not match request '" + req.id + "'");
  if (resp.logprobs.size() != req.candidates.size())
    throw Error(Errc::protocol_error, "request '" + req.id + "' has " + std::to_string(req.candidates.size()) +
                                          " candidates but response has " +
                                          std::to_string(resp.logprobs.size()) + " logprobs");
}

std::vector<ScoreResponse> Scorer::score_batch(std::span<const ScoreRequest> reqs) {
  std::vector<ScoreResponse> out;
  out.reserve(reqs.size());
  for (const auto& r : reqs) out.push_back(score(r));
  return out;
}

UniformScorer::UniformScorer(std::uint64_t vocab_size)
    : vocab_size_(vocab_size), logprob_(-std::log(static_cast<double>(vocab_size))) {
  if (vocab_size == 0) throw Error(Errc::invalid_argument, "vocabulary size must be >= 1");
}

ScoreResponse UniformScorer::score(const ScoreRequest& req) {
  req.validate();
  return {req.id, std::vector<double>(req.candidates.size(), logprob_), {}};
}

std::string UniformScorer::describe() const { return "uniform:" + std::to_string(vocab_size_); }

UnigramScorer::UnigramScorer(AtomTable table, double alpha) : table_(std::move(table)), alpha_(alpha) {
  if (table_.empty()) throw Error(Errc::invalid_argument, "unigram scorer needs a non-empty table");
  if (!(alpha_ >= 0.0)) throw Error(Errc::invalid_argument, "alpha must be >= 0");
  log_denominator_ = std::log(static_cast<double>(table_.total) + alpha_ * static_cast<double>(table_.size()));
}

ScoreResponse UnigramScorer::score(const ScoreRequest& req) {
  req.validate();
  ScoreResponse resp{req.id, {}, {}};
  resp.logprobs.reserve(req.candidates.size());
  for (std::size_t i = 0; i < req.candidates.size(); ++i) {
    const double numerator = static_cast<double>(table_.count(req.candidates[i])) + alpha_;
    if (numerator <= 0.0) {
      resp.logprobs.push_back(0.0);
      resp.skipped.push_back(i);
    } else {
      resp.logprobs.push_back(std::log(numerator) - log_denominator_);
    }
  }
  return resp;
}

std::string UnigramScorer::describe() const {
  return "unigram(" + std::to_string(table_.size()) + " atoms, alpha=" + std::to_string(alpha_) + ")";
}

ScoreResponse FunctionScorer::score(const ScoreRequest& req) {
  req.validate();
  auto resp = fn_(req);
  check_response(req, resp);
  return resp;
}

namespace {

bool looks_like_host_port(std::string_view target, std::string& host, std::uint16_t& port) {
  auto colon = target.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == target.size()) return false;
  for (char c : target)
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  auto digits = target.substr(colon + 1);
  unsigned long value = 0;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    value = value * 10 + static_cast<unsigned long>(c - '0');
    if (value > 65535) return false;
  }
  host = std::string(target.substr(0, colon));
  port = static_cast<std::uint16_t>(value);
  return true;
}

}  // namespace

std::unique_ptr<Scorer> make_scorer(std::string_view spec, const ScorerOptions& opts) {
  auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw Error(Errc::invalid_argument, "scorer must be uniform:N, unigram:TABLE or remote:TARGET");
  auto kind = spec.substr(0, colon);
  auto arg = spec.substr(colon + 1);
  if (kind == "uniform") {
    std::uint64_t n = 0;
    try {
      std::size_t used = 0;
      n = std::stoull(std::string(arg), &used);
      if (used != arg.size()) throw std::invalid_argument("n");
    } catch (const std::logic_error&) {
      throw Error(Errc::invalid_argument, "uniform scorer needs an integer vocabulary size");
    }
    return std::make_unique<UniformScorer>(n);
  }
  if (kind == "unigram") {
    std::ifstream in{std::string(arg)};
    if (!in) throw Error(Errc::io_error, "cannot open atom table " + std::string(arg));
    return std::make_unique<UnigramScorer>(read_atom_table(in), opts.unigram_alpha);
  }
  if (kind == "remote") {
    RemoteScorer::Options ro{opts.timeout, opts.max_in_flight};
    std::string host;
    std::uint16_t port = 0;
    if (looks_like_host_port(arg, host, port)) return RemoteScorer::connect(host, port, ro);
    return RemoteScorer::spawn(std::string(arg), ro);
  }
  throw Error(Errc::invalid_argument, "unknown scorer kind '" + std::string(kind) + "'");
}

}  // namespace scramblekit
