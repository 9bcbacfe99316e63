#include "scramblekit/shuffle_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "scramblekit/corpus.hpp"
#include "scramblekit/error.hpp"
#include "scramblekit/random.hpp"

namespace scramblekit {
namespace {

using Gram = std::array<std::uint32_t, kMaxBleuOrder>;

std::vector<Gram> grams(const std::vector<std::uint32_t>& ids, int order) {
  std::vector<Gram> out;
  const auto k = static_cast<std::size_t>(order);
  if (ids.size() < k) return out;
  out.reserve(ids.size() - k + 1);
  for (std::size_t i = 0; i + k <= ids.size(); ++i) {
    Gram g{};
    std::copy_n(ids.begin() + static_cast<std::ptrdiff_t>(i), k, g.begin());
    out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Sum over distinct n-grams of min(count in a, count in b); inputs sorted.
std::uint64_t clipped_matches(const std::vector<Gram>& a, const std::vector<Gram>& b) {
  std::uint64_t m = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++m;
      ++i;
      ++j;
    }
  }
  return m;
}

void check_order(int max_n) {
  if (max_n < 1 || max_n > kMaxBleuOrder)
    throw Error(Errc::invalid_argument, "BLEU order must be in 1.." + std::to_string(kMaxBleuOrder));
}

}  // namespace

double NgramPrecisions::bleu(int max_n) const {
  check_order(max_n);
  if (candidate_len == 0) return 0.0;
  double log_sum = 0.0;
  for (int k = 0; k < max_n; ++k) {
    if (totals[k] == 0 || matches[k] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches[k]) / static_cast<double>(totals[k]));
  }
  const double bp = candidate_len >= reference_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(reference_len) / static_cast<double>(candidate_len));
  return bp * std::exp(log_sum / max_n);
}

NgramPrecisions ngram_precisions(std::span<const std::string> candidate,
                                 std::span<const std::string> reference, int max_n) {
  check_order(max_n);
  if (reference.empty()) throw Error(Errc::empty_reference, "reference has no tokens");
  std::unordered_map<std::string_view, std::uint32_t> vocab;
  auto encode = [&vocab](std::span<const std::string> tokens) {
    std::vector<std::uint32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens)
      ids.push_back(vocab.try_emplace(t, static_cast<std::uint32_t>(vocab.size())).first->second);
    return ids;
  };
  const auto cand = encode(candidate);
  const auto ref = encode(reference);

  NgramPrecisions p;
  p.candidate_len = cand.size();
  p.reference_len = ref.size();
  for (int k = 1; k <= max_n; ++k) {
    const auto cg = grams(cand, k);
    p.totals[k - 1] = cg.size();
    p.matches[k - 1] = clipped_matches(cg, grams(ref, k));
  }
  return p;
}

double sentence_bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                     int max_n) {
  return ngram_precisions(candidate, reference, max_n).bleu(max_n);
}

BleuAccumulator::BleuAccumulator(std::vector<int> orders) : orders_(std::move(orders)) {
  if (orders_.empty()) throw Error(Errc::invalid_argument, "no BLEU orders requested");
  for (int o : orders_) check_order(o);
  stats_.resize(orders_.size());
}

void BleuAccumulator::add(std::string_view candidate, std::string_view reference) {
  const auto c = split_whitespace(candidate);
  const auto r = split_whitespace(reference);
  add(std::span<const std::string>(c), std::span<const std::string>(r));
}

void BleuAccumulator::add(std::span<const std::string> candidate, std::span<const std::string> reference) {
  const int top = *std::max_element(orders_.begin(), orders_.end());
  const auto p = ngram_precisions(candidate, reference, top);
  for (std::size_t i = 0; i < orders_.size(); ++i) stats_[i].add(p.bleu(orders_[i]));
}

void BleuAccumulator::merge(const BleuAccumulator& other) {
  if (other.orders_ != orders_) throw Error(Errc::invalid_argument, "BLEU order sets differ");
  for (std::size_t i = 0; i < stats_.size(); ++i) stats_[i].merge(other.stats_[i]);
}

BleuReport BleuAccumulator::report() const {
  BleuReport r;
  r.sample_size = static_cast<std::size_t>(stats_.front().count());
  for (std::size_t i = 0; i < orders_.size(); ++i)
    r.orders.push_back({orders_[i], stats_[i].mean(), stats_[i].stddev()});
  return r;
}

std::vector<std::size_t> sample_without_replacement(std::size_t line_count, std::size_t sample_size,
                                                    std::uint64_t seed) {
  if (sample_size > line_count)
    throw Error(Errc::invalid_argument, "sample size " + std::to_string(sample_size) +
                                            " exceeds line count " + std::to_string(line_count));
  // Partial Fisher-Yates over a virtual identity array; only displaced
  // slots are stored.
  Rng rng(seed);
  std::unordered_map<std::size_t, std::size_t> moved;
  auto at = [&moved](std::size_t i) {
    auto it = moved.find(i);
    return it == moved.end() ? i : it->second;
  };
  std::vector<std::size_t> out;
  out.reserve(sample_size);
  for (std::size_t i = 0; i < sample_size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(line_count - i));
    const std::size_t vj = at(j);
    moved[j] = at(i);
    out.push_back(vj);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BleuReport corpus_shuffle_report(std::span<const std::string> original,
                                 std::span<const std::string> shuffled, std::size_t sample_size,
                                 std::uint64_t seed, std::vector<int> orders) {
  if (original.size() != shuffled.size())
    throw Error(Errc::misaligned, std::to_string(original.size()) + " original lines vs " +
                                      std::to_string(shuffled.size()) + " shuffled lines");
  if (sample_size == 0) throw Error(Errc::invalid_argument, "sample size must be >= 1");
  BleuAccumulator acc(std::move(orders));
  for (auto i : sample_without_replacement(original.size(), sample_size, seed))
    acc.add(shuffled[i], original[i]);
  return acc.report();
}

std::string_view to_string(DeltaMode mode) noexcept {
  return mode == DeltaMode::as_written ? "as-written" : "table-consistent";
}

std::optional<DeltaMode> parse_delta_mode(std::string_view text) noexcept {
  if (text == "as-written") return DeltaMode::as_written;
  if (text == "table-consistent") return DeltaMode::table_consistent;
  return std::nullopt;
}

double relative_difference(const DeltaInput& in) {
  const double denom = in.mode == DeltaMode::as_written ? in.a_or - in.a_rand : in.a_or;
  if (denom == 0.0)
    throw Error(Errc::zero_denominator, std::string("relative difference denominator is zero in ") +
                                            std::string(to_string(in.mode)) + " mode");
  return 100.0 * (in.a_or - in.a_d) / denom;
}

}  // namespace scramblekit
