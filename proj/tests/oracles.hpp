#pragma once

// Brute-force reference computations used to derive and check expected
// values. Nothing here calls into the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace oracle {

/// All orderings of `tokens` with no position keeping an equal string.
inline std::vector<std::vector<std::string>> derangements(const std::vector<std::string>& tokens) {
  std::vector<std::size_t> idx(tokens.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::set<std::vector<std::string>> seen;
  do {
    bool ok = true;
    std::vector<std::string> perm;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (tokens[idx[i]] == tokens[i]) ok = false;
      perm.push_back(tokens[idx[i]]);
    }
    if (ok) seen.insert(perm);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return {seen.begin(), seen.end()};
}

inline bool derangement_exists(const std::vector<std::string>& tokens) { return !derangements(tokens).empty(); }

namespace detail {
inline void explore(std::vector<bool>& used, std::size_t n, int conjoins, std::set<int>& finals) {
  bool any = false;
  for (std::size_t p = 0; p + n <= used.size(); ++p) {
    bool free = true;
    for (std::size_t k = p; k < p + n; ++k) free = free && !used[k];
    if (!free) continue;
    any = true;
    for (std::size_t k = p; k < p + n; ++k) used[k] = true;
    explore(used, n, conjoins + 1, finals);
    for (std::size_t k = p; k < p + n; ++k) used[k] = false;
  }
  if (!any) finals.insert(static_cast<int>(used.size()) - conjoins * static_cast<int>(n - 1));
}
}  // namespace detail

/// Every final atom count reachable by greedily placing non-overlapping
/// n-word spans on `len` tokens until none fits.
inline std::set<int> reachable_atom_counts(std::size_t len, std::size_t n) {
  std::vector<bool> used(len, false);
  std::set<int> finals;
  detail::explore(used, n, 0, finals);
  return finals;
}

/// Textbook sentence BLEU: clipped n-gram precision via maps, uniform
/// weights, standard brevity penalty, no smoothing.
inline double bleu(const std::vector<std::string>& cand, const std::vector<std::string>& ref, int max_n) {
  if (cand.empty()) return 0.0;
  double log_sum = 0.0;
  for (int k = 1; k <= max_n; ++k) {
    std::map<std::vector<std::string>, int> c, r;
    for (std::size_t i = 0; i + k <= cand.size(); ++i) ++c[{cand.begin() + i, cand.begin() + i + k}];
    for (std::size_t i = 0; i + k <= ref.size(); ++i) ++r[{ref.begin() + i, ref.begin() + i + k}];
    int total = 0, match = 0;
    for (const auto& [g, cnt] : c) {
      total += cnt;
      auto it = r.find(g);
      if (it != r.end()) match += std::min(cnt, it->second);
    }
    if (total == 0 || match == 0) return 0.0;
    log_sum += std::log(static_cast<double>(match) / total);
  }
  double bp = cand.size() >= ref.size() ? 1.0 : std::exp(1.0 - static_cast<double>(ref.size()) / cand.size());
  return bp * std::exp(log_sum / max_n);
}

/// Exact mean BLEU-k of a uniformly random derangement of `len` distinct
/// tokens against the original order, by enumeration.
inline double expected_derangement_bleu(std::size_t len, int max_n) {
  std::vector<std::string> ref;
  for (std::size_t i = 0; i < len; ++i) ref.push_back("w" + std::to_string(i));
  std::vector<std::size_t> idx(len);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double sum = 0.0;
  std::size_t count = 0;
  do {
    bool ok = true;
    for (std::size_t i = 0; i < len && ok; ++i) ok = idx[i] != i;
    if (!ok) continue;
    std::vector<std::string> cand;
    for (auto i : idx) cand.push_back(ref[i]);
    sum += bleu(cand, ref, max_n);
    ++count;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return sum / static_cast<double>(count);
}

/// Same quantity by Monte Carlo over plain rejection sampling with an
/// independent generator: shuffle until no fixed point.
template <class Urng>
inline double simulated_derangement_bleu(std::size_t len, int max_n, std::size_t trials, Urng& gen) {
  std::vector<std::string> ref;
  for (std::size_t i = 0; i < len; ++i) ref.push_back("w" + std::to_string(i));
  double sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<std::size_t> idx(len);
    bool ok = false;
    while (!ok) {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::shuffle(idx.begin(), idx.end(), gen);
      ok = true;
      for (std::size_t i = 0; i < len && ok; ++i) ok = idx[i] != i;
    }
    std::vector<std::string> cand;
    for (auto i : idx) cand.push_back(ref[i]);
    sum += bleu(cand, ref, max_n);
  }
  return sum / static_cast<double>(trials);
}

/// Plug-in mutual information in bits of a joint count table.
inline double mutual_information_bits(const std::map<std::pair<std::size_t, std::size_t>, std::uint64_t>& joint) {
  std::map<std::size_t, std::uint64_t> left, right;
  std::uint64_t total = 0;
  for (const auto& [k, c] : joint) {
    left[k.first] += c;
    right[k.second] += c;
    total += c;
  }
  double mi = 0.0;
  const double n = static_cast<double>(total);
  for (const auto& [k, c] : joint) {
    const double pxy = c / n;
    mi += pxy * std::log2(pxy / ((left[k.first] / n) * (right[k.second] / n)));
  }
  return mi;
}

}  // namespace oracle
