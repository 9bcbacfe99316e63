#include "scramblekit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "scramblekit/corpus.hpp"
#include "scramblekit/error.hpp"
#include "scramblekit/random.hpp"
#include "scramblekit/stats.hpp"

namespace scramblekit {

using nlohmann::json;

namespace {

std::optional<NumberClass> parse_class(std::string_view s) {
  if (s == "S") return NumberClass::singular;
  if (s == "P") return NumberClass::plural;
  return std::nullopt;
}

std::string_view class_label(NumberClass c) { return c == NumberClass::singular ? "S" : "P"; }

bool by_id(const Stimulus& a, const Stimulus& b) { return a.id < b.id; }

}  // namespace

void Stimulus::validate() const {
  if (id.empty()) throw Error(Errc::parse_error, "stimulus without id");
  if (mask_index >= tokens.size())
    throw Error(Errc::invalid_mask_index, "stimulus '" + id + "': mask_index " + std::to_string(mask_index) +
                                              " outside " + std::to_string(tokens.size()) + " tokens");
  if (good.empty() || bad.empty()) throw Error(Errc::parse_error, "stimulus '" + id + "': empty focus word");
  if (good == bad) throw Error(Errc::parse_error, "stimulus '" + id + "': good and bad are both '" + good + "'");
}

std::string encode_stimulus(const Stimulus& s) {
  nlohmann::ordered_json j = {{"id", s.id},     {"tokens", s.tokens}, {"mask_index", s.mask_index},
            {"good", s.good}, {"bad", s.bad},       {"condition", s.condition}};
  if (s.number_class) j["number_class"] = std::string(class_label(*s.number_class));
  return j.dump();
}

Stimulus decode_stimulus(std::string_view line) {
  Stimulus s;
  try {
    auto j = json::parse(line);
    s.id = j.at("id").get<std::string>();
    s.tokens = j.at("tokens").get<std::vector<std::string>>();
    s.mask_index = j.at("mask_index").get<std::size_t>();
    s.good = j.at("good").get<std::string>();
    s.bad = j.at("bad").get<std::string>();
    s.condition = j.at("condition").get<std::string>();
    if (j.contains("number_class") && !j["number_class"].is_null()) {
      auto label = j["number_class"].get<std::string>();
      s.number_class = parse_class(label);
      if (!s.number_class) throw Error(Errc::parse_error, "stimulus '" + s.id + "': number_class '" + label + "'");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, e.what());
  }
  return s;
}

std::vector<Stimulus> read_stimuli(std::istream& in) {
  std::vector<Stimulus> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Stimulus s;
    try {
      s = decode_stimulus(line);
      s.validate();
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!ids.insert(s.id).second)
      throw Error(Errc::duplicate_id, "line " + std::to_string(lineno) + ": id '" + s.id + "'");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Stimulus> load_stimuli(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return read_stimuli(in);
}

std::size_t convert_tsv(std::istream& in, std::ostream& out) {
  std::string line;
  std::size_t row = 0, written = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (row == 1 && cols.front() == "sentence") continue;
    const auto where = "row " + std::to_string(row);
    if (cols.size() != 5 && cols.size() != 6)
      throw Error(Errc::parse_error, where + ": expected 5 or 6 tab-separated columns, got " + std::to_string(cols.size()));
    Stimulus s;
    s.id = std::to_string(row);
    s.tokens = split_whitespace(cols[0]);
    try {
      std::size_t used = 0;
      s.mask_index = std::stoull(cols[1], &used);
      if (used != cols[1].size()) throw std::invalid_argument("mask");
    } catch (const std::logic_error&) {
      throw Error(Errc::parse_error, where + ": mask index '" + cols[1] + "' is not an integer");
    }
    s.good = cols[2];
    s.bad = cols[3];
    s.condition = cols[4];
    if (cols.size() == 6 && !cols[5].empty()) {
      s.number_class = parse_class(cols[5]);
      if (!s.number_class) throw Error(Errc::parse_error, where + ": class must be S or P");
    }
    try {
      s.validate();
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    out << encode_stimulus(s) << '\n';
    ++written;
  }
  return written;
}

std::size_t balance_target(std::size_t singular, std::size_t plural, bool strict_next) {
  auto round_up = [](std::size_t n) { return (n + 99) / 100 * 100; };
  std::size_t target = round_up(singular);
  if (strict_next && singular % 100 == 0) target = singular + 100;
  return std::max(target, round_up(plural));
}

std::vector<Stimulus> balance_stimuli(std::span<const Stimulus> stimuli, std::uint64_t seed, bool strict_next) {
  std::map<std::string, std::pair<std::vector<Stimulus>, std::vector<Stimulus>>> groups;
  for (const auto& s : stimuli) {
    if (!s.number_class) throw Error(Errc::missing_number_class, "stimulus '" + s.id + "'");
    auto& g = groups[s.condition];
    (*s.number_class == NumberClass::singular ? g.first : g.second).push_back(s);
  }

  std::vector<Stimulus> out;
  for (auto& [condition, classes] : groups) {
    auto& [singular, plural] = classes;
    if (singular.empty() || plural.empty())
      throw Error(Errc::empty_class, "condition '" + condition + "' has " + std::to_string(singular.size()) +
                                         " singular and " + std::to_string(plural.size()) + " plural items");
    const auto target = balance_target(singular.size(), plural.size(), strict_next);
    Rng rng(effective_seed({SeedMode::per_shard, seed}, condition, 0));
    for (auto* cls : {&singular, &plural}) {
      std::sort(cls->begin(), cls->end(), by_id);
      std::vector<std::size_t> copies(cls->size(), 0);
      const auto originals = cls->size();
      out.insert(out.end(), cls->begin(), cls->end());
      for (std::size_t k = originals; k < target; ++k) {
        const auto pick = static_cast<std::size_t>(rng.below(originals));
        Stimulus copy = (*cls)[pick];
        copy.id += "~" + std::to_string(++copies[pick]);
        out.push_back(std::move(copy));
      }
    }
  }
  Rng rng(seed);
  rng.shuffle(std::span(out));
  return out;
}

namespace {

struct Tally {
  std::size_t items = 0, evaluated = 0, correct = 0, skipped = 0;
  double diff_sum = 0.0;

  ConditionResult result(std::string condition) const {
    ConditionResult r{std::move(condition), items, evaluated, correct, skipped, std::nullopt, std::nullopt};
    if (evaluated) {
      r.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(evaluated);
      r.mean_prob_diff = 100.0 * diff_sum / static_cast<double>(evaluated);
    }
    return r;
  }
};

}  // namespace

ProbeReport run_probe(std::span<const Stimulus> stimuli, Scorer& scorer, bool balance, std::uint64_t seed,
                      bool strict_next) {
  if (stimuli.empty()) throw Error(Errc::invalid_argument, "no stimuli");
  std::vector<Stimulus> items(stimuli.begin(), stimuli.end());
  {
    std::set<std::string_view> ids;
    for (const auto& s : items) {
      s.validate();
      if (!ids.insert(s.id).second) throw Error(Errc::duplicate_id, "stimulus id '" + s.id + "'");
    }
  }
  if (balance) items = balance_stimuli(items, seed, strict_next);
  std::sort(items.begin(), items.end(), by_id);

  std::map<std::string, Tally> per_condition;
  Tally overall;
  constexpr std::size_t kBatch = 256;
  std::vector<ScoreRequest> reqs;
  for (std::size_t start = 0; start < items.size(); start += kBatch) {
    const auto end = std::min(items.size(), start + kBatch);
    reqs.clear();
    for (std::size_t i = start; i < end; ++i)
      reqs.push_back({items[i].id, items[i].tokens, items[i].mask_index, {items[i].good, items[i].bad}});
    const auto resps = scorer.score_batch(reqs);
    for (std::size_t i = start; i < end; ++i) {
      const auto& resp = resps[i - start];
      check_response(reqs[i - start], resp);
      auto& tally = per_condition[items[i].condition];
      ++tally.items;
      ++overall.items;
      const double lg = resp.logprobs[0], lb = resp.logprobs[1];
      if (resp.is_skipped(0) || resp.is_skipped(1) || lg == lb) {
        ++tally.skipped;
        ++overall.skipped;
        continue;
      }
      const double diff = std::exp(lg) - std::exp(lb);
      for (auto* t : {&tally, &overall}) {
        ++t->evaluated;
        t->correct += lg > lb;
        t->diff_sum += diff;
      }
    }
  }
  if (overall.evaluated == 0)
    throw Error(Errc::all_skipped, "all " + std::to_string(overall.items) + " items were ties or skipped");

  ProbeReport report;
  report.seed = seed;
  report.balanced = balance;
  report.overall = overall.result("overall");
  RunningStats acc, diff;
  for (const auto& [condition, tally] : per_condition) {
    report.conditions.push_back(tally.result(condition));
    const auto& r = report.conditions.back();
    if (r.accuracy) {
      acc.add(*r.accuracy);
      diff.add(*r.mean_prob_diff);
    }
  }
  report.accuracy_mean = acc.mean();
  report.accuracy_std = acc.stddev();
  report.prob_diff_mean = diff.mean();
  report.prob_diff_std = diff.stddev();
  return report;
}

}  // namespace scramblekit
