#include "scramblekit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "io.hpp"
#include "manifest.hpp"
#include "scramblekit/corpus.hpp"
#include "scramblekit/error.hpp"
#include "scramblekit/permuter.hpp"
#include "scramblekit/pll.hpp"
#include "scramblekit/probe.hpp"
#include "scramblekit/random.hpp"
#include "scramblekit/resampler.hpp"
#include "scramblekit/scorer.hpp"
#include "scramblekit/shuffle_metrics.hpp"

namespace scramblekit::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kUsage = 2;
constexpr int kDataError = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised after per-line diagnostics were already printed.
struct ReportedFailure {};

struct Common {
  std::size_t jobs = 0;
  std::string manifest;
  std::string out;

  std::size_t threads() const {
    if (jobs) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

void add_common(CLI::App* cmd, Common& c, bool has_report) {
  cmd->add_option("--jobs,-j", c.jobs, "Worker threads (default: all cores)")->envname("SCRAMBLEKIT_JOBS");
  cmd->add_option("--manifest", c.manifest, "Manifest path (default: <output>.manifest.json)");
  if (has_report) cmd->add_option("--out,-o", c.out, "Write the JSON report here instead of standard output");
}

/// Writes a JSON report to --out (atomically) or `out`, plus the manifest.
void emit_report(const ojson& report, const Common& c, Manifest& manifest, std::ostream& out) {
  const auto text = report.dump(2) + "\n";
  if (c.out.empty()) {
    out << text;
  } else {
    write_file_atomic(c.out, text);
    manifest.add_output(c.out);
  }
  if (!c.manifest.empty())
    manifest.write(c.manifest);
  else if (!c.out.empty())
    manifest.write(Manifest::default_path(c.out));
}

void finish_outputs(std::vector<std::unique_ptr<AtomicFile>>& files) {
  for (auto& f : files) f->commit();
}

std::string where(const std::string& shard, std::uint64_t line) { return shard + ":" + std::to_string(line + 1); }

// ---------------------------------------------------------------- permute

struct PermuteArgs {
  int n = 1;
  std::uint64_t seed = 0;
  std::string seed_mode = "fixed";
  int max_retries = 100;
  std::string on_infeasible = "passthrough";
  std::size_t window_tokens = 0;
  std::string spans;
  std::string in;
  std::string out;
};

struct InfeasibleTally {
  std::size_t count = 0;
  std::vector<std::string> diagnostics;
};

/// Applies the --on-infeasible policy. Returns false when the line is dropped.
bool keep_infeasible(const PermuteArgs& a, InfeasibleTally& tally, const std::string& what) {
  ++tally.count;
  if (a.on_infeasible == "error") tally.diagnostics.push_back(what + ": no rearrangement leaves every word moved");
  return a.on_infeasible == "passthrough";
}

void report_infeasible(const PermuteArgs& a, const InfeasibleTally& tally, std::ostream& err) {
  for (const auto& d : tally.diagnostics) err << "scramblekit: " << d << "\n";
  if (!tally.diagnostics.empty()) throw ReportedFailure{};
  if (tally.count)
    err << "scramblekit: " << tally.count << " unit(s) without a derangement "
        << (a.on_infeasible == "drop" ? "dropped" : "passed through") << "\n";
}

void permute_sentences(const PermuteArgs& a, const SeedPolicy& policy, const Common& c,
                       const std::vector<ShardJob>& jobs, std::ostream& err) {
  PermuteConfig cfg{a.n, a.max_retries, true};
  cfg.validate();
  std::vector<std::unique_ptr<AtomicFile>> files;
  std::unique_ptr<AtomicFile> spans;
  if (!a.spans.empty()) spans = std::make_unique<AtomicFile>(a.spans);
  InfeasibleTally tally;

  std::vector<Sentence> chunk;
  std::vector<PermuteOutcome> results;
  for (const auto& job : jobs) {
    files.push_back(std::make_unique<AtomicFile>(job.output));
    auto& os = files.back()->stream();
    ShardReader reader(job.input);
    for (;;) {
      chunk.clear();
      while (chunk.size() < kChunkLines) {
        auto s = reader.next();
        if (!s) break;
        chunk.push_back(std::move(*s));
      }
      if (chunk.empty()) break;
      results.assign(chunk.size(), {});
      parallel_for(chunk.size(), c.threads(), [&](std::size_t i) {
        const auto& s = chunk[i];
        results[i] = permute_sentence_detailed(s, cfg, effective_seed(policy, s.shard, s.id));
      });
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        const auto& r = results[i];
        if (r.status == PermuteStatus::infeasible && !keep_infeasible(a, tally, where(chunk[i].shard, chunk[i].id)))
          continue;
        os << r.text << '\n';
        if (spans) {
          ojson j = {{"shard", chunk[i].shard}, {"line", chunk[i].id}, {"spans", ojson::array()}};
          for (auto [first, last] : r.spans) j["spans"].push_back({first, last});
          spans->stream() << j.dump() << '\n';
        }
      }
    }
  }
  report_infeasible(a, tally, err);
  finish_outputs(files);
  if (spans) spans->commit();
}

void permute_windows(const PermuteArgs& a, const SeedPolicy& policy, const Common& c, const std::vector<ShardJob>& jobs,
                     std::ostream& err) {
  WindowConfig cfg{a.window_tokens};
  cfg.validate();
  if (a.max_retries < 1) throw Error(Errc::invalid_argument, "max_retries must be >= 1");
  std::vector<std::unique_ptr<AtomicFile>> files;
  for (const auto& job : jobs) files.push_back(std::make_unique<AtomicFile>(job.output));
  std::vector<InfeasibleTally> tallies(jobs.size());

  // Buffers depend on sentence order within a shard, so shards are the unit of parallelism.
  parallel_for(jobs.size(), c.threads(), [&](std::size_t j) {
    auto& os = files[j]->stream();
    WindowShuffler shuffler(cfg, policy, a.max_retries);
    ShardReader reader(jobs[j].input);
    auto emit = [&](const std::optional<WindowBlock>& b) {
      if (!b) return;
      if (b->status == PermuteStatus::infeasible &&
          !keep_infeasible(a, tallies[j], where(b->shard, b->first_id) + " (buffer of " +
                                              std::to_string(b->sentence_count) + " sentences)"))
        return;
      os << b->text << '\n';
    };
    while (auto s = reader.next()) emit(shuffler.push(*s));
    emit(shuffler.finish());
  });

  InfeasibleTally total;
  for (auto& t : tallies) {
    total.count += t.count;
    total.diagnostics.insert(total.diagnostics.end(), t.diagnostics.begin(), t.diagnostics.end());
  }
  report_infeasible(a, total, err);
  finish_outputs(files);
}

void setup_permute(CLI::App& app, const std::string& name, PermuteArgs& a, Common& c, bool window) {
  auto* cmd = app.add_subcommand(name, window ? "Shuffle words across buffers of whole sentences"
                                              : "Shuffle the words of every sentence so none stays in place");
  if (!window) {
    cmd->add_option("--n", a.n, "Keep n-grams of this order contiguous (1 = plain word shuffle)")
        ->check(CLI::Range(1, 4));
    cmd->add_option("--spans", a.spans, "Write source token spans of every output line as JSON lines");
  }
  cmd->add_option("--seed", a.seed, "Global seed");
  cmd->add_option("--seed-mode", a.seed_mode, "How the global seed reaches each unit")
      ->check(CLI::IsMember({"fixed", "per-sentence", "per-shard"}));
  cmd->add_option("--max-retries", a.max_retries, "Rejection sampling attempts before the constructive fallback")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--on-infeasible", a.on_infeasible, "Units that cannot be deranged")
      ->check(CLI::IsMember({"passthrough", "drop", "error"}));
  auto* wt = cmd->add_option("--window-tokens", a.window_tokens, "Token budget of a buffer (enables window mode)");
  wt->check(CLI::PositiveNumber);
  if (window) a.window_tokens = 512;
  cmd->add_option("IN", a.in, "Input file or shard directory")->required();
  cmd->add_option("OUT", a.out, "Output file or directory")->required();
  add_common(cmd, c, false);
}

int run_permute(const PermuteArgs& a, const Common& c, std::span<const std::string> args, const std::string& name,
                std::ostream& err) {
  if (a.window_tokens && a.n != 1) throw UsageError("--n cannot be combined with window mode");
  if (a.window_tokens && !a.spans.empty()) throw UsageError("--spans is not available in window mode");
  const SeedPolicy policy{*parse_seed_mode(a.seed_mode), a.seed};
  Manifest manifest(name, args);
  manifest.config() = {{"mode", a.window_tokens ? "window" : "sentence"},
                       {"n", a.n},
                       {"max_retries", a.max_retries},
                       {"on_infeasible", a.on_infeasible},
                       {"window_tokens", a.window_tokens ? ojson(a.window_tokens) : ojson(nullptr)},
                       {"spans", a.spans.empty() ? ojson(nullptr) : ojson(a.spans)},
                       {"input", a.in},
                       {"output", a.out},
                       {"jobs", c.threads()}};
  manifest.set_seed(a.seed, a.seed_mode);
  const auto jobs = map_shards(a.in, a.out);
  if (a.window_tokens)
    permute_windows(a, policy, c, jobs, err);
  else
    permute_sentences(a, policy, c, jobs, err);
  manifest.add_input(a.in);
  manifest.add_output(a.out);
  if (!a.spans.empty()) manifest.add_output(a.spans);
  manifest.write(c.manifest.empty() ? Manifest::default_path(a.out) : fs::path(c.manifest));
  return 0;
}

// ---------------------------------------------------------------- resample

struct ResampleArgs {
  std::string mode = "frequency";
  std::string annotations;
  std::uint64_t seed = 0;
  std::string table_out;
  std::string in;
  std::string out;
};

int run_resample(const ResampleArgs& a, const Common& c, std::span<const std::string> args) {
  const auto mode = *parse_resample_mode(a.mode);
  Manifest manifest("resample", args);
  manifest.config() = {{"mode", a.mode},
                       {"annotations", a.annotations.empty() ? ojson(nullptr) : ojson(a.annotations)},
                       {"table_out", a.table_out.empty() ? ojson(nullptr) : ojson(a.table_out)},
                       {"input", a.in},
                       {"output", a.out},
                       {"jobs", c.threads()}};
  manifest.set_seed(a.seed, "per-line");

  AnnotationIndex index;
  if (!a.annotations.empty()) {
    std::ifstream ann(a.annotations);
    if (!ann) throw Error(Errc::io_error, "cannot open " + a.annotations);
    index = read_annotations(ann);
  }
  const auto jobs = map_shards(a.in, a.out);

  AtomTableBuilder builder;
  for (const auto& job : jobs) {
    ShardReader reader(job.input);
    while (auto s = reader.next()) {
      try {
        builder.add(*s, index.find(s->shard, s->id));
      } catch (const Error& e) {
        throw Error(e.code(), where(s->shard, s->id) + ": " + e.what());
      }
    }
  }
  auto [table, shape] = std::move(builder).finish();

  std::unique_ptr<AtomicFile> table_file;
  if (!a.table_out.empty()) {
    table_file = std::make_unique<AtomicFile>(a.table_out);
    write_atom_table(table_file->stream(), table);
  }

  const AtomSampler sampler(table, mode);
  std::vector<std::unique_ptr<AtomicFile>> files;
  std::vector<std::string> lines;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    files.push_back(std::make_unique<AtomicFile>(jobs[j].output));
    const auto& sh = shape.shards[j];
    for (std::size_t start = 0; start < sh.atom_counts.size(); start += kChunkLines) {
      const auto end = std::min(sh.atom_counts.size(), start + kChunkLines);
      lines.assign(end - start, {});
      parallel_for(end - start, c.threads(), [&](std::size_t i) {
        const auto line = start + i;
        lines[i] = resample_line(sampler, sh.atom_counts[line], resample_line_seed(a.seed, sh.shard, line));
      });
      for (const auto& l : lines) files.back()->stream() << l << '\n';
    }
  }
  finish_outputs(files);
  if (table_file) table_file->commit();

  manifest.add_input(a.in);
  if (!a.annotations.empty()) manifest.add_input(a.annotations);
  manifest.add_output(a.out);
  if (!a.table_out.empty()) manifest.add_output(a.table_out);
  manifest.config()["atom_types"] = table.size();
  manifest.config()["atom_tokens"] = table.total;
  manifest.write(c.manifest.empty() ? Manifest::default_path(a.out) : fs::path(c.manifest));
  return 0;
}

// ---------------------------------------------------------------- bleu

struct BleuArgs {
  std::string orders = "2,3,4";
  std::size_t sample = 1000000;
  std::uint64_t seed = 0;
  std::string original;
  std::string shuffled;
};

std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> orders;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || p != item.data() + item.size() || v < 1 || v > kMaxBleuOrder)
      throw UsageError("--orders takes comma-separated integers in 1.." + std::to_string(kMaxBleuOrder));
    orders.push_back(v);
  }
  if (orders.empty()) throw UsageError("--orders is empty");
  return orders;
}

std::vector<std::pair<ShardFile, ShardFile>> align_shards(const fs::path& original, const fs::path& shuffled) {
  auto a = list_shards(original);
  auto b = list_shards(shuffled);
  if (a.size() != b.size())
    throw Error(Errc::misaligned, std::to_string(a.size()) + " original shards vs " + std::to_string(b.size()) +
                                      " shuffled shards");
  std::vector<std::pair<ShardFile, ShardFile>> out;
  const bool dirs = fs::is_directory(original);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (dirs && a[i].shard != b[i].shard)
      throw Error(Errc::misaligned, "shard '" + a[i].shard + "' has no counterpart (found '" + b[i].shard + "')");
    out.emplace_back(std::move(a[i]), std::move(b[i]));
  }
  return out;
}

int run_bleu(const BleuArgs& a, const Common& c, std::span<const std::string> args, std::ostream& out) {
  const auto orders = parse_orders(a.orders);
  if (a.sample == 0) throw UsageError("--sample must be >= 1");
  Manifest manifest("bleu", args);
  const auto pairs = align_shards(a.original, a.shuffled);

  // Pass 1: alignment and the population of lines with a non-empty original.
  std::size_t lines = 0, population = 0;
  for (const auto& [o, s] : pairs) {
    ShardReader ro(o), rs(s);
    std::uint64_t n = 0;
    for (;;) {
      auto lo = ro.next();
      auto ls = rs.next();
      if (!lo && !ls) break;
      if (!lo || !ls)
        throw Error(Errc::misaligned, "shard '" + o.shard + "': line counts differ after line " + std::to_string(n));
      ++n;
      population += !lo->tokens.empty();
    }
    lines += n;
  }
  if (population == 0) throw Error(Errc::empty_reference, "every original line is blank");
  const auto sample_size = std::min(a.sample, population);
  const auto sample = sample_without_replacement(population, sample_size, a.seed);

  // Pass 2: score the sampled lines.
  BleuAccumulator acc(orders);
  std::size_t ordinal = 0, next = 0;
  for (const auto& [o, s] : pairs) {
    if (next == sample.size()) break;
    ShardReader ro(o), rs(s);
    while (auto lo = ro.next()) {
      auto ls = rs.next();
      if (lo->tokens.empty()) continue;
      if (next < sample.size() && sample[next] == ordinal) {
        acc.add(ls->tokens, lo->tokens);
        ++next;
      }
      ++ordinal;
    }
  }

  const auto report = acc.report();
  ojson j;
  j["orders"] = ojson::array();
  for (const auto& o : report.orders) j["orders"].push_back({{"order", o.order}, {"mean", o.mean}, {"std", o.stddev}});
  j["sample_size"] = report.sample_size;
  j["population"] = population;
  j["line_count"] = lines;
  j["blank_lines"] = lines - population;
  j["seed"] = a.seed;

  manifest.config() = {{"orders", orders},
                       {"sample", a.sample},
                       {"original", a.original},
                       {"shuffled", a.shuffled}};
  manifest.set_seed(a.seed);
  manifest.add_input(a.original);
  manifest.add_input(a.shuffled);
  emit_report(j, c, manifest, out);
  return 0;
}

// ---------------------------------------------------------------- delta

struct DeltaArgs {
  std::string mode = "table-consistent";
  double a_or = 0.0;
  double a_d = 0.0;
  std::optional<double> a_rand;
};

int run_delta(const DeltaArgs& a, std::ostream& out) {
  const auto mode = *parse_delta_mode(a.mode);
  if (mode == DeltaMode::as_written && !a.a_rand) throw UsageError("--a-rand is required with --mode as-written");
  const double v = relative_difference({a.a_or, a.a_d, a.a_rand.value_or(0.0), mode});
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  out << buf << "\n";
  return 0;
}

// ---------------------------------------------------------------- scorers

struct ScorerArgs {
  std::string spec;
  double alpha = 1.0;
  int timeout_ms = 30000;
  std::uint64_t seed = 0;
};

void add_scorer_options(CLI::App* cmd, ScorerArgs& s) {
  cmd->add_option("--scorer", s.spec, "uniform:N, unigram:TABLE, remote:HOST:PORT or remote:COMMAND")->required();
  cmd->add_option("--alpha", s.alpha, "Add-alpha smoothing of the unigram scorer")->check(CLI::NonNegativeNumber);
  cmd->add_option("--timeout", s.timeout_ms, "Remote scorer timeout per batch, in milliseconds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", s.seed, "Seed");
}

std::unique_ptr<Scorer> open_scorer(const ScorerArgs& s) {
  ScorerOptions opts;
  opts.unigram_alpha = s.alpha;
  opts.timeout = std::chrono::milliseconds(s.timeout_ms);
  return make_scorer(s.spec, opts);
}

void describe_scorer(Manifest& m, const ScorerArgs& s, const Scorer& scorer) {
  m.config()["scorer"] = s.spec;
  m.config()["scorer_resolved"] = scorer.describe();
  m.config()["alpha"] = s.alpha;
  m.config()["timeout_ms"] = s.timeout_ms;
  constexpr std::string_view unigram = "unigram:";
  if (s.spec.starts_with(unigram)) m.add_input(s.spec.substr(unigram.size()));
}

// ---------------------------------------------------------------- pll

struct PllArgs {
  ScorerArgs scorer;
  std::string bootstrap = "k=5,m=100";
  bool per_sentence = false;
  std::string corpus;
};

std::pair<int, int> parse_bootstrap(const std::string& text) {
  int k = -1, m = -1;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    int v = 0;
    const char* first = item.data() + (eq == std::string::npos ? 0 : eq + 1);
    auto [p, ec] = std::from_chars(first, item.data() + item.size(), v);
    if (eq == std::string::npos || ec != std::errc{} || p != item.data() + item.size() || v < 1)
      throw UsageError("--bootstrap takes k=<int>,m=<int> with positive values");
    const auto key = item.substr(0, eq);
    if (key == "k")
      k = v;
    else if (key == "m")
      m = v;
    else
      throw UsageError("--bootstrap: unknown key '" + key + "'");
  }
  if (k < 0 || m < 0) throw UsageError("--bootstrap needs both k and m");
  return {k, m};
}

int run_pll(const PllArgs& a, const Common& c, std::span<const std::string> args, std::ostream& out,
            std::ostream& err) {
  const auto [k, m] = parse_bootstrap(a.bootstrap);
  auto scorer = open_scorer(a.scorer);
  Manifest manifest("pll", args);
  const auto shards = list_shards(a.corpus);

  // Pass 1: count the non-empty sentences, which form the bootstrap population.
  std::size_t population = 0;
  for (const auto& sh : shards) {
    ShardReader r(sh);
    while (auto s = r.next()) population += !s->tokens.empty();
  }
  const auto sample = bootstrap_indices(population, k, m, a.scorer.seed);
  std::vector<std::size_t> wanted(sample.begin(), sample.end());
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

  // Pass 2: score each drawn sentence once, in corpus order.
  std::vector<PllResult> plls;
  std::size_t ordinal = 0, next = 0;
  for (const auto& sh : shards) {
    if (next == wanted.size()) break;
    ShardReader r(sh);
    while (auto s = r.next()) {
      if (s->tokens.empty()) continue;
      if (next < wanted.size() && wanted[next] == ordinal) {
        try {
          plls.push_back(pll(*s, *scorer));
        } catch (const Error& e) {
          err << "scramblekit: " << where(s->shard, s->id) << ": " << e.what() << "\n";
          throw ReportedFailure{};
        }
        ++next;
      }
      ++ordinal;
    }
  }
  std::vector<std::size_t> remapped;
  remapped.reserve(sample.size());
  for (auto i : sample)
    remapped.push_back(static_cast<std::size_t>(std::lower_bound(wanted.begin(), wanted.end(), i) - wanted.begin()));
  auto result = bpll_from_sample(plls, remapped);

  ojson j;
  j["bpll"] = result.bpll;
  j["bpll_token_weighted"] = result.bpll_token_weighted;
  j["mean_pll"] = result.mean_pll;
  j["k"] = k;
  j["m"] = m;
  j["seed"] = a.scorer.seed;
  j["sample_size"] = result.sample_size;
  j["distinct_sentences"] = plls.size();
  j["population"] = population;
  j["scorer"] = scorer->describe();
  if (a.per_sentence) {
    j["per_sentence"] = ojson::array();
    for (const auto& p : plls)
      j["per_sentence"].push_back({{"shard", p.shard},
                                   {"line", p.sentence_id},
                                   {"pll", p.pll},
                                   {"tokens", p.token_count},
                                   {"skipped", p.skipped_tokens}});
  }

  manifest.config() = {{"bootstrap", {{"k", k}, {"m", m}}}, {"per_sentence", a.per_sentence}, {"corpus", a.corpus}};
  describe_scorer(manifest, a.scorer, *scorer);
  manifest.set_seed(a.scorer.seed);
  manifest.add_input(a.corpus);
  emit_report(j, c, manifest, out);
  return 0;
}

// ---------------------------------------------------------------- probe

struct ProbeArgs {
  ScorerArgs scorer;
  bool balance = false;
  bool strict_next = false;
  std::string stimuli;
};

ojson condition_json(const ConditionResult& r) {
  auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
  return {{"condition", r.condition}, {"items", r.item_count},   {"evaluated", r.evaluated},
          {"correct", r.correct},     {"skipped", r.skipped},    {"accuracy", opt(r.accuracy)},
          {"mean_prob_diff", opt(r.mean_prob_diff)}};
}

int run_probe_cmd(const ProbeArgs& a, const Common& c, std::span<const std::string> args, std::ostream& out) {
  auto scorer = open_scorer(a.scorer);
  Manifest manifest("probe", args);
  const auto stimuli = load_stimuli(a.stimuli);
  const auto report = run_probe(stimuli, *scorer, a.balance, a.scorer.seed, a.strict_next);

  ojson j;
  j["scorer"] = scorer->describe();
  j["seed"] = report.seed;
  j["balanced"] = report.balanced;
  j["conditions"] = ojson::array();
  for (const auto& r : report.conditions) j["conditions"].push_back(condition_json(r));
  j["overall"] = condition_json(report.overall);
  j["accuracy_mean"] = report.accuracy_mean;
  j["accuracy_std"] = report.accuracy_std;
  j["prob_diff_mean"] = report.prob_diff_mean;
  j["prob_diff_std"] = report.prob_diff_std;

  manifest.config() = {{"balance", a.balance}, {"strict_next", a.strict_next}, {"stimuli", a.stimuli}};
  describe_scorer(manifest, a.scorer, *scorer);
  manifest.set_seed(a.scorer.seed);
  manifest.add_input(a.stimuli);
  emit_report(j, c, manifest, out);
  return 0;
}

// ---------------------------------------------------------------- stimuli convert

struct ConvertArgs {
  std::string in;
  std::string out;
};

int run_convert(const ConvertArgs& a, const Common& c, std::span<const std::string> args, std::ostream& err) {
  Manifest manifest("stimuli convert", args);
  std::ifstream in(a.in);
  if (!in) throw Error(Errc::io_error, "cannot open " + a.in);
  AtomicFile file(a.out);
  const auto n = convert_tsv(in, file.stream());
  file.commit();
  err << "scramblekit: wrote " << n << " stimuli\n";
  manifest.config() = {{"input", a.in}, {"output", a.out}, {"stimuli", n}};
  manifest.add_input(a.in);
  manifest.add_output(a.out);
  manifest.write(c.manifest.empty() ? Manifest::default_path(a.out) : fs::path(c.manifest));
  return 0;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word-order perturbation, shuffle metrics, resampling and masked-LM probing", "scramblekit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(SCRAMBLEKIT_VERSION));

  Common common;
  PermuteArgs permute_args, window_args;
  setup_permute(app, "permute", permute_args, common, false);
  setup_permute(app, "window", window_args, common, true);

  ResampleArgs resample_args;
  auto* resample = app.add_subcommand("resample", "Draw a corpus of the same shape from the atom distribution");
  resample->add_option("--mode", resample_args.mode, "Atom distribution")
      ->check(CLI::IsMember({"frequency", "uniform"}));
  resample->add_option("--annotations", resample_args.annotations, "Entity span JSON lines; each span is one atom");
  resample->add_option("--seed", resample_args.seed, "Global seed");
  resample->add_option("--table-out", resample_args.table_out, "Also write the atom table as TSV");
  resample->add_option("IN", resample_args.in, "Input file or shard directory")->required();
  resample->add_option("OUT", resample_args.out, "Output file or directory")->required();
  add_common(resample, common, false);

  BleuArgs bleu_args;
  auto* bleu = app.add_subcommand("bleu", "Sentence BLEU of shuffled lines against their originals");
  bleu->add_option("--orders", bleu_args.orders, "Cumulative BLEU orders, comma separated");
  bleu->add_option("--sample", bleu_args.sample, "Lines to sample (clamped to the corpus)");
  bleu->add_option("--seed", bleu_args.seed, "Sampling seed");
  bleu->add_option("ORIG", bleu_args.original, "Original file or shard directory")->required();
  bleu->add_option("SHUF", bleu_args.shuffled, "Shuffled counterpart")->required();
  add_common(bleu, common, true);

  DeltaArgs delta_args;
  auto* delta = app.add_subcommand("delta", "Relative accuracy difference in percent");
  delta->add_option("--mode", delta_args.mode, "Denominator")->check(CLI::IsMember({"as-written", "table-consistent"}));
  delta->add_option("--a-or", delta_args.a_or, "Accuracy of the original model")->required();
  delta->add_option("--a-d", delta_args.a_d, "Accuracy of the perturbed model")->required();
  delta->add_option("--a-rand", delta_args.a_rand, "Random baseline accuracy");

  PllArgs pll_args;
  auto* pll_cmd = app.add_subcommand("pll", "Bootstrap pseudo-perplexity of a corpus");
  add_scorer_options(pll_cmd, pll_args.scorer);
  pll_cmd->add_option("--bootstrap", pll_args.bootstrap, "Rounds and draws per round, as k=K,m=M");
  pll_cmd->add_flag("--per-sentence", pll_args.per_sentence, "Include the PLL of every scored sentence");
  pll_cmd->add_option("CORPUS", pll_args.corpus, "Corpus file or shard directory")->required();
  add_common(pll_cmd, common, true);

  ProbeArgs probe_args;
  auto* probe = app.add_subcommand("probe", "Minimal-pair agreement probe");
  add_scorer_options(probe, probe_args.scorer);
  probe->add_flag("--balance", probe_args.balance, "Upsample number classes per condition first");
  probe->add_flag("--strict-next", probe_args.strict_next, "Round exact multiples of 100 up to the next one");
  probe->add_option("STIMULI", probe_args.stimuli, "Stimulus JSON lines")->required();
  add_common(probe, common, true);

  ConvertArgs convert_args;
  auto* stimuli = app.add_subcommand("stimuli", "Stimulus file utilities");
  stimuli->require_subcommand(1);
  auto* convert = stimuli->add_subcommand("convert", "Convert TSV stimuli to JSON lines");
  convert->add_option("IN", convert_args.in, "TSV input")->required();
  convert->add_option("OUT", convert_args.out, "JSON-lines output")->required();
  add_common(convert, common, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "scramblekit: " << e.what() << "\n\n";
    const CLI::App* shown = &app;
    while (!shown->get_subcommands().empty()) shown = shown->get_subcommands().front();
    err << shown->help();
    return kUsage;
  }

  const auto* selected = app.get_subcommands().front();
  const auto name = selected->get_name();
  try {
    if (name == "permute") return run_permute(permute_args, common, args, name, err);
    if (name == "window") {
      if (window_args.window_tokens == 0) window_args.window_tokens = 512;
      return run_permute(window_args, common, args, name, err);
    }
    if (name == "resample") return run_resample(resample_args, common, args);
    if (name == "bleu") return run_bleu(bleu_args, common, args, out);
    if (name == "delta") return run_delta(delta_args, out);
    if (name == "pll") return run_pll(pll_args, common, args, out, err);
    if (name == "probe") return run_probe_cmd(probe_args, common, args, out);
    if (name == "stimuli") return run_convert(convert_args, common, args, err);
  } catch (const UsageError& e) {
    err << "scramblekit " << name << ": " << e.what() << "\n";
    return kUsage;
  } catch (const ReportedFailure&) {
    return kDataError;
  } catch (const Error& e) {
    err << "scramblekit " << name << ": " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == Errc::invalid_argument ? kUsage : kDataError;
  } catch (const std::exception& e) {
    err << "scramblekit " << name << ": " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace scramblekit::cli
