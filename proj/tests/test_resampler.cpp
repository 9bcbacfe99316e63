#include <doctest.h>

#include <sstream>

#include "scramblekit/error.hpp"
#include "scramblekit/resampler.hpp"

using namespace scramblekit;

namespace {

std::vector<Sentence> corpus(const std::vector<std::string>& lines, const std::string& shard = "s0") {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(tokenize(lines[i], shard, i));
  return out;
}

}  // namespace

TEST_CASE("atom table counts unigrams and records the shape") {
  auto [table, shape] = build_atom_table(corpus({"a a b"}));
  CHECK(table.count("a") == 2);
  CHECK(table.count("b") == 1);
  CHECK(table.total == 3);
  REQUIRE(shape.shards.size() == 1);
  CHECK(shape.shards[0].atom_counts == std::vector<std::uint32_t>{3});
}

TEST_CASE("entity spans become single atoms") {
  AnnotationIndex ann;
  ann.add({"s0", 0, {{2, 4}}});
  auto c = corpus({"I love New York"});
  auto [table, shape] = build_atom_table(c, &ann);
  CHECK(table.count("I") == 1);
  CHECK(table.count("love") == 1);
  CHECK(table.count("New York") == 1);
  CHECK(table.count("New") == 0);
  CHECK(table.size() == 3);
  CHECK(shape.shards[0].atom_counts == std::vector<std::uint32_t>{3});
}

TEST_CASE("invalid spans and empty corpora are rejected") {
  auto s = tokenize("I love New York", "s0", 0);
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io_error;
  };
  std::vector<TokenSpan> out_of_bounds{{2, 5}};
  CHECK(code_of([&] { atomize(s, out_of_bounds); }) == Errc::invalid_span);
  std::vector<TokenSpan> overlap{{0, 2}, {1, 3}};
  CHECK(code_of([&] { atomize(s, overlap); }) == Errc::invalid_span);
  std::vector<TokenSpan> empty_span{{1, 1}};
  CHECK(code_of([&] { atomize(s, empty_span); }) == Errc::invalid_span);
  std::vector<TokenSpan> adjacent{{0, 2}, {2, 4}};
  CHECK(atomize(s, adjacent) == std::vector<std::string>{"I love", "New York"});

  CHECK(code_of([] { build_atom_table(std::vector<Sentence>{}); }) == Errc::empty_corpus);
  CHECK(code_of([] { build_atom_table(corpus({"", "  "})); }) == Errc::empty_corpus);
}

TEST_CASE("shape is tracked per shard including blank lines") {
  AtomTableBuilder b;
  for (auto& s : corpus({"a b", "", "c"}, "x.txt")) b.add(s);
  for (auto& s : corpus({"d"}, "y.txt")) b.add(s);
  auto [table, shape] = std::move(b).finish();
  REQUIRE(shape.shards.size() == 2);
  CHECK(shape.shards[0].shard == "x.txt");
  CHECK(shape.shards[0].atom_counts == std::vector<std::uint32_t>{2, 0, 1});
  CHECK(shape.shards[1].atom_counts == std::vector<std::uint32_t>{1});
  CHECK(shape.total_atoms() == 4);
  CHECK(shape.line_count() == 4);
  CHECK(table.total == 4);
}

TEST_CASE("atom table TSV round trip and parse errors") {
  AtomTable t;
  t.add("a", 2);
  t.add("New York", 5);
  std::stringstream ss;
  write_atom_table(ss, t);
  CHECK(ss.str() == "New York\t5\na\t2\n");
  auto back = read_atom_table(ss);
  CHECK(back.entries == t.entries);
  CHECK(back.total == 7);

  std::istringstream bad("a\tx\n");
  CHECK_THROWS_AS(read_atom_table(bad), Error);
  std::istringstream no_tab("a 3\n");
  CHECK_THROWS_AS(read_atom_table(no_tab), Error);
}

TEST_CASE("annotation sidecar parsing") {
  std::istringstream in(R"({"shard": "s0", "line": 0, "spans": [[2, 4]]}

{"shard": "s0", "line": 3, "spans": [[0, 1], [1, 3]]}
)");
  auto idx = read_annotations(in);
  CHECK(idx.size() == 2);
  auto spans = idx.find("s0", 3);
  REQUIRE(spans.size() == 2);
  CHECK(spans[1] == TokenSpan{1, 3});
  CHECK(idx.find("s0", 1).empty());
  CHECK(idx.find("s1", 0).empty());

  std::istringstream bad(R"({"shard": "s0", "line": 0, "spans": [[2]]})");
  CHECK_THROWS_AS(read_annotations(bad), Error);
  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(read_annotations(garbage), Error);
}

TEST_CASE("resampled corpus keeps the source shape and is deterministic") {
  auto c = corpus({"a a b", "", "b c d e"});
  auto [table, shape] = build_atom_table(c);
  for (auto mode : {ResampleMode::frequency, ResampleMode::uniform}) {
    auto out = resample_corpus(table, shape, mode, 17);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].lines.size() == 3);
    CHECK(split_whitespace(out[0].lines[0]).size() == 3);
    CHECK(out[0].lines[1].empty());
    CHECK(split_whitespace(out[0].lines[2]).size() == 4);
    for (const auto& line : out[0].lines)
      for (const auto& w : split_whitespace(line)) CHECK(table.count(w) > 0);
    CHECK(resample_corpus(table, shape, mode, 17)[0].lines == out[0].lines);
  }
}

TEST_CASE("frequency sampling of {a:2, b:1} hits 2/3 within three sigma") {
  AtomTable t;
  t.add("a", 2);
  t.add("b", 1);
  AtomSampler sampler(t, ResampleMode::frequency);
  CHECK(sampler.probability(0) == doctest::Approx(2.0 / 3.0));
  Rng rng(2024);
  std::size_t a = 0;
  constexpr std::size_t draws = 1'000'000;
  for (std::size_t i = 0; i < draws; ++i) a += sampler.draw(rng) == "a";
  const double freq = static_cast<double>(a) / draws;
  CHECK(freq >= 0.665);
  CHECK(freq <= 0.668);
}

TEST_CASE("uniform sampling ignores frequencies") {
  AtomTable t;
  t.add("a", 2);
  t.add("b", 1);
  AtomSampler sampler(t, ResampleMode::uniform);
  CHECK(sampler.probability(0) == doctest::Approx(0.5));
  CHECK(sampler.probability(1) == doctest::Approx(0.5));
  Rng rng(1);
  std::size_t a = 0;
  for (int i = 0; i < 200000; ++i) a += sampler.draw(rng) == "a";
  CHECK(static_cast<double>(a) / 200000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK_THROWS_AS(AtomSampler(AtomTable{}, ResampleMode::uniform), Error);
}

TEST_CASE("resample mode names") {
  CHECK(parse_resample_mode("frequency") == ResampleMode::frequency);
  CHECK(parse_resample_mode("uniform") == ResampleMode::uniform);
  CHECK_FALSE(parse_resample_mode("unigram"));
}
