#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "scramblekit/corpus.hpp"
#include "scramblekit/error.hpp"
#include "scramblekit/random.hpp"
#include "test_util.hpp"

using namespace scramblekit;

TEST_CASE("tokenize splits on whitespace runs and keeps the raw line") {
  auto s = tokenize("Other related taxa include", "s0", 7);
  CHECK(s.tokens == std::vector<std::string>{"Other", "related", "taxa", "include"});
  CHECK(s.raw == "Other related taxa include");
  CHECK(s.shard == "s0");
  CHECK(s.id == 7);

  CHECK(tokenize("").tokens.empty());
  CHECK(tokenize("a  b").tokens == std::vector<std::string>{"a", "b"});
  CHECK(tokenize(" \t a\tb \r").tokens == std::vector<std::string>{"a", "b"});
  CHECK(tokenize(" \t a\tb \r").raw == " \t a\tb \r");
}

TEST_CASE("tokenize round-trips through single-space join") {
  Rng rng(11);
  const char alphabet[] = "ab c\t  d\xC3\xA9";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string line;
    auto len = rng.below(30);
    for (std::uint64_t i = 0; i < len; ++i) line += alphabet[rng.below(sizeof(alphabet) - 1)];
    auto s = tokenize(line);
    for (const auto& t : s.tokens) CHECK_FALSE(t.empty());
    CHECK(tokenize(join(s.tokens)).tokens == s.tokens);
  }
}

TEST_CASE("atoms and atom sequences") {
  Atom single("dog");
  CHECK_FALSE(single.conjoined());
  Atom pair(std::vector<std::string>{"New", "York"});
  CHECK(pair.conjoined());
  CHECK(pair.text() == "New York");

  std::vector<std::string> toks{"I", "love", "New", "York"};
  auto seq = AtomSequence::singletons(toks);
  CHECK(seq.size() == 4);
  CHECK(seq.source_len == 4);
  CHECK(seq.flatten() == toks);
  CHECK(seq.text() == "I love New York");
}

TEST_CASE("effective_seed modes") {
  SeedPolicy fixed{SeedMode::fixed, 42};
  CHECK(effective_seed(fixed, "anything", 0) == 42);
  CHECK(effective_seed(fixed, "other", 12345) == 42);

  SeedPolicy shard{SeedMode::per_shard, 42};
  CHECK(effective_seed(shard, "s0", 7) == effective_seed(shard, "s0", 8));
  CHECK(effective_seed(shard, "s0", 7) != effective_seed(shard, "s1", 7));

  SeedPolicy sentence{SeedMode::per_sentence, 42};
  CHECK(effective_seed(sentence, "s0", 7) != effective_seed(sentence, "s0", 8));
  CHECK(effective_seed(sentence, "s0", 7) == effective_seed(sentence, "s0", 7));
  CHECK(effective_seed(sentence, "s0", 7) != effective_seed({SeedMode::per_sentence, 43}, "s0", 7));
}

TEST_CASE("per-sentence seeds do not collide over a million ids") {
  SeedPolicy sentence{SeedMode::per_sentence, 42};
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(2'000'000);
  for (std::uint64_t id = 0; id < 1'000'000; ++id) seen.insert(effective_seed(sentence, "s0", id));
  CHECK(seen.size() == 1'000'000);
}

TEST_CASE("seed mode names") {
  for (auto m : {SeedMode::fixed, SeedMode::per_sentence, SeedMode::per_shard})
    CHECK(parse_seed_mode(to_string(m)) == m);
  CHECK_FALSE(parse_seed_mode("random").has_value());
}

TEST_CASE("Rng bounded draws are in range and roughly uniform") {
  Rng rng(3);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto x = rng.below(7);
    REQUIRE(x < 7);
    ++hist[x];
  }
  for (int h : hist) CHECK(h == doctest::Approx(10000).epsilon(0.05));
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(Rng(5).next() == Rng(5).next());
}

TEST_CASE("sharded corpus listing and streaming") {
  test::TempDir dir;
  test::write_file(dir.path() / "b.txt", "x y\nz\n");
  test::write_file(dir.path() / "a.txt", "one two\n\nthree");
  test::write_file(dir.path() / "notes.md", "ignored\n");

  auto shards = list_shards(dir.path());
  REQUIRE(shards.size() == 2);
  CHECK(shards[0].shard == "a.txt");
  CHECK(shards[1].shard == "b.txt");

  ShardReader reader(shards[0]);
  auto s0 = reader.next();
  REQUIRE(s0);
  CHECK(s0->id == 0);
  CHECK(s0->shard == "a.txt");
  CHECK(s0->tokens.size() == 2);
  auto s1 = reader.next();
  REQUIRE(s1);
  CHECK(s1->tokens.empty());
  auto s2 = reader.next();
  REQUIRE(s2);
  CHECK(s2->id == 2);
  CHECK(s2->raw == "three");
  CHECK_FALSE(reader.next());

  auto single = list_shards(dir.path() / "b.txt");
  REQUIRE(single.size() == 1);
  CHECK(single[0].shard == "b.txt");
  CHECK(read_shard(single[0]).size() == 2);

  CHECK_THROWS_AS(list_shards(dir.path() / "missing.txt"), Error);
}
