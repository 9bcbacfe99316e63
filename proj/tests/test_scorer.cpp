#include <doctest.h>

#include <cmath>

#include "scramblekit/error.hpp"
#include "scramblekit/scorer.hpp"
#include "test_util.hpp"

using namespace scramblekit;

namespace {

ScoreRequest request(std::vector<std::string> candidates) {
  return {"r1", {"The", "dog", "barks"}, 2, std::move(candidates)};
}

AtomTable table_a3_b1() {
  AtomTable t;
  t.add("a", 3);
  t.add("b", 1);
  return t;
}

}  // namespace

TEST_CASE("uniform scorer assigns -ln(V)") {
  UniformScorer four(4);
  auto r = four.score(request({"barks", "bark"}));
  CHECK(r.id == "r1");
  REQUIRE(r.logprobs.size() == 2);
  CHECK(r.logprobs[0] == doctest::Approx(-1.3862943611198906));
  CHECK(r.logprobs[1] == doctest::Approx(-1.3862943611198906));
  CHECK(UniformScorer(1).score(request({"x"})).logprobs[0] == 0.0);
  CHECK(UniformScorer(100).score(request({"x"})).logprobs[0] == doctest::Approx(-4.605170185988091));
  CHECK_THROWS_AS(UniformScorer(0), Error);
}

TEST_CASE("unigram scorer uses additive smoothing") {
  UnigramScorer s(table_a3_b1(), 1.0);
  auto r = s.score(request({"a", "z", "b"}));
  CHECK(r.logprobs[0] == doctest::Approx(std::log(4.0 / 6.0)));
  CHECK(r.logprobs[0] == doctest::Approx(-0.40546).epsilon(1e-5));
  CHECK(r.logprobs[1] == doctest::Approx(-1.79176).epsilon(1e-5));
  CHECK(r.logprobs[2] == doctest::Approx(std::log(2.0 / 6.0)));
  CHECK(r.skipped.empty());
}

TEST_CASE("unigram scorer with alpha 0 skips unseen candidates") {
  UnigramScorer s(table_a3_b1(), 0.0);
  auto r = s.score(request({"z", "a"}));
  CHECK(r.skipped == std::vector<std::size_t>{0});
  CHECK(r.is_skipped(0));
  CHECK(std::isfinite(r.logprobs[0]));
  CHECK(r.logprobs[1] == doctest::Approx(std::log(0.75)));
}

TEST_CASE("built-in scorers normalize over the full vocabulary") {
  for (double alpha : {0.0, 0.5, 1.0, 3.0}) {
    UnigramScorer s(table_a3_b1(), alpha);
    auto r = s.score(request({"a", "b"}));
    CHECK(std::exp(r.logprobs[0]) + std::exp(r.logprobs[1]) == doctest::Approx(1.0).epsilon(1e-12));
  }
  UniformScorer u(3);
  auto r = u.score(request({"x", "y", "z"}));
  double sum = 0;
  for (double lp : r.logprobs) sum += std::exp(lp);
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("scorers are pure") {
  UnigramScorer s(table_a3_b1(), 1.0);
  auto req = request({"a", "b", "q"});
  auto r1 = s.score(req), r2 = s.score(req);
  CHECK(r1.logprobs == r2.logprobs);
}

TEST_CASE("requests are validated") {
  UniformScorer u(4);
  ScoreRequest bad{"x", {"a"}, 1, {"b"}};
  CHECK_THROWS_AS(u.score(bad), Error);
  ScoreRequest none{"x", {"a"}, 0, {}};
  CHECK_THROWS_AS(u.score(none), Error);
}

TEST_CASE("wire codec") {
  ScoreRequest req{"1", {"The", "dog", "<mask>"}, 2, {"barks", "bark"}};
  CHECK(encode_request(req) ==
        R"({"id":"1","tokens":["The","dog","<mask>"],"mask_index":2,"candidates":["barks","bark"]})");
  auto back = decode_request(encode_request(req));
  CHECK(back.id == req.id);
  CHECK(back.tokens == req.tokens);
  CHECK(back.mask_index == 2);
  CHECK(back.candidates == req.candidates);

  auto resp = decode_response(R"({"id":"1","logprobs":[-0.5,-2.25]})");
  CHECK(resp.logprobs == std::vector<double>{-0.5, -2.25});
  check_response(req, resp);

  auto skipped = decode_response(R"({"id":"1","logprobs":[-0.5,0],"skipped":[1]})");
  CHECK(skipped.is_skipped(1));
  CHECK(decode_response(encode_response(skipped)).skipped == skipped.skipped);

  CHECK(handshake_line() == R"({"protocol":"scramblekit-score","version":1})");
  check_handshake(handshake_line());
  CHECK_THROWS_AS(check_handshake(R"({"protocol":"scramblekit-score","version":2})"), Error);
  CHECK_THROWS_AS(check_handshake("hello"), Error);
}

TEST_CASE("response contract violations are protocol errors") {
  ScoreRequest req{"1", {"The", "dog", "<mask>"}, 2, {"barks", "bark"}};
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io_error;
  };
  CHECK(code_of([&] { check_response(req, decode_response(R"({"id":"1","logprobs":[-1]})")); }) ==
        Errc::protocol_error);
  CHECK(code_of([&] { check_response(req, decode_response(R"({"id":"2","logprobs":[-1,-2]})")); }) ==
        Errc::protocol_error);
  CHECK(code_of([] { decode_response("{oops"); }) == Errc::protocol_error);
  CHECK(code_of([] { decode_response(R"({"id":"1","logprobs":[null]})"); }) == Errc::protocol_error);
  CHECK(code_of([] { decode_response(R"({"id":"1","logprobs":[-1],"skipped":[3]})"); }) == Errc::protocol_error);
  CHECK(code_of([] { decode_response(R"({"id":"1","error":"boom"})"); }) == Errc::protocol_error);
  CHECK(code_of([] { decode_response("[1,2]"); }) == Errc::protocol_error);
}

TEST_CASE("function scorer checks the response contract") {
  FunctionScorer liar([](const ScoreRequest& r) { return ScoreResponse{r.id, {-1.0}, {}}; }, "liar");
  CHECK_THROWS_AS(liar.score(request({"a", "b"})), Error);
  FunctionScorer ok([](const ScoreRequest& r) { return ScoreResponse{r.id, std::vector<double>(r.candidates.size(), -2.0), {}}; },
                    "ok");
  auto batch = ok.score_batch(std::vector<ScoreRequest>{request({"a"}), request({"b", "c"})});
  CHECK(batch.size() == 2);
  CHECK(batch[1].logprobs.size() == 2);
  CHECK(ok.describe() == "ok");
}

TEST_CASE("make_scorer parses scorer specs") {
  auto u = make_scorer("uniform:100");
  CHECK(u->describe() == "uniform:100");
  CHECK(u->score(request({"x"})).logprobs[0] == doctest::Approx(-4.605170185988091));

  test::TempDir dir;
  test::write_file(dir.path() / "t.tsv", "a\t3\nb\t1\n");
  ScorerOptions opts;
  opts.unigram_alpha = 1.0;
  auto g = make_scorer("unigram:" + (dir.path() / "t.tsv").string(), opts);
  CHECK(g->score(request({"a"})).logprobs[0] == doctest::Approx(std::log(4.0 / 6.0)));

  CHECK_THROWS_AS(make_scorer("uniform:x"), Error);
  CHECK_THROWS_AS(make_scorer("uniform"), Error);
  CHECK_THROWS_AS(make_scorer("magic:1"), Error);
  CHECK_THROWS_AS(make_scorer("unigram:/nonexistent/table.tsv"), Error);
}
