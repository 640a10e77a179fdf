#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "ocrsynth/align.hpp"
#include "ocrsynth/errorgen.hpp"
#include "ocrsynth/metrics.hpp"

using namespace ocrsynth;

namespace {

InjectionConfig rates(double del, double ins, double swap, double conf, std::uint64_t seed = 1) {
  InjectionConfig c;
  c.p_delete = del;
  c.p_insert = ins;
  c.p_swap = swap;
  c.p_confusion = conf;
  c.seed = seed;
  return c;
}

std::string inject(const std::string& clean, const InjectionConfig& cfg,
                   const ConfusionTable& table = {}) {
  return inject_errors(Text::from_utf8(clean), cfg, table).corrupted.to_utf8();
}

ConfusionTable digit_table() {
  ConfusionTable t;
  t.add_substitution(U'0', U'o', 3);
  t.add_substitution(U'c', U'o', 1);
  t.add_substitution(U'1', U'l', 1);
  return t;
}

std::size_t non_newline(const Text& t) {
  return t.size() - static_cast<std::size_t>(std::count(t.chars().begin(), t.chars().end(), U'\n'));
}

}  // namespace

TEST_CASE("zero rates are the identity") {
  const auto docs = fixtures::synthetic_corpus(5, 4, 2);
  for (const auto& d : docs) {
    const auto r = inject_errors(d.text, rates(0, 0, 0, 0), digit_table());
    CHECK(r.corrupted == d.text);
    CHECK(r.log.entries.empty());
  }
}

TEST_CASE("certain errors") {
  {
    const auto r = inject_errors(Text::from_utf8("ab"), rates(1, 0, 0, 0));
    CHECK(r.corrupted.empty());
    CHECK(r.log.count(ErrorKind::Delete) == 2);
  }
  {
    ConfusionTable xb;
    xb.add_substitution(U'x', U'b');
    const auto r = inject_errors(Text::from_utf8("ab"), rates(0, 0, 0, 1, 1), xb);
    CHECK(r.corrupted.to_utf8() == "ax");
    REQUIRE(r.log.entries.size() == 1);
    CHECK(r.log.entries[0] == ErrorEntry{0, 1, ErrorKind::Confuse, U'b', U'x'});
  }
  CHECK(inject("abc\nde", rates(1, 0, 0, 0)) == "\n");
  InjectionConfig ins = rates(0, 1, 0, 0);
  ins.alphabet = {U'x'};
  CHECK(inject("ab\nc", ins) == "axbx\ncx");
  CHECK(inject("", ins).empty());
  CHECK(inject("abcde", rates(0, 0, 1, 0)) == "badce");
  // identical neighbours are never swapped
  CHECK(inject("aab", rates(0, 0, 1, 0)) == "aba");
  CHECK(inject("book", rates(0, 0, 0, 1), digit_table()).find('o') == std::string::npos);
  CHECK(inject("lull", rates(0, 0, 0, 1), digit_table()) == "1u11");
  // confusion is tried before swap; untouched targets never exist at p=1
  CHECK(inject("lax", rates(0, 0, 1, 1), digit_table()) == "1xa");
}

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(inject("a", rates(-0.1, 0, 0, 0)), InputError);
  CHECK_THROWS_AS(inject("a", rates(0, 1.1, 0, 0)), InputError);
  CHECK_THROWS_AS(inject("a", rates(0.6, 0, 0, 0.6)), InputError);
  CHECK_NOTHROW(inject("a", rates(0.5, 0, 0, 0.5)));
}

TEST_CASE("logs replay and account for the length change") {
  const auto docs = fixtures::synthetic_corpus(40, 3, 3);
  const auto table = digit_table();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (const auto& d : docs) {
      const auto r = inject_errors(d.text, rates(0.05, 0.05, 0.05, 0.3, seed), table);
      REQUIRE(replay_log(d.text, r.log) == r.corrupted);
      CHECK(r.corrupted.lines().size() == d.text.lines().size());
      CHECK(r.corrupted.size() + r.log.count(ErrorKind::Delete) ==
            d.text.size() + r.log.count(ErrorKind::Insert));
      const auto dist = levenshtein(d.text.chars(), r.corrupted.chars());
      if (r.log.entries.empty()) CHECK(dist == 0);
      // a swap costs at most two edits, every other entry at most one
      CHECK(dist <= r.log.entries.size() + r.log.count(ErrorKind::Swap));
      if (dist == 0 && !r.log.entries.empty()) {
        // only a deletion and an insertion can undo each other
        CHECK(r.log.count(ErrorKind::Delete) > 0);
        CHECK(r.log.count(ErrorKind::Insert) == r.log.count(ErrorKind::Delete));
      }
      for (const auto& e : r.log.entries) {
        if (e.kind == ErrorKind::Confuse)
          CHECK(table.count(*e.replacement, *e.original) > 0);
        if (e.kind == ErrorKind::Swap) CHECK(*e.original != *e.replacement);
      }
    }
  }
}

TEST_CASE("replay rejects logs that do not fit") {
  const Text clean = Text::from_utf8("abc");
  ErrorLog wrong_original{{{0, 1, ErrorKind::Delete, U'x', std::nullopt}}};
  CHECK_THROWS_AS(replay_log(clean, wrong_original), InputError);
  ErrorLog past_end{{{0, 7, ErrorKind::Insert, std::nullopt, U'x'}}};
  CHECK_THROWS_AS(replay_log(clean, past_end), InputError);
  ErrorLog bad_line{{{3, 0, ErrorKind::Delete, U'a', std::nullopt}}};
  CHECK_THROWS_AS(replay_log(clean, bad_line), InputError);
  ErrorLog ok{{{0, 0, ErrorKind::Swap, U'a', U'b'}, {0, 1, ErrorKind::Insert, std::nullopt, U'!'}}};
  CHECK(replay_log(clean, ok).to_utf8() == "ba!c");
  // deleting a character and inserting the same one after it leaves the text unchanged
  ErrorLog cancel{{{0, 0, ErrorKind::Delete, U'a', std::nullopt},
                   {0, 0, ErrorKind::Insert, std::nullopt, U'a'}}};
  CHECK(replay_log(clean, cancel) == clean);
}

TEST_CASE("lines are corrupted independently of each other") {
  const Text a = Text::from_utf8("first line here\nsecond line here\nthird line");
  const Text b = Text::from_utf8("something else\nsecond line here\nthird line");
  const auto cfg = rates(0.2, 0.2, 0.2, 0.0, 77);
  const auto ra = inject_errors(a, cfg).corrupted.lines();
  const auto rb = inject_errors(b, cfg).corrupted.lines();
  // alphabets differ between the texts, so pin one
  InjectionConfig pinned = cfg;
  pinned.alphabet = {U'x', U'y'};
  const auto pa = inject_errors(a, pinned).corrupted.lines();
  const auto pb = inject_errors(b, pinned).corrupted.lines();
  CHECK(pa[1] == pb[1]);
  CHECK(pa[2] == pb[2]);
  CHECK(ra.size() == rb.size());
}

TEST_CASE("empirical rates at moderate scale") {
  // ~130k clean characters; each rate within 5 standard errors.
  const auto docs = fixtures::synthetic_corpus(200, 10, 5);
  const auto cfg = rates(0.02, 0.03, 0.01, 0.0, 8);
  const auto ds = generate_dataset(docs, cfg, {}, 2);
  const double n = static_cast<double>(ds.stats.clean_chars);
  REQUIRE(n > 1e5);
  auto within = [](double hits, double trials, double p) {
    const double se = std::sqrt(p * (1 - p) / trials);
    return std::abs(hits / trials - p) <= 5 * se;
  };
  CHECK(within(static_cast<double>(ds.stats.deletions), n, cfg.p_delete));
  // one insertion draw follows every clean character, deleted or not
  CHECK(within(static_cast<double>(ds.stats.insertions), n, cfg.p_insert));
  CHECK(ds.stats.confusions == 0);
}

TEST_CASE("confusions follow the table's proportions") {
  const auto docs = fixtures::synthetic_corpus(200, 10, 6);
  const auto table = digit_table();
  const auto ds = generate_dataset(docs, rates(0, 0, 0, 0.5, 9), table);
  std::map<std::pair<char32_t, char32_t>, double> seen;
  double o_hits = 0;
  for (const auto& log : ds.logs)
    for (const auto& e : log.entries) {
      seen[{*e.replacement, *e.original}] += 1;
      if (*e.original == U'o') o_hits += 1;
    }
  REQUIRE(o_hits > 1000);
  const double p = 3.0 / 4.0;
  const double se = std::sqrt(p * (1 - p) / o_hits);
  CHECK(std::abs(seen[{U'0', U'o'}] / o_hits - p) <= 5 * se);
  CHECK(seen.size() == 3);
}

TEST_CASE("datasets do not depend on the number of jobs") {
  const auto docs = fixtures::synthetic_corpus(50, 5, 7);
  const auto cfg = rates(0.02, 0.02, 0.02, 0.1, 42);
  const auto one = generate_dataset(docs, cfg, digit_table(), 1);
  const auto eight = generate_dataset(docs, cfg, digit_table(), 8);
  CHECK(one.pairs == eight.pairs);
  CHECK(one.logs == eight.logs);
  const auto other_seed = generate_dataset(docs, rates(0.02, 0.02, 0.02, 0.1, 43), digit_table());
  CHECK(other_seed.pairs != one.pairs);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    CHECK(one.pairs[d].golden == docs[d].text);
    CHECK(one.pairs[d].doc_id == docs[d].id);
  }
  CHECK(one.stats.clean_chars == [&] {
    std::size_t n = 0;
    for (const auto& d : docs) n += non_newline(d.text);
    return n;
  }());
}

TEST_CASE("corrupting text lowers its score against the clean text") {
  const auto docs = fixtures::synthetic_corpus(20, 4, 8);
  const auto ds = generate_dataset(docs, rates(0.02, 0.02, 0.01, 0.0, 3));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& p = ds.pairs[d];
    // a perfect corrector recovers everything, doing nothing recovers nothing
    if (levenshtein(p.golden.chars(), p.ocred.chars()) > 0) {
      CHECK(acc_increase(p.golden, p.ocred, p.golden) == doctest::Approx(100.0));
      CHECK(acc_increase(p.golden, p.ocred, p.ocred) == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("error log jsonl round trip") {
  const auto docs = fixtures::synthetic_corpus(10, 3, 9);
  const auto ds = generate_dataset(docs, rates(0.05, 0.05, 0.05, 0.2, 1), digit_table());
  std::string all;
  for (std::size_t d = 0; d < docs.size(); ++d) all += format_log_jsonl(ds.logs[d], docs[d].id);
  const auto back = parse_log_jsonl(all);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto it = back.find(docs[d].id);
    if (ds.logs[d].entries.empty()) {
      CHECK(it == back.end());
      continue;
    }
    REQUIRE(it != back.end());
    CHECK(it->second == ds.logs[d]);
  }
  const ErrorLog one{{{0, 2, ErrorKind::Insert, std::nullopt, U'ך'}}};
  CHECK(format_log_jsonl(one, "d") ==
        "{\"doc\":\"d\",\"line\":0,\"index\":2,\"kind\":\"insert\",\"original\":\"\","
        "\"replacement\":\"ך\"}\n");
  CHECK_THROWS_AS(parse_log_jsonl("{\"doc\":\"d\"}\n"), InputError);
  CHECK_THROWS_AS(parse_log_jsonl("{\"doc\":\"d\",\"line\":0,\"index\":0,\"kind\":\"melt\","
                                  "\"original\":\"a\",\"replacement\":\"\"}\n"),
                  InputError);
}
