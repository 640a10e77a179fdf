#include <nlohmann/json.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "ocrsynth/confusion.hpp"
#include "ocrsynth/errorgen.hpp"

using namespace ocrsynth;
namespace fs = std::filesystem;

namespace {

int cli(const std::string& args, const fs::path& stdout_path = {},
        const fs::path& stderr_path = {}) {
  return fixtures::run_command(std::string("'") + OCRSYNTH_BIN + "' " + args, stdout_path,
                               stderr_path);
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path clean_corpus(const fs::path& dir, std::size_t n_docs = 6) {
  const auto p = dir / "clean.jsonl";
  write_documents(fixtures::synthetic_corpus(n_docs, 4, 13), p, CorpusFormat::Jsonl);
  return p;
}

ConfusionTable known_table() {
  ConfusionTable t;
  t.add_substitution(U'0', U'o', 5);
  t.add_substitution(U'1', U'l', 3);
  t.add_substitution(U'm', U'n', 2);
  t.add_substitution(U'€', U'e', 4);
  return t;
}

}  // namespace

TEST_CASE("cli: zero-rate inject reproduces the input") {
  const auto dir = fixtures::temp_dir("cli_zero");
  const auto in = clean_corpus(dir);
  REQUIRE(cli("inject --in " + q(in) + " --out " + q(dir / "o") +
              " --p-delete 0 --p-insert 0 --p-swap 0 --p-confusion 0") == 0);
  CHECK(fixtures::slurp(dir / "o" / "corrupted.jsonl") == fixtures::slurp(in));
  CHECK(fixtures::slurp(dir / "o" / "errors.jsonl").empty());
  const auto pairs = ingest_corpus(dir / "o" / "pairs.jsonl", CorpusFormat::Jsonl);
  for (const auto& p : pairs) CHECK(p.ocred == p.golden);
}

TEST_CASE("cli: eval of a perfect corrector") {
  const auto dir = fixtures::temp_dir("cli_eval");
  const auto in = clean_corpus(dir);
  REQUIRE(cli("inject --in " + q(in) + " --out " + q(dir / "inj") + " --seed 3") == 0);
  REQUIRE(cli("eval --golden " + q(in) + " --ocred " + q(dir / "inj" / "corrupted.jsonl") +
                  " --fixed " + q(in) + " --name perfect --out " + q(dir / "ev"),
              dir / "stdout.txt") == 0);
  const auto table = fixtures::slurp(dir / "stdout.txt");
  CHECK(table.find("perfect\t100.000%\t100.000%") != std::string::npos);
  CHECK(fixtures::slurp(dir / "ev" / "report.txt") == table);
  const auto json = fixtures::slurp(dir / "ev" / "report.json");
  CHECK(json.find("{\"name\":\"perfect\",\"acc_increase\":100.0,\"word_accuracy\":100.0}") !=
        std::string::npos);
}

TEST_CASE("cli: learn recovers the support of the injected table") {
  const auto dir = fixtures::temp_dir("cli_learn");
  const auto in = clean_corpus(dir, 60);
  const auto table = known_table();
  save_table(table, dir / "known.tsv");
  REQUIRE(cli("inject --in " + q(in) + " --table " + q(dir / "known.tsv") +
              " --p-delete 0 --p-insert 0 --p-swap 0 --p-confusion 0.3 --seed 5 --out " +
              q(dir / "inj")) == 0);
  REQUIRE(cli("learn --in " + q(dir / "inj" / "pairs.jsonl") + " --fraction 1 --top 10 --out " +
                  q(dir / "learned"),
              dir / "top.txt") == 0);
  const auto learned = load_table(dir / "learned" / "confusions.tsv");
  std::set<ConfusionTable::Pair> want, got;
  for (const auto& [p, n] : table.substitutions()) want.insert(p);
  for (const auto& [p, n] : learned.substitutions()) got.insert(p);
  CHECK(got == want);
  CHECK(learned.deletions().empty());
  CHECK(learned.insertions().empty());
  CHECK(!fixtures::slurp(dir / "top.txt").empty());
}

TEST_CASE("cli: usage errors exit 1, bad input exits 1") {
  const auto dir = fixtures::temp_dir("cli_errors");
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("inject --in x --out " + q(dir) + " --no-such-flag") == 1);
  CHECK(cli("inject --out " + q(dir)) == 1);
  CHECK(cli("inject --in " + q(dir / "missing.jsonl") + " --out " + q(dir / "o")) == 1);
  CHECK(cli("inject --in x --out " + q(dir) + " --p-delete 1.5") == 1);
  fixtures::spit(dir / "bad.jsonl", "{\"text\":\"\xFF\"}\n");
  CHECK(cli("inject --in " + q(dir / "bad.jsonl") + " --out " + q(dir / "o"), {},
            dir / "err.txt") == 1);
  CHECK(fixtures::slurp(dir / "err.txt").find("offset") != std::string::npos);
  CHECK(cli("--help", dir / "help.txt") == 0);
  CHECK(fixtures::slurp(dir / "help.txt").find("inject") != std::string::npos);
}

TEST_CASE("cli: config file values yield to the command line") {
  const auto dir = fixtures::temp_dir("cli_config");
  const auto in = clean_corpus(dir);
  fixtures::spit(dir / "c.conf",
                 "# injection settings\n[inject]\np_delete = 0\np-insert = 0\np_swap = 0\n"
                 "p_confusion = 0\nseed = 9\n");
  REQUIRE(cli("inject --config " + q(dir / "c.conf") + " --in " + q(in) + " --out " +
              q(dir / "a")) == 0);
  CHECK(fixtures::slurp(dir / "a" / "corrupted.jsonl") == fixtures::slurp(in));

  REQUIRE(cli("inject --config " + q(dir / "c.conf") + " --p-delete 0.2 --in " + q(in) +
              " --out " + q(dir / "b")) == 0);
  CHECK(fixtures::slurp(dir / "b" / "corrupted.jsonl") != fixtures::slurp(in));
  const auto manifest = nlohmann::json::parse(fixtures::slurp(dir / "b" / "manifest.json"));
  CHECK(manifest["parameters"]["p-delete"] == "0.2");
  CHECK(manifest["seed"] == 9);

  fixtures::spit(dir / "broken.conf", "p_delete\n");
  CHECK(cli("inject --config " + q(dir / "broken.conf") + " --in " + q(in) + " --out " +
            q(dir / "c")) == 1);
}

TEST_CASE("cli: run.conf replays a run and jobs do not change outputs") {
  const auto dir = fixtures::temp_dir("cli_replay");
  const auto in = clean_corpus(dir, 20);
  REQUIRE(cli("inject --in " + q(in) + " --seed 77 --p-swap 0.05 --jobs 1 --out " +
              q(dir / "one")) == 0);
  REQUIRE(cli("inject --in " + q(in) + " --seed 77 --p-swap 0.05 --jobs 8 --out " +
              q(dir / "eight")) == 0);
  REQUIRE(cli("inject --config " + q(dir / "one" / "run.conf") + " --out " + q(dir / "again")) ==
          0);
  for (const char* f : {"corrupted.jsonl", "pairs.jsonl", "errors.jsonl"}) {
    CAPTURE(f);
    const auto ref = fixtures::slurp(dir / "one" / f);
    CHECK(!ref.empty());
    CHECK(fixtures::slurp(dir / "eight" / f) == ref);
    CHECK(fixtures::slurp(dir / "again" / f) == ref);
  }
  const auto manifest = nlohmann::json::parse(fixtures::slurp(dir / "one" / "manifest.json"));
  CHECK(manifest["subcommand"] == "inject");
  CHECK(manifest["seed"] == 77);
  CHECK(manifest["outputs"].size() == 3);
}

TEST_CASE("cli: split, export, lm-train and correct") {
  const auto dir = fixtures::temp_dir("cli_pipeline");
  const auto in = clean_corpus(dir, 10);
  save_table(known_table(), dir / "known.tsv");
  REQUIRE(cli("inject --in " + q(in) + " --table " + q(dir / "known.tsv") +
              " --p-delete 0 --p-insert 0 --p-swap 0 --p-confusion 0.2 --out " +
              q(dir / "inj")) == 0);
  const auto pairs = dir / "inj" / "pairs.jsonl";

  REQUIRE(cli("split --in " + q(pairs) + " --fraction 0.8 --out " + q(dir / "split")) == 0);
  const auto split_tsv = fixtures::slurp(dir / "split" / "split.tsv");
  CHECK(std::count(split_tsv.begin(), split_tsv.end(), '\n') == 11);
  std::size_t train = 0, pos = 0;
  while ((pos = split_tsv.find("\ttrain\n", pos)) != std::string::npos) ++train, ++pos;
  CHECK(train == 8);

  REQUIRE(cli("export --in " + q(pairs) + " --to parallel-txt --out " + q(dir / "exp")) == 0);
  CHECK(fs::exists(dir / "exp" / "train.input.txt"));
  CHECK(fs::exists(dir / "exp" / "validation.target.txt"));
  CHECK(cli("export --in " + q(pairs) + " --to csv --out " + q(dir / "bad")) == 1);

  REQUIRE(cli("lm-train --in " + q(in) + " --order 3 --out " + q(dir / "lm")) == 0);
  REQUIRE(cli("correct --in " + q(dir / "inj" / "corrupted.jsonl") + " --lm " +
              q(dir / "lm" / "lm.tsv") + " --table " + q(dir / "known.tsv") + " --out " +
              q(dir / "fix")) == 0);
  const auto fixed = ingest_documents(dir / "fix" / "fixed.jsonl", CorpusFormat::Jsonl);
  CHECK(fixed.size() == 10);
}
