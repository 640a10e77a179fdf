#pragma once

// Test-only helpers: synthetic corpora and independent oracles. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "ocrsynth/rng.hpp"
#include "ocrsynth/text.hpp"

namespace fixtures {

using ocrsynth::Document;
using ocrsynth::SplitMix64;
using ocrsynth::Text;

inline const std::vector<std::string>& words() {
  static const std::vector<std::string> w = {
      "the",     "of",      "and",     "to",      "in",      "a",       "is",      "that",
      "for",     "it",      "as",      "was",     "with",    "be",      "by",      "on",
      "not",     "he",      "this",    "are",     "or",      "his",     "from",    "at",
      "which",   "but",     "have",    "an",      "had",     "they",    "you",     "were",
      "their",   "one",     "all",     "we",      "can",     "her",     "has",     "there",
      "been",    "if",      "more",    "when",    "will",    "would",   "who",     "so",
      "no",      "newspaper", "editor", "letter", "council", "market",  "harbour", "street",
      "morning", "evening", "society", "meeting", "report",  "village", "railway", "weather",
      "during",  "between", "against", "another", "because", "through", "without", "together",
      "public",  "general", "special", "printed", "history", "journal", "kingdom", "company",
      "yesterday", "government", "community", "committee", "correspondent", "announcement",
      "people",  "country", "reading", "writing", "article", "column",  "bulletin", "edition",
      "school",  "teacher", "student", "library", "museum",  "theatre", "concert", "festival",
      "winter",  "summer",  "autumn",  "spring",  "river",   "mountain", "valley", "garden",
      "little",  "great",   "young",   "old",     "new",     "first",   "last",    "long",
      "house",   "family",  "children", "mother", "father",  "brother", "sister",  "friend",
      "said",    "made",    "found",   "called",  "known",   "given",   "taken",   "shown",
      "city",    "town",    "office",  "court",   "church",  "bridge",  "station", "hospital"};
  return w;
}

/// Deterministic prose-like corpus: sentences drawn from a fixed word list,
/// lines of at most ~70 characters, `lines_per_doc` lines per document.
inline std::vector<Document> synthetic_corpus(std::size_t n_docs, std::size_t lines_per_doc,
                                              std::uint64_t seed) {
  SplitMix64 rng(seed);
  const auto& w = words();
  std::vector<Document> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::string text;
    for (std::size_t l = 0; l < lines_per_doc; ++l) {
      std::string line;
      bool sentence_start = true;
      while (line.size() < 60) {
        std::string word = w[rng.next_below(w.size())];
        if (sentence_start) word[0] = static_cast<char>(word[0] - 'a' + 'A');
        sentence_start = false;
        if (!line.empty()) line += ' ';
        line += word;
        const auto r = rng.next_below(20);
        if (r == 0) {
          line += '.';
          sentence_start = true;
        } else if (r == 1) {
          line += ',';
        }
      }
      if (l) text += '\n';
      text += line;
    }
    docs.push_back({Text::from_utf8(text), "doc" + std::to_string(d)});
  }
  return docs;
}

inline std::size_t char_count(const std::vector<Document>& docs) {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.text.size();
  return n;
}

/// Edit distance straight from its recursive definition, memoized on suffix
/// positions.
template <typename Seq>
std::size_t recursive_levenshtein(const Seq& a, const Seq& b) {
  std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
  std::function<long(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t j) -> long {
    if (i == a.size()) return static_cast<long>(b.size() - j);
    if (j == b.size()) return static_cast<long>(a.size() - i);
    long& m = memo[i][j];
    if (m >= 0) return m;
    m = std::min({rec(i + 1, j) + 1, rec(i, j + 1) + 1,
                  rec(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1)});
    return m;
  };
  return static_cast<std::size_t>(rec(0, 0));
}

/// Every string over `alphabet` with length <= max_len (including "").
inline std::vector<std::u32string> all_strings(const std::u32string& alphabet,
                                               std::size_t max_len) {
  std::vector<std::u32string> out{U""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (char32_t c : alphabet) out.push_back(out[i] + c);
    begin = end;
  }
  return out;
}

inline std::u32string random_string(SplitMix64& rng, const std::u32string& alphabet,
                                    std::size_t max_len) {
  const std::size_t len = rng.next_below(max_len + 1);
  std::u32string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.next_below(alphabet.size())]);
  return s;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ocrsynth_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

/// Runs a shell command, returns its exit status; stdout/stderr go to files
/// when given.
inline int run_command(const std::string& cmd, const std::filesystem::path& stdout_path = {},
                       const std::filesystem::path& stderr_path = {}) {
  std::string full = cmd;
  full += stdout_path.empty() ? " >/dev/null" : " >'" + stdout_path.string() + "'";
  full += stderr_path.empty() ? " 2>/dev/null" : " 2>'" + stderr_path.string() + "'";
  const int status = std::system(full.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace fixtures
