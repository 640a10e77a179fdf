#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocrsynth/confusion.hpp"
#include "ocrsynth/text.hpp"

namespace ocrsynth {

struct InjectionConfig {
  double p_delete = 0.01;
  double p_insert = 0.01;
  double p_swap = 0.005;
  double p_confusion = 0.06;
  /// Characters for random insertion. Empty means "every character observed
  /// in the input" (per text for inject_errors, per corpus for generate_dataset).
  std::vector<char32_t> alphabet;
  std::uint64_t seed = 0;

  /// Throws InputError if a probability is outside [0, 1] or
  /// p_delete + p_confusion > 1.
  void validate() const;
};

enum class ErrorKind : std::uint8_t { Delete, Insert, Swap, Confuse };

std::string_view error_kind_name(ErrorKind kind);
ErrorKind parse_error_kind(std::string_view name);

/// One injected error, positioned in the clean text.
///   Delete:  `original` removed.
///   Confuse: `original` replaced by `replacement`.
///   Swap:    `original` (at char_index) and its successor `replacement` exchanged.
///   Insert:  `replacement` added right after the clean character at char_index.
struct ErrorEntry {
  std::size_t line_index = 0;
  std::size_t char_index = 0;
  ErrorKind kind = ErrorKind::Delete;
  std::optional<char32_t> original;
  std::optional<char32_t> replacement;

  friend bool operator==(const ErrorEntry&, const ErrorEntry&) = default;
};

struct ErrorLog {
  std::vector<ErrorEntry> entries;

  std::size_t count(ErrorKind kind) const;
  friend bool operator==(const ErrorLog&, const ErrorLog&) = default;
};

struct InjectionResult {
  Text corrupted;
  ErrorLog log;
};

/// Corrupts each line of `clean` independently, left to right, with a line
/// generator SplitMix64(derive_seed(cfg.seed, line_index)). Per character c:
///   1. delete c with p_delete;
///   2. otherwise, if c is a target in `table`, with p_confusion replace it by
///      one of its sources drawn proportionally to the counts;
///   3. otherwise, if c has a successor that differs from it, with p_swap
///      swap the two and skip the successor;
///   4. after every clean character (both, for a swapped pair) insert a
///      uniform draw from the alphabet with p_insert.
/// Draw order per character: one uniform for (1); one for (2) and, on a
/// hit, one integer for the source; one for (3); for each (4) one uniform
/// and, on a hit, one integer for the alphabet index.
InjectionResult inject_errors(const Text& clean, const InjectionConfig& cfg,
                              const ConfusionTable& table = {});

/// Applies a log to the clean text. inject_errors output always replays to
/// its corrupted text; throws InputError if the log does not fit the text.
Text replay_log(const Text& clean, const ErrorLog& log);

struct ErrorStats {
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t swaps = 0;
  std::size_t confusions = 0;
  std::size_t clean_chars = 0;

  std::size_t total() const { return deletions + insertions + swaps + confusions; }
};

struct GeneratedDataset {
  std::vector<ParallelPair> pairs;  // ocred = corrupted, golden = clean
  std::vector<ErrorLog> logs;       // one per document
  ErrorStats stats;
};

/// Document d is corrupted with seed derive_seed(cfg.seed, d), so the output
/// does not depend on `jobs` or on processing order.
GeneratedDataset generate_dataset(const std::vector<Document>& clean_corpus,
                                  const InjectionConfig& cfg, const ConfusionTable& table = {},
                                  unsigned jobs = 1);

/// Sorted set of characters appearing in the documents (line feeds excluded).
std::vector<char32_t> observed_alphabet(const std::vector<Document>& docs);

/// `{"doc":..., "line":..., "index":..., "kind":..., "original":..., "replacement":...}`
/// per entry; absent characters are written as "".
std::string format_log_jsonl(const ErrorLog& log, const std::string& doc_id);
/// Entries grouped by their "doc" field, file order preserved within a document.
std::map<std::string, ErrorLog> parse_log_jsonl(std::string_view jsonl);

}  // namespace ocrsynth
