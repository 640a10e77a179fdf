#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ocrsynth/align.hpp"
#include "ocrsynth/text.hpp"

namespace ocrsynth {

/// Counts of single-character OCR errors. Orientation follows the
/// "Character / Fix" convention: a substitution (source, target) means the
/// OCR produced `source` where the true text has `target`.
class ConfusionTable {
 public:
  using Pair = std::pair<char32_t, char32_t>;

  /// Adds `count` to (source, target). Identity pairs and zero counts are
  /// rejected with InvariantError.
  void add_substitution(char32_t source, char32_t target, std::uint64_t count = 1);
  /// OCR output has `c`, the golden text does not.
  void add_deletion(char32_t c, std::uint64_t count = 1);
  /// The golden text has `c`, the OCR output does not.
  void add_insertion(char32_t c, std::uint64_t count = 1);

  void merge(const ConfusionTable& other);

  const std::map<Pair, std::uint64_t>& substitutions() const { return substitutions_; }
  const std::map<char32_t, std::uint64_t>& deletions() const { return deletions_; }
  const std::map<char32_t, std::uint64_t>& insertions() const { return insertions_; }
  std::uint64_t total_substitutions() const { return total_substitutions_; }

  std::uint64_t count(char32_t source, char32_t target) const;
  /// count / total_substitutions; 0 for absent pairs.
  double relative_frequency(char32_t source, char32_t target) const;

  /// (source, count) for every source observed in place of `target`,
  /// in code-point order of source.
  std::vector<std::pair<char32_t, std::uint64_t>> sources_of(char32_t target) const;
  /// Sum of substitution counts whose true character is `target`.
  std::uint64_t target_count(char32_t target) const;

  bool empty() const {
    return substitutions_.empty() && deletions_.empty() && insertions_.empty();
  }

  friend bool operator==(const ConfusionTable&, const ConfusionTable&) = default;

 private:
  std::map<Pair, std::uint64_t> substitutions_;
  std::map<char32_t, std::uint64_t> deletions_;
  std::map<char32_t, std::uint64_t> insertions_;
  std::uint64_t total_substitutions_ = 0;
  // target -> (source -> count), kept in step with substitutions_.
  std::map<char32_t, std::map<char32_t, std::uint64_t>> by_target_;
};

struct LearnOptions {
  double learn_fraction = 0.7;
  std::uint64_t seed = 0;
  Scoring scoring{};
  std::uint64_t cell_limit = kDefaultCellLimit;
  unsigned jobs = 1;
};

struct LearnResult {
  ConfusionTable table;
  std::size_t pairs_used = 0;
  std::size_t skipped_empty = 0;
  std::vector<std::string> used_ids;
};

/// Shuffles the pairs with splitmix64(seed), keeps the first
/// ceil(fraction * n), aligns each (ocred, golden) by character and counts
/// every non-Match column. Pairs with an empty side are skipped and counted.
LearnResult learn_confusions(const std::vector<ParallelPair>& pairs,
                             const LearnOptions& options = {});

/// Counts the non-Match columns of one character alignment into `table`.
/// Left is OCR output, right is golden.
void count_columns(const CharAlignment& alignment, ConfusionTable& table);

struct ConfusionEntry {
  char32_t source;
  char32_t target;
  std::uint64_t count;

  friend bool operator==(const ConfusionEntry&, const ConfusionEntry&) = default;
};

/// Most frequent substitutions, count descending, ties by (source, target) code points.
std::vector<ConfusionEntry> top_k(const ConfusionTable& table, std::size_t k);

/// TSV: `source<TAB>target<TAB>count` rows in top_k order, then optional
/// `#DELETIONS` and `#INSERTIONS` sections of `char<TAB>count` rows
/// (count descending, ties by code point). Characters use the escaped-field
/// encoding so tab and line feed survive.
std::string format_table(const ConfusionTable& table);
ConfusionTable parse_table(std::string_view tsv);

void save_table(const ConfusionTable& table, const std::filesystem::path& path);
ConfusionTable load_table(const std::filesystem::path& path);

/// ceil(fraction * n) computed so that representation error in `fraction`
/// never adds an extra element (e.g. 0.7 * 10 gives 7).
std::size_t fraction_count(double fraction, std::size_t n);

}  // namespace ocrsynth
