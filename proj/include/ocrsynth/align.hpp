#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ocrsynth/text.hpp"

namespace ocrsynth {

struct Scoring {
  int match = 0;
  int mismatch = -1;
  int gap = -1;

  /// Throws InputError unless match > mismatch and match > gap.
  void validate() const;
};

enum class ColumnKind : std::uint8_t { Match, Substitute, Delete, Insert };

/// Delete: symbol only on the left (first sequence). Insert: only on the right.
template <typename Symbol>
struct Column {
  ColumnKind kind;
  Symbol left{};
  Symbol right{};

  friend bool operator==(const Column&, const Column&) = default;
};

template <typename Symbol>
struct Alignment {
  std::vector<Column<Symbol>> columns;
  long long score = 0;

  std::vector<Symbol> left_projection() const {
    std::vector<Symbol> out;
    for (const auto& c : columns)
      if (c.kind != ColumnKind::Insert) out.push_back(c.left);
    return out;
  }
  std::vector<Symbol> right_projection() const {
    std::vector<Symbol> out;
    for (const auto& c : columns)
      if (c.kind != ColumnKind::Delete) out.push_back(c.right);
    return out;
  }
  std::size_t count(ColumnKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        columns.begin(), columns.end(), [kind](const auto& c) { return c.kind == kind; }));
  }
};

using CharAlignment = Alignment<char32_t>;
using WordAlignment = Alignment<Word>;

/// Upper bound on |a|*|b| for the full DP matrix; larger inputs are rejected.
inline constexpr std::uint64_t kDefaultCellLimit = 100'000'000;

/// Unit-cost edit distance, two rolling rows.
template <typename Symbol>
std::size_t levenshtein(std::span<const Symbol> a, std::span<const Symbol> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  return levenshtein<char32_t>(std::span(a.data(), a.size()), std::span(b.data(), b.size()));
}

inline std::size_t levenshtein(const std::vector<Word>& a, const std::vector<Word>& b) {
  return levenshtein<Word>(std::span(a), std::span(b));
}

/// Needleman-Wunsch global alignment with a full score matrix. Traceback
/// starts at the bottom-right cell and, among moves that reproduce the cell
/// score, prefers diagonal, then Delete, then Insert.
template <typename Symbol>
Alignment<Symbol> nw_align(std::span<const Symbol> a, std::span<const Symbol> b,
                           const Scoring& s = {},
                           std::uint64_t cell_limit = kDefaultCellLimit) {
  s.validate();
  const std::size_t n = a.size(), m = b.size();
  if (static_cast<std::uint64_t>(n + 1) * (m + 1) > cell_limit)
    throw InputError("alignment of " + std::to_string(n) + " x " + std::to_string(m) +
                     " symbols exceeds the cell limit of " + std::to_string(cell_limit));
  const std::size_t w = m + 1;
  std::vector<long long> dp((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) dp[j] = static_cast<long long>(j) * s.gap;
  for (std::size_t i = 1; i <= n; ++i) {
    dp[i * w] = static_cast<long long>(i) * s.gap;
    for (std::size_t j = 1; j <= m; ++j) {
      const long long diag = dp[(i - 1) * w + j - 1] + (a[i - 1] == b[j - 1] ? s.match : s.mismatch);
      const long long del = dp[(i - 1) * w + j] + s.gap;
      const long long ins = dp[i * w + j - 1] + s.gap;
      dp[i * w + j] = std::max({diag, del, ins});
    }
  }

  Alignment<Symbol> out;
  out.score = dp[n * w + m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const long long here = dp[i * w + j];
    if (i > 0 && j > 0) {
      const bool same = a[i - 1] == b[j - 1];
      if (here == dp[(i - 1) * w + j - 1] + (same ? s.match : s.mismatch)) {
        out.columns.push_back(
            {same ? ColumnKind::Match : ColumnKind::Substitute, a[i - 1], b[j - 1]});
        --i, --j;
        continue;
      }
    }
    if (i > 0 && here == dp[(i - 1) * w + j] + s.gap) {
      out.columns.push_back({ColumnKind::Delete, a[i - 1], Symbol{}});
      --i;
      continue;
    }
    out.columns.push_back({ColumnKind::Insert, Symbol{}, b[j - 1]});
    --j;
  }
  std::reverse(out.columns.begin(), out.columns.end());
  return out;
}

inline CharAlignment nw_align(std::u32string_view a, std::u32string_view b,
                              const Scoring& s = {},
                              std::uint64_t cell_limit = kDefaultCellLimit) {
  return nw_align<char32_t>(std::span(a.data(), a.size()), std::span(b.data(), b.size()), s,
                            cell_limit);
}

/// Symbols are whole words compared by exact string equality.
inline WordAlignment word_align(const std::vector<Word>& a, const std::vector<Word>& b,
                                const Scoring& s = {},
                                std::uint64_t cell_limit = kDefaultCellLimit) {
  return nw_align<Word>(std::span(a), std::span(b), s, cell_limit);
}

/// Character alignment of two texts: one alignment per line when both have
/// the same number of lines, otherwise a single whole-text alignment.
std::vector<CharAlignment> align_texts(const Text& a, const Text& b, const Scoring& s = {},
                                       std::uint64_t cell_limit = kDefaultCellLimit);

}  // namespace ocrsynth
