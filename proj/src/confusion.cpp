#include "ocrsynth/confusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "ocrsynth/parallel.hpp"
#include "ocrsynth/rng.hpp"

namespace ocrsynth {

void ConfusionTable::add_substitution(char32_t source, char32_t target, std::uint64_t count) {
  if (source == target)
    throw InvariantError("identity confusion pair U+" + std::to_string(source) + " rejected");
  if (count == 0) throw InvariantError("confusion counts must be positive");
  substitutions_[{source, target}] += count;
  by_target_[target][source] += count;
  total_substitutions_ += count;
}

void ConfusionTable::add_deletion(char32_t c, std::uint64_t count) {
  if (count == 0) throw InvariantError("confusion counts must be positive");
  deletions_[c] += count;
}

void ConfusionTable::add_insertion(char32_t c, std::uint64_t count) {
  if (count == 0) throw InvariantError("confusion counts must be positive");
  insertions_[c] += count;
}

void ConfusionTable::merge(const ConfusionTable& other) {
  for (const auto& [pair, n] : other.substitutions_) add_substitution(pair.first, pair.second, n);
  for (const auto& [c, n] : other.deletions_) add_deletion(c, n);
  for (const auto& [c, n] : other.insertions_) add_insertion(c, n);
}

std::uint64_t ConfusionTable::count(char32_t source, char32_t target) const {
  auto it = substitutions_.find({source, target});
  return it == substitutions_.end() ? 0 : it->second;
}

double ConfusionTable::relative_frequency(char32_t source, char32_t target) const {
  if (total_substitutions_ == 0) return 0.0;
  return static_cast<double>(count(source, target)) / static_cast<double>(total_substitutions_);
}

std::vector<std::pair<char32_t, std::uint64_t>> ConfusionTable::sources_of(char32_t target) const {
  auto it = by_target_.find(target);
  if (it == by_target_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::uint64_t ConfusionTable::target_count(char32_t target) const {
  auto it = by_target_.find(target);
  if (it == by_target_.end()) return 0;
  std::uint64_t total = 0;
  for (const auto& [source, n] : it->second) total += n;
  return total;
}

std::size_t fraction_count(double fraction, std::size_t n) {
  const double exact = fraction * static_cast<double>(n);
  const double rounded = std::round(exact);
  // Within a few ulps of an integer counts as that integer.
  if (std::abs(exact - rounded) <= 1e-9 * std::max(1.0, exact))
    return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(exact));
}

void count_columns(const CharAlignment& alignment, ConfusionTable& table) {
  for (const auto& col : alignment.columns) {
    switch (col.kind) {
      case ColumnKind::Match: break;
      case ColumnKind::Substitute: table.add_substitution(col.left, col.right); break;
      case ColumnKind::Delete: table.add_deletion(col.left); break;
      case ColumnKind::Insert: table.add_insertion(col.right); break;
    }
  }
}

LearnResult learn_confusions(const std::vector<ParallelPair>& pairs, const LearnOptions& options) {
  if (pairs.empty()) throw InputError("learn_confusions needs at least one pair");
  if (!(options.learn_fraction > 0.0 && options.learn_fraction <= 1.0))
    throw InputError("learn fraction must be in (0, 1]");

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(options.seed);
  shuffle(order, rng);
  order.resize(fraction_count(options.learn_fraction, pairs.size()));

  std::vector<ConfusionTable> partial(order.size());
  std::vector<char> skipped(order.size(), 0);
  parallel_for(order.size(), options.jobs, [&](std::size_t k) {
    const ParallelPair& p = pairs[order[k]];
    if (p.ocred.empty() || p.golden.empty()) {
      skipped[k] = 1;
      return;
    }
    for (const auto& a : align_texts(p.ocred, p.golden, options.scoring, options.cell_limit))
      count_columns(a, partial[k]);
  });

  LearnResult result;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (skipped[k]) {
      ++result.skipped_empty;
      continue;
    }
    result.table.merge(partial[k]);
    result.used_ids.push_back(pairs[order[k]].doc_id);
    ++result.pairs_used;
  }
  return result;
}

std::vector<ConfusionEntry> top_k(const ConfusionTable& table, std::size_t k) {
  std::vector<ConfusionEntry> all;
  all.reserve(table.substitutions().size());
  for (const auto& [pair, n] : table.substitutions()) all.push_back({pair.first, pair.second, n});
  // substitutions() is already in (source, target) order, so a stable sort on
  // count alone gives the declared tie rule.
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& x, const auto& y) { return x.count > y.count; });
  if (all.size() > k) all.resize(k);
  return all;
}

namespace {

std::string char_field(char32_t c) { return escape_field(encode_utf8(c)); }

std::vector<std::pair<char32_t, std::uint64_t>> sorted_counts(
    const std::map<char32_t, std::uint64_t>& m) {
  std::vector<std::pair<char32_t, std::uint64_t>> v(m.begin(), m.end());
  std::stable_sort(v.begin(), v.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return v;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw InputError("confusion table line " + std::to_string(line_no) + ": " + why);
}

char32_t parse_char(std::string_view field, std::size_t line_no) {
  std::u32string chars;
  try {
    chars = decode_utf8(unescape_field(field));
  } catch (const InputError& e) {
    malformed(line_no, e.what());
  }
  if (chars.size() != 1) malformed(line_no, "expected exactly one character, got '" +
                                                std::string(field) + "'");
  return chars[0];
}

std::uint64_t parse_count(std::string_view field, std::size_t line_no) {
  std::uint64_t value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end)
    malformed(line_no, "invalid count '" + std::string(field) + "'");
  if (value == 0) malformed(line_no, "count must be positive");
  return value;
}

}  // namespace

std::string format_table(const ConfusionTable& table) {
  std::string out;
  for (const auto& e : top_k(table, table.substitutions().size())) {
    out += char_field(e.source);
    out += '\t';
    out += char_field(e.target);
    out += '\t';
    out += std::to_string(e.count);
    out += '\n';
  }
  auto section = [&out](const char* header, const std::map<char32_t, std::uint64_t>& m) {
    if (m.empty()) return;
    out += header;
    out += '\n';
    for (const auto& [c, n] : sorted_counts(m)) {
      out += char_field(c);
      out += '\t';
      out += std::to_string(n);
      out += '\n';
    }
  };
  section("#DELETIONS", table.deletions());
  section("#INSERTIONS", table.insertions());
  return out;
}

ConfusionTable parse_table(std::string_view tsv) {
  enum class Section { Substitutions, Deletions, Insertions } section = Section::Substitutions;
  bool seen_deletions = false, seen_insertions = false;
  ConfusionTable table;
  std::size_t line_no = 0;
  while (!tsv.empty()) {
    ++line_no;
    const auto eol = tsv.find('\n');
    std::string_view line = tsv.substr(0, eol);
    tsv.remove_prefix(eol == std::string_view::npos ? tsv.size() : eol + 1);
    if (line == "#DELETIONS") {
      if (seen_deletions || seen_insertions) malformed(line_no, "misplaced #DELETIONS header");
      seen_deletions = true;
      section = Section::Deletions;
      continue;
    }
    if (line == "#INSERTIONS") {
      if (seen_insertions) malformed(line_no, "duplicate #INSERTIONS header");
      seen_insertions = true;
      section = Section::Insertions;
      continue;
    }
    std::vector<std::string_view> cols;
    for (std::string_view rest = line;;) {
      const auto tab = rest.find('\t');
      cols.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (section == Section::Substitutions) {
      if (cols.size() != 3) malformed(line_no, "expected source<TAB>target<TAB>count");
      const char32_t source = parse_char(cols[0], line_no);
      const char32_t target = parse_char(cols[1], line_no);
      const std::uint64_t n = parse_count(cols[2], line_no);
      if (source == target) malformed(line_no, "identity pair");
      if (table.count(source, target) != 0) malformed(line_no, "duplicate pair");
      table.add_substitution(source, target, n);
    } else {
      if (cols.size() != 2) malformed(line_no, "expected char<TAB>count");
      const char32_t c = parse_char(cols[0], line_no);
      const std::uint64_t n = parse_count(cols[1], line_no);
      const auto& existing =
          section == Section::Deletions ? table.deletions() : table.insertions();
      if (existing.count(c)) malformed(line_no, "duplicate character");
      if (section == Section::Deletions)
        table.add_deletion(c, n);
      else
        table.add_insertion(c, n);
    }
  }
  return table;
}

void save_table(const ConfusionTable& table, const std::filesystem::path& path) {
  write_file(path, format_table(table));
}

ConfusionTable load_table(const std::filesystem::path& path) {
  return parse_table(read_file_utf8(path));
}

}  // namespace ocrsynth
