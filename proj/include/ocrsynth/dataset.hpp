#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ocrsynth/text.hpp"

namespace ocrsynth {

enum class SplitTag : std::uint8_t { Unassigned, Train, Validation };

std::string_view split_tag_name(SplitTag tag);

struct LineRecord {
  Text input;   // OCR side
  Text target;  // golden side
  std::string doc_id;
  std::size_t line_index = 0;
  SplitTag split = SplitTag::Unassigned;

  friend bool operator==(const LineRecord&, const LineRecord&) = default;
};

struct Rejection {
  std::string doc_id;
  std::size_t ocred_lines = 0;
  std::size_t golden_lines = 0;
};

struct LinePairDataset {
  std::vector<LineRecord> records;
  std::vector<Rejection> rejections;

  /// Distinct doc ids in order of first appearance.
  std::vector<std::string> documents() const;
  std::size_t count(SplitTag tag) const;
};

/// One record per line of every pair whose sides have equal line counts.
/// Lines empty on both sides are dropped; unequal pairs go to `rejections`.
LinePairDataset build_line_pairs(const std::vector<ParallelPair>& pairs);

/// Document-level split: the document list (first-appearance order) is
/// shuffled with SplitMix64(seed) and the first ceil(fraction * n_docs)
/// documents become train, capped at n_docs - 1 so validation is never
/// empty. Throws InputError for fewer than two documents or a fraction
/// outside (0, 1).
LinePairDataset split(LinePairDataset ds, double train_fraction, std::uint64_t seed);

enum class ExportFormat { Jsonl, ParallelTxt, Tsv };

ExportFormat parse_export_format(std::string_view name);
std::string_view export_format_name(ExportFormat format);

/// Writes train.* and validation.* files into out_dir:
///   jsonl:        `{"input":...,"target":...,"doc_id":...,"line":...}` per record
///   parallel-txt: `<split>.input.txt` / `<split>.target.txt`, line i pairs with line i
///   tsv:          `input<TAB>target`, fields escaped
/// Returns the paths written. Throws InputError on an unassigned record or an
/// unwritable destination.
std::vector<std::filesystem::path> export_dataset(const LinePairDataset& ds, ExportFormat format,
                                                  const std::filesystem::path& out_dir);

/// Reads an export back. jsonl restores every field; parallel-txt and tsv
/// carry no ids, so doc_id is empty and line_index is the row number.
LinePairDataset read_export(ExportFormat format, const std::filesystem::path& dir);

}  // namespace ocrsynth
