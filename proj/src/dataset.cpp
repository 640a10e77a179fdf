#include "ocrsynth/dataset.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "ocrsynth/confusion.hpp"
#include "ocrsynth/rng.hpp"

namespace ocrsynth {

namespace fs = std::filesystem;

std::string_view split_tag_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::Unassigned: return "unassigned";
    case SplitTag::Train: return "train";
    case SplitTag::Validation: return "validation";
  }
  return "?";
}

std::vector<std::string> LinePairDataset::documents() const {
  std::vector<std::string> docs;
  std::set<std::string_view> seen;
  for (const auto& r : records)
    if (seen.insert(r.doc_id).second) docs.push_back(r.doc_id);
  return docs;
}

std::size_t LinePairDataset::count(SplitTag tag) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [tag](const LineRecord& r) { return r.split == tag; }));
}

LinePairDataset build_line_pairs(const std::vector<ParallelPair>& pairs) {
  LinePairDataset ds;
  for (const auto& p : pairs) {
    const auto in = p.ocred.lines();
    const auto tg = p.golden.lines();
    if (in.size() != tg.size()) {
      ds.rejections.push_back({p.doc_id, in.size(), tg.size()});
      continue;
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in[i].empty() && tg[i].empty()) continue;
      ds.records.push_back({Text(std::u32string(in[i])), Text(std::u32string(tg[i])), p.doc_id, i,
                            SplitTag::Unassigned});
    }
  }
  return ds;
}

LinePairDataset split(LinePairDataset ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InputError("train fraction must be in (0, 1)");
  std::vector<std::string> docs = ds.documents();
  if (docs.size() < 2)
    throw InputError("splitting needs at least 2 documents, got " + std::to_string(docs.size()));
  SplitMix64 rng(seed);
  shuffle(docs, rng);
  const std::size_t n_train =
      std::clamp<std::size_t>(fraction_count(train_fraction, docs.size()), 1, docs.size() - 1);
  std::map<std::string, SplitTag> tag;
  for (std::size_t i = 0; i < docs.size(); ++i)
    tag[docs[i]] = i < n_train ? SplitTag::Train : SplitTag::Validation;
  for (auto& r : ds.records) r.split = tag.at(r.doc_id);
  return ds;
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "jsonl") return ExportFormat::Jsonl;
  if (name == "parallel-txt") return ExportFormat::ParallelTxt;
  if (name == "tsv") return ExportFormat::Tsv;
  throw InputError("unknown export format '" + std::string(name) +
                   "' (expected jsonl, parallel-txt or tsv)");
}

std::string_view export_format_name(ExportFormat format) {
  switch (format) {
    case ExportFormat::Jsonl: return "jsonl";
    case ExportFormat::ParallelTxt: return "parallel-txt";
    case ExportFormat::Tsv: return "tsv";
  }
  return "?";
}

namespace {

constexpr SplitTag kSplits[] = {SplitTag::Train, SplitTag::Validation};

void ensure_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
}

// Lines of a file written with a trailing LF after every record.
std::vector<std::string_view> file_rows(std::string_view bytes) {
  std::vector<std::string_view> rows;
  while (!bytes.empty()) {
    const auto eol = bytes.find('\n');
    rows.push_back(bytes.substr(0, eol));
    bytes.remove_prefix(eol == std::string_view::npos ? bytes.size() : eol + 1);
  }
  return rows;
}

}  // namespace

std::vector<fs::path> export_dataset(const LinePairDataset& ds, ExportFormat format,
                                     const fs::path& out_dir) {
  if (ds.count(SplitTag::Unassigned) != 0)
    throw InputError("export requires a split dataset (found unassigned records)");
  ensure_writable_dir(out_dir);
  std::vector<fs::path> written;
  for (SplitTag tag : kSplits) {
    const std::string base(split_tag_name(tag));
    std::string a, b;
    for (const auto& r : ds.records) {
      if (r.split != tag) continue;
      switch (format) {
        case ExportFormat::Jsonl: {
          nlohmann::ordered_json rec;
          rec["input"] = r.input.to_utf8();
          rec["target"] = r.target.to_utf8();
          rec["doc_id"] = r.doc_id;
          rec["line"] = r.line_index;
          a += rec.dump();
          a += '\n';
          break;
        }
        case ExportFormat::ParallelTxt:
          a += r.input.to_utf8();
          a += '\n';
          b += r.target.to_utf8();
          b += '\n';
          break;
        case ExportFormat::Tsv:
          a += escape_field(r.input.to_utf8());
          a += '\t';
          a += escape_field(r.target.to_utf8());
          a += '\n';
          break;
      }
    }
    switch (format) {
      case ExportFormat::Jsonl:
        written.push_back(out_dir / (base + ".jsonl"));
        write_file(written.back(), a);
        break;
      case ExportFormat::ParallelTxt:
        written.push_back(out_dir / (base + ".input.txt"));
        write_file(written.back(), a);
        written.push_back(out_dir / (base + ".target.txt"));
        write_file(written.back(), b);
        break;
      case ExportFormat::Tsv:
        written.push_back(out_dir / (base + ".tsv"));
        write_file(written.back(), a);
        break;
    }
  }
  return written;
}

LinePairDataset read_export(ExportFormat format, const fs::path& dir) {
  LinePairDataset ds;
  for (SplitTag tag : kSplits) {
    const std::string base(split_tag_name(tag));
    switch (format) {
      case ExportFormat::Jsonl: {
        const std::string bytes = read_file_utf8(dir / (base + ".jsonl"));
        std::size_t row = 0;
        for (auto line : file_rows(bytes)) {
          try {
            const auto rec = nlohmann::json::parse(line);
            ds.records.push_back({Text::from_utf8(rec.at("input").get<std::string>()),
                                  Text::from_utf8(rec.at("target").get<std::string>()),
                                  rec.value("doc_id", std::string()),
                                  rec.value("line", std::size_t{0}), tag});
          } catch (const nlohmann::json::exception& e) {
            throw InputError(base + ".jsonl row " + std::to_string(row) + ": " + e.what());
          }
          ++row;
        }
        break;
      }
      case ExportFormat::ParallelTxt: {
        const std::string in = read_file_utf8(dir / (base + ".input.txt"));
        const std::string tg = read_file_utf8(dir / (base + ".target.txt"));
        const auto in_rows = file_rows(in);
        const auto tg_rows = file_rows(tg);
        if (in_rows.size() != tg_rows.size())
          throw InputError(base + ": input and target files differ in line count");
        for (std::size_t i = 0; i < in_rows.size(); ++i)
          ds.records.push_back(
              {Text::from_utf8(in_rows[i]), Text::from_utf8(tg_rows[i]), "", i, tag});
        break;
      }
      case ExportFormat::Tsv: {
        const std::string bytes = read_file_utf8(dir / (base + ".tsv"));
        const auto rows = file_rows(bytes);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const auto tab = rows[i].find('\t');
          if (tab == std::string_view::npos || rows[i].find('\t', tab + 1) != std::string_view::npos)
            throw InputError(base + ".tsv row " + std::to_string(i) + ": expected two columns");
          ds.records.push_back({Text::from_utf8(unescape_field(rows[i].substr(0, tab))),
                                Text::from_utf8(unescape_field(rows[i].substr(tab + 1))), "", i,
                                tag});
        }
        break;
      }
    }
  }
  return ds;
}

}  // namespace ocrsynth
