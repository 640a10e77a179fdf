#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ocrsynth {

/// Bad user input: malformed files, invalid parameters. CLI maps it to exit 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Utf8Error : public InputError {
 public:
  Utf8Error(std::size_t offset, const std::string& what)
      : InputError(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Broken internal invariant. CLI maps it to exit 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Strict UTF-8 decode (rejects overlongs, surrogates, values above U+10FFFF).
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view chars);
std::string encode_utf8(char32_t c);

/// Immutable sequence of Unicode scalar values. Indexing is by scalar, never by byte.
class Text {
 public:
  Text() = default;
  explicit Text(std::u32string chars) : chars_(std::move(chars)) {}

  static Text from_utf8(std::string_view bytes) { return Text(decode_utf8(bytes)); }
  std::string to_utf8() const { return encode_utf8(chars_); }

  const std::u32string& chars() const { return chars_; }
  std::size_t size() const { return chars_.size(); }
  bool empty() const { return chars_.empty(); }

  /// Split on line feed. A text with k line feeds has k+1 lines, so joining
  /// the lines with '\n' gives back the original text.
  std::vector<std::u32string_view> lines() const;

  friend bool operator==(const Text&, const Text&) = default;

 private:
  std::u32string chars_;
};

Text join_lines(const std::vector<std::u32string>& lines);

/// Canonical composition (NFC). Off by default everywhere; Hebrew final forms
/// are distinct scalars either way.
Text normalize_nfc(const Text& text);

struct ParallelPair {
  Text ocred;
  Text golden;
  std::string doc_id;

  friend bool operator==(const ParallelPair&, const ParallelPair&) = default;
};

class DelimiterSet {
 public:
  /// Space, tab, LF, CR and . , ; : ! ? " ' ( ) [ ] - and em dash.
  DelimiterSet();
  explicit DelimiterSet(std::set<char32_t> delimiters);

  bool contains(char32_t c) const { return delimiters_.count(c) != 0; }
  const std::set<char32_t>& delimiters() const { return delimiters_; }

 private:
  std::set<char32_t> delimiters_;
};

using Word = std::u32string;

/// Maximal runs of non-delimiter scalars; empty runs are dropped.
std::vector<Word> tokenize(const Text& text, const DelimiterSet& delims = DelimiterSet());

// --- corpus files ---------------------------------------------------------

enum class CorpusFormat { PlainDir, Jsonl, Tsv };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view corpus_format_name(CorpusFormat format);

/// Backslash escaping used by every TSV this library writes:
/// `\\`, `\t`, `\n`, `\r`.
std::string escape_field(std::string_view raw);
std::string unescape_field(std::string_view escaped);

/// A single document of clean text with its identifier.
struct Document {
  Text text;
  std::string id;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Parallel corpora.
///   plain-dir: `<id>.ocr.txt` / `<id>.gold.txt` file pairs, ordered by id.
///   jsonl:     `{"ocr":..., "gold":..., "id":...}`, id optional.
///   tsv:       `ocr<TAB>gold[<TAB>id]`, fields escaped.
/// Missing ids become the zero-based record ordinal.
std::vector<ParallelPair> ingest_corpus(const std::filesystem::path& path, CorpusFormat format,
                                        bool nfc = false);
void write_corpus(const std::vector<ParallelPair>& pairs, const std::filesystem::path& path,
                  CorpusFormat format);

/// Single-sided corpora (clean text, or a corrector's output).
///   plain-dir: every `*.txt` file, id = file stem, ordered by file name.
///   jsonl:     `{"text":..., "id":...}`.
///   tsv:       `text[<TAB>id]`.
std::vector<Document> ingest_documents(const std::filesystem::path& path, CorpusFormat format,
                                       bool nfc = false);
void write_documents(const std::vector<Document>& docs, const std::filesystem::path& path,
                     CorpusFormat format);

/// Whole-file read with UTF-8 validation; errors name the file and byte offset.
std::string read_file_utf8(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace ocrsynth
