#include "ocrsynth/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

namespace ocrsynth {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  auto fail = [&](const char* why) {
    throw Utf8Error(i, "malformed UTF-8 at byte offset " + std::to_string(i) + ": " + why);
  };
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      fail("invalid lead byte");
    }
    if (i + len > n) fail("truncated sequence");
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) fail("invalid continuation byte");
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min) fail("overlong encoding");
    if (cp >= 0xD800 && cp <= 0xDFFF) fail("surrogate code point");
    if (cp > 0x10FFFF) fail("code point above U+10FFFF");
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

std::string encode_utf8(std::u32string_view chars) {
  std::string out;
  out.reserve(chars.size());
  for (char32_t c : chars) out += encode_utf8(c);
  return out;
}

std::vector<std::u32string_view> Text::lines() const {
  std::vector<std::u32string_view> out;
  std::u32string_view rest(chars_);
  for (;;) {
    const auto pos = rest.find(U'\n');
    if (pos == std::u32string_view::npos) {
      out.push_back(rest);
      return out;
    }
    out.push_back(rest.substr(0, pos));
    rest.remove_prefix(pos + 1);
  }
}

Text join_lines(const std::vector<std::u32string>& lines) {
  std::u32string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back(U'\n');
    out += lines[i];
  }
  return Text(std::move(out));
}

Text normalize_nfc(const Text& text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw InvariantError("ICU NFC normalizer unavailable");
  const std::string utf8 = text.to_utf8();
  const auto src = icu::UnicodeString::fromUTF8(utf8);
  icu::UnicodeString dst = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw InvariantError("ICU NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return Text::from_utf8(out);
}

DelimiterSet::DelimiterSet()
    : delimiters_{U' ', U'\t', U'\n', U'\r', U'.', U',', U';', U':', U'!',
                  U'?', U'"', U'\'', U'(', U')', U'[', U']', U'-', U'—'} {}

DelimiterSet::DelimiterSet(std::set<char32_t> delimiters) : delimiters_(std::move(delimiters)) {
  if (delimiters_.empty()) throw InputError("delimiter set must not be empty");
}

std::vector<Word> tokenize(const Text& text, const DelimiterSet& delims) {
  std::vector<Word> words;
  Word current;
  for (char32_t c : text.chars()) {
    if (delims.contains(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "plain-dir") return CorpusFormat::PlainDir;
  if (name == "jsonl") return CorpusFormat::Jsonl;
  if (name == "tsv") return CorpusFormat::Tsv;
  throw InputError("unknown corpus format '" + std::string(name) +
                   "' (expected plain-dir, jsonl or tsv)");
}

std::string_view corpus_format_name(CorpusFormat format) {
  switch (format) {
    case CorpusFormat::PlainDir: return "plain-dir";
    case CorpusFormat::Jsonl: return "jsonl";
    case CorpusFormat::Tsv: return "tsv";
  }
  return "?";
}

std::string escape_field(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    if (escaped[i] != '\\') {
      out.push_back(escaped[i]);
      continue;
    }
    if (++i == escaped.size()) throw InputError("dangling backslash in escaped field");
    switch (escaped[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw InputError(std::string("unknown escape \\") + escaped[i]);
    }
  }
  return out;
}

std::string read_file_utf8(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = std::move(buf).str();
  try {
    decode_utf8(bytes);
  } catch (const Utf8Error& e) {
    throw Utf8Error(e.offset(), path.string() + ": " + e.what());
  }
  return bytes;
}

void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

namespace {

Text make_text(std::string_view utf8, bool nfc) {
  Text t = Text::from_utf8(utf8);
  return nfc ? normalize_nfc(t) : t;
}

std::vector<std::string_view> split_view(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = s.find(sep);
    if (pos == std::string_view::npos) {
      out.push_back(s);
      return out;
    }
    out.push_back(s.substr(0, pos));
    s.remove_prefix(pos + 1);
  }
}

// Non-blank lines of a JSONL/TSV file; a trailing LF does not start a record.
std::vector<std::string_view> record_lines(std::string_view bytes) {
  std::vector<std::string_view> out;
  for (auto line : split_view(bytes, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

json parse_record(std::string_view line, std::size_t index) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw InputError("record " + std::to_string(index) + ": invalid JSON: " + e.what());
  }
}

std::string string_field(const json& rec, const char* key, std::size_t index, bool required) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) {
    if (required)
      throw InputError("record " + std::to_string(index) + ": missing field \"" + key + "\"");
    return {};
  }
  if (!it->is_string())
    throw InputError("record " + std::to_string(index) + ": field \"" + key +
                     "\" is not a string");
  return it->get<std::string>();
}

std::string id_or_ordinal(std::string id, std::size_t index) {
  return id.empty() ? std::to_string(index) : id;
}

void check_unique_ids(const std::vector<std::string>& ids) {
  std::set<std::string_view> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second) throw InputError("duplicate document id '" + id + "'");
}

void check_file_id(const std::string& id) {
  if (id.empty() || id.find('/') != std::string::npos || id == "." || id == "..")
    throw InputError("document id '" + id + "' cannot be used as a file name");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create directory " + dir.string());
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<ParallelPair> ingest_corpus(const fs::path& path, CorpusFormat format, bool nfc) {
  std::vector<ParallelPair> pairs;
  switch (format) {
    case CorpusFormat::Jsonl: {
      const std::string bytes = read_file_utf8(path);
      const auto lines = record_lines(bytes);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const json rec = parse_record(lines[i], i);
        if (!rec.is_object()) throw InputError("record " + std::to_string(i) + ": not an object");
        ParallelPair p;
        p.ocred = make_text(string_field(rec, "ocr", i, true), nfc);
        p.golden = make_text(string_field(rec, "gold", i, true), nfc);
        p.doc_id = id_or_ordinal(string_field(rec, "id", i, false), i);
        pairs.push_back(std::move(p));
      }
      break;
    }
    case CorpusFormat::Tsv: {
      const std::string bytes = read_file_utf8(path);
      const auto lines = record_lines(bytes);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto cols = split_view(lines[i], '\t');
        if (cols.size() < 2)
          throw InputError("record " + std::to_string(i) + ": missing gold column");
        if (cols.size() > 3)
          throw InputError("record " + std::to_string(i) + ": too many columns");
        ParallelPair p;
        p.ocred = make_text(unescape_field(cols[0]), nfc);
        p.golden = make_text(unescape_field(cols[1]), nfc);
        p.doc_id = id_or_ordinal(cols.size() == 3 ? unescape_field(cols[2]) : "", i);
        pairs.push_back(std::move(p));
      }
      break;
    }
    case CorpusFormat::PlainDir: {
      if (!fs::is_directory(path)) throw InputError(path.string() + " is not a directory");
      std::map<std::string, std::pair<fs::path, fs::path>> by_id;
      for (const auto& entry : fs::directory_iterator(path)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (ends_with(name, ".ocr.txt"))
          by_id[name.substr(0, name.size() - 8)].first = entry.path();
        else if (ends_with(name, ".gold.txt"))
          by_id[name.substr(0, name.size() - 9)].second = entry.path();
      }
      std::size_t index = 0;
      for (const auto& [id, files] : by_id) {
        if (files.first.empty() || files.second.empty())
          throw InputError("record " + std::to_string(index) + " ('" + id + "'): missing " +
                           (files.first.empty() ? "ocr" : "gold") + " file");
        pairs.push_back({make_text(read_file_utf8(files.first), nfc),
                         make_text(read_file_utf8(files.second), nfc), id});
        ++index;
      }
      break;
    }
  }
  std::vector<std::string> ids;
  for (const auto& p : pairs) ids.push_back(p.doc_id);
  check_unique_ids(ids);
  return pairs;
}

void write_corpus(const std::vector<ParallelPair>& pairs, const fs::path& path,
                  CorpusFormat format) {
  switch (format) {
    case CorpusFormat::Jsonl: {
      std::string out;
      for (const auto& p : pairs) {
        ordered_json rec;
        rec["ocr"] = p.ocred.to_utf8();
        rec["gold"] = p.golden.to_utf8();
        rec["id"] = p.doc_id;
        out += rec.dump();
        out += '\n';
      }
      write_file(path, out);
      break;
    }
    case CorpusFormat::Tsv: {
      std::string out;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        out += escape_field(pairs[i].ocred.to_utf8());
        out += '\t';
        out += escape_field(pairs[i].golden.to_utf8());
        if (pairs[i].doc_id != std::to_string(i)) {
          out += '\t';
          out += escape_field(pairs[i].doc_id);
        }
        out += '\n';
      }
      write_file(path, out);
      break;
    }
    case CorpusFormat::PlainDir: {
      ensure_dir(path);
      for (const auto& p : pairs) {
        check_file_id(p.doc_id);
        write_file(path / (p.doc_id + ".ocr.txt"), p.ocred.to_utf8());
        write_file(path / (p.doc_id + ".gold.txt"), p.golden.to_utf8());
      }
      break;
    }
  }
}

std::vector<Document> ingest_documents(const fs::path& path, CorpusFormat format, bool nfc) {
  std::vector<Document> docs;
  switch (format) {
    case CorpusFormat::Jsonl: {
      const std::string bytes = read_file_utf8(path);
      const auto lines = record_lines(bytes);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const json rec = parse_record(lines[i], i);
        if (!rec.is_object()) throw InputError("record " + std::to_string(i) + ": not an object");
        docs.push_back({make_text(string_field(rec, "text", i, true), nfc),
                        id_or_ordinal(string_field(rec, "id", i, false), i)});
      }
      break;
    }
    case CorpusFormat::Tsv: {
      const std::string bytes = read_file_utf8(path);
      const auto lines = record_lines(bytes);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto cols = split_view(lines[i], '\t');
        if (cols.size() > 2)
          throw InputError("record " + std::to_string(i) + ": too many columns");
        docs.push_back({make_text(unescape_field(cols[0]), nfc),
                        id_or_ordinal(cols.size() == 2 ? unescape_field(cols[1]) : "", i)});
      }
      break;
    }
    case CorpusFormat::PlainDir: {
      if (!fs::is_directory(path)) throw InputError(path.string() + " is not a directory");
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
          files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files)
        docs.push_back({make_text(read_file_utf8(f), nfc), f.stem().string()});
      break;
    }
  }
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.id);
  check_unique_ids(ids);
  return docs;
}

void write_documents(const std::vector<Document>& docs, const fs::path& path,
                     CorpusFormat format) {
  switch (format) {
    case CorpusFormat::Jsonl: {
      std::string out;
      for (const auto& d : docs) {
        ordered_json rec;
        rec["text"] = d.text.to_utf8();
        rec["id"] = d.id;
        out += rec.dump();
        out += '\n';
      }
      write_file(path, out);
      break;
    }
    case CorpusFormat::Tsv: {
      std::string out;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        out += escape_field(docs[i].text.to_utf8());
        // An empty text with an ordinal id would be a blank line, which readers skip.
        if (docs[i].id != std::to_string(i) || docs[i].text.empty()) {
          out += '\t';
          out += escape_field(docs[i].id);
        }
        out += '\n';
      }
      write_file(path, out);
      break;
    }
    case CorpusFormat::PlainDir: {
      ensure_dir(path);
      for (const auto& d : docs) {
        check_file_id(d.id);
        write_file(path / (d.id + ".txt"), d.text.to_utf8());
      }
      break;
    }
  }
}

}  // namespace ocrsynth
