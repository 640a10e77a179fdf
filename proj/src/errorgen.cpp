#include "ocrsynth/errorgen.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_map>

#include "ocrsynth/parallel.hpp"
#include "ocrsynth/rng.hpp"

namespace ocrsynth {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

struct SourceSampler {
  std::vector<std::pair<char32_t, std::uint64_t>> sources;
  std::uint64_t total = 0;

  char32_t draw(SplitMix64& rng) const {
    std::uint64_t r = rng.next_below(total);
    for (const auto& [source, n] : sources) {
      if (r < n) return source;
      r -= n;
    }
    throw InvariantError("confusion sampler ran past its total");
  }
};

std::unordered_map<char32_t, SourceSampler> build_samplers(const ConfusionTable& table) {
  std::unordered_map<char32_t, SourceSampler> out;
  for (const auto& [pair, n] : table.substitutions()) {
    auto& s = out[pair.second];
    s.sources.emplace_back(pair.first, n);
    s.total += n;
  }
  return out;
}

std::vector<char32_t> alphabet_of(const Text& text) {
  std::set<char32_t> seen;
  for (char32_t c : text.chars())
    if (c != U'\n') seen.insert(c);
  return {seen.begin(), seen.end()};
}

}  // namespace

void InjectionConfig::validate() const {
  if (!is_probability(p_delete) || !is_probability(p_insert) || !is_probability(p_swap) ||
      !is_probability(p_confusion))
    throw InputError("injection probabilities must lie in [0, 1]");
  if (p_delete + p_confusion > 1.0) throw InputError("p_delete + p_confusion must not exceed 1");
}

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Delete: return "delete";
    case ErrorKind::Insert: return "insert";
    case ErrorKind::Swap: return "swap";
    case ErrorKind::Confuse: return "confuse";
  }
  return "?";
}

ErrorKind parse_error_kind(std::string_view name) {
  if (name == "delete") return ErrorKind::Delete;
  if (name == "insert") return ErrorKind::Insert;
  if (name == "swap") return ErrorKind::Swap;
  if (name == "confuse") return ErrorKind::Confuse;
  throw InputError("unknown error kind '" + std::string(name) + "'");
}

std::size_t ErrorLog::count(ErrorKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [kind](const ErrorEntry& e) { return e.kind == kind; }));
}

InjectionResult inject_errors(const Text& clean, const InjectionConfig& cfg,
                              const ConfusionTable& table) {
  cfg.validate();
  const auto samplers = build_samplers(table);
  const std::vector<char32_t> alphabet = cfg.alphabet.empty() ? alphabet_of(clean) : cfg.alphabet;

  InjectionResult result;
  std::vector<std::u32string> out_lines;
  const auto lines = clean.lines();
  out_lines.reserve(lines.size());

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::u32string_view line = lines[li];
    SplitMix64 rng(derive_seed(cfg.seed, li));
    std::u32string out;
    out.reserve(line.size() + line.size() / 16);

    auto maybe_insert = [&](std::size_t at) {
      if (!rng.bernoulli(cfg.p_insert) || alphabet.empty()) return;
      const char32_t c = alphabet[rng.next_below(alphabet.size())];
      out.push_back(c);
      result.log.entries.push_back({li, at, ErrorKind::Insert, std::nullopt, c});
    };

    std::size_t i = 0;
    while (i < line.size()) {
      const char32_t c = line[i];
      if (rng.bernoulli(cfg.p_delete)) {
        result.log.entries.push_back({li, i, ErrorKind::Delete, c, std::nullopt});
        maybe_insert(i);
        ++i;
        continue;
      }
      if (auto it = samplers.find(c); it != samplers.end()) {
        if (rng.bernoulli(cfg.p_confusion)) {
          const char32_t source = it->second.draw(rng);
          out.push_back(source);
          result.log.entries.push_back({li, i, ErrorKind::Confuse, c, source});
          maybe_insert(i);
          ++i;
          continue;
        }
      }
      if (i + 1 < line.size() && line[i + 1] != c && rng.bernoulli(cfg.p_swap)) {
        const char32_t next = line[i + 1];
        out.push_back(next);
        out.push_back(c);
        result.log.entries.push_back({li, i, ErrorKind::Swap, c, next});
        maybe_insert(i);
        maybe_insert(i + 1);
        i += 2;
        continue;
      }
      out.push_back(c);
      maybe_insert(i);
      ++i;
    }
    out_lines.push_back(std::move(out));
  }
  result.corrupted = join_lines(out_lines);
  return result;
}

Text replay_log(const Text& clean, const ErrorLog& log) {
  const auto lines = clean.lines();
  std::vector<std::u32string> out_lines(lines.begin(), lines.end());
  std::size_t e = 0;
  const auto& entries = log.entries;

  auto bad = [](const ErrorEntry& entry, const char* why) {
    throw InputError("error log entry at line " + std::to_string(entry.line_index) + ", index " +
                     std::to_string(entry.char_index) + " (" +
                     std::string(error_kind_name(entry.kind)) + "): " + why);
  };

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::u32string_view line = lines[li];
    std::u32string out;
    std::size_t pos = 0;
    for (; e < entries.size() && entries[e].line_index == li; ++e) {
      const ErrorEntry& entry = entries[e];
      const std::size_t idx = entry.char_index;
      if (idx >= line.size()) bad(entry, "index past end of line");
      if (entry.kind == ErrorKind::Insert) {
        if (!entry.replacement) bad(entry, "insert without a character");
        if (idx >= pos) {
          out.append(line.substr(pos, idx + 1 - pos));
          pos = idx + 1;
        }
        out.push_back(*entry.replacement);
        continue;
      }
      if (idx < pos) bad(entry, "entries out of order");
      if (!entry.original || line[idx] != *entry.original) bad(entry, "original does not match");
      out.append(line.substr(pos, idx - pos));
      switch (entry.kind) {
        case ErrorKind::Delete:
          pos = idx + 1;
          break;
        case ErrorKind::Confuse:
          if (!entry.replacement) bad(entry, "confusion without a replacement");
          out.push_back(*entry.replacement);
          pos = idx + 1;
          break;
        case ErrorKind::Swap:
          if (idx + 1 >= line.size() || !entry.replacement || line[idx + 1] != *entry.replacement)
            bad(entry, "swap successor does not match");
          out.push_back(line[idx + 1]);
          out.push_back(line[idx]);
          pos = idx + 2;
          break;
        case ErrorKind::Insert:
          break;
      }
    }
    out.append(line.substr(pos));
    out_lines[li] = std::move(out);
  }
  if (e != entries.size())
    bad(entries[e], "entry does not belong to any line (or lines out of order)");
  return join_lines(out_lines);
}

std::vector<char32_t> observed_alphabet(const std::vector<Document>& docs) {
  std::set<char32_t> seen;
  for (const auto& d : docs)
    for (char32_t c : d.text.chars())
      if (c != U'\n') seen.insert(c);
  return {seen.begin(), seen.end()};
}

GeneratedDataset generate_dataset(const std::vector<Document>& clean_corpus,
                                  const InjectionConfig& cfg, const ConfusionTable& table,
                                  unsigned jobs) {
  if (clean_corpus.empty()) throw InputError("generate_dataset needs a non-empty corpus");
  cfg.validate();
  InjectionConfig base = cfg;
  if (base.alphabet.empty()) base.alphabet = observed_alphabet(clean_corpus);

  GeneratedDataset out;
  out.pairs.resize(clean_corpus.size());
  out.logs.resize(clean_corpus.size());
  parallel_for(clean_corpus.size(), jobs, [&](std::size_t d) {
    InjectionConfig doc_cfg = base;
    doc_cfg.seed = derive_seed(cfg.seed, d);
    auto injected = inject_errors(clean_corpus[d].text, doc_cfg, table);
    out.pairs[d] = {std::move(injected.corrupted), clean_corpus[d].text, clean_corpus[d].id};
    out.logs[d] = std::move(injected.log);
  });

  for (std::size_t d = 0; d < clean_corpus.size(); ++d) {
    const ErrorLog& log = out.logs[d];
    out.stats.deletions += log.count(ErrorKind::Delete);
    out.stats.insertions += log.count(ErrorKind::Insert);
    out.stats.swaps += log.count(ErrorKind::Swap);
    out.stats.confusions += log.count(ErrorKind::Confuse);
    const auto& chars = clean_corpus[d].text.chars();
    out.stats.clean_chars +=
        chars.size() - static_cast<std::size_t>(std::count(chars.begin(), chars.end(), U'\n'));
  }
  return out;
}

std::string format_log_jsonl(const ErrorLog& log, const std::string& doc_id) {
  std::string out;
  for (const auto& e : log.entries) {
    nlohmann::ordered_json rec;
    rec["doc"] = doc_id;
    rec["line"] = e.line_index;
    rec["index"] = e.char_index;
    rec["kind"] = error_kind_name(e.kind);
    rec["original"] = e.original ? encode_utf8(*e.original) : "";
    rec["replacement"] = e.replacement ? encode_utf8(*e.replacement) : "";
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::map<std::string, ErrorLog> parse_log_jsonl(std::string_view jsonl) {
  std::map<std::string, ErrorLog> out;
  std::size_t line_no = 0;
  auto char_of = [&](const nlohmann::json& rec, const char* key) -> std::optional<char32_t> {
    const auto chars = decode_utf8(rec.at(key).get<std::string>());
    if (chars.empty()) return std::nullopt;
    if (chars.size() != 1)
      throw InputError("error log line " + std::to_string(line_no) + ": \"" + key +
                       "\" must hold at most one character");
    return chars[0];
  };
  while (!jsonl.empty()) {
    ++line_no;
    const auto eol = jsonl.find('\n');
    const std::string_view line = jsonl.substr(0, eol);
    jsonl.remove_prefix(eol == std::string_view::npos ? jsonl.size() : eol + 1);
    if (line.empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      ErrorEntry e;
      e.line_index = rec.at("line").get<std::size_t>();
      e.char_index = rec.at("index").get<std::size_t>();
      e.kind = parse_error_kind(rec.at("kind").get<std::string>());
      e.original = char_of(rec, "original");
      e.replacement = char_of(rec, "replacement");
      out[rec.at("doc").get<std::string>()].entries.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("error log line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace ocrsynth
