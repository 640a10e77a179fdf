#include "ocrsynth/corrector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "ocrsynth/parallel.hpp"

namespace ocrsynth {

// --- CharLM ---------------------------------------------------------------

CharLM::CharLM(int order, double k) : order_(order), k_(k) {
  if (order < 2) throw InputError("LM order must be at least 2, got " + std::to_string(order));
  if (!(k > 0.0)) throw InputError("LM smoothing constant must be positive");
}

void CharLM::add(const std::u32string& context, char32_t next, std::uint64_t n) {
  auto& cc = contexts_[context];
  cc.next[next] += n;
  cc.total += n;
  if (next != kEndSymbol) alphabet_.insert(next);
}

CharLM CharLM::train(const std::vector<Text>& corpus, int order, double k) {
  if (corpus.empty()) throw InputError("LM training corpus is empty");
  CharLM lm(order, k);
  for (const auto& text : corpus) {
    for (const auto line : text.lines()) {
      std::u32string context = lm.initial_context();
      for (char32_t c : line) {
        lm.add(context, c, 1);
        lm.advance(context, c);
      }
      lm.add(context, kEndSymbol, 1);
    }
  }
  return lm;
}

char32_t CharLM::symbol(char32_t c) const {
  return alphabet_.count(c) ? c : kUnknownSymbol;
}

std::u32string CharLM::initial_context() const {
  return std::u32string(static_cast<std::size_t>(order_ - 1), kBeginSymbol);
}

void CharLM::advance(std::u32string& context, char32_t next) const {
  context.erase(context.begin());
  context.push_back(next);
}

double CharLM::prob(std::u32string_view context, char32_t next) const {
  const double v = static_cast<double>(vocabulary_size());
  auto it = contexts_.find(std::u32string(context));
  if (it == contexts_.end()) return 1.0 / v;
  const auto& cc = it->second;
  auto nit = cc.next.find(next);
  const double c = nit == cc.next.end() ? 0.0 : static_cast<double>(nit->second);
  return (c + k_) / (static_cast<double>(cc.total) + k_ * v);
}

double CharLM::log_prob(std::u32string_view context, char32_t next) const {
  return std::log(prob(context, next));
}

double CharLM::line_log_prob(std::u32string_view line) const {
  std::u32string context = initial_context();
  double total = 0.0;
  for (char32_t c : line) {
    const char32_t s = symbol(c);
    total += log_prob(context, s);
    advance(context, s);
  }
  return total + log_prob(context, kEndSymbol);
}

std::uint64_t CharLM::count(std::u32string_view context, char32_t next) const {
  auto it = contexts_.find(std::u32string(context));
  if (it == contexts_.end()) return 0;
  auto nit = it->second.next.find(next);
  return nit == it->second.next.end() ? 0 : nit->second;
}

namespace {

std::string encode_symbol(char32_t s) {
  switch (s) {
    case kBeginSymbol: return "\\^";
    case kEndSymbol: return "\\$";
    case kUnknownSymbol: return "\\?";
    default: return escape_field(encode_utf8(s));
  }
}

std::string encode_symbols(std::u32string_view symbols) {
  std::string out;
  for (char32_t s : symbols) out += encode_symbol(s);
  return out;
}

[[noreturn]] void lm_malformed(std::size_t line_no, const std::string& why) {
  throw InputError("LM file line " + std::to_string(line_no) + ": " + why);
}

std::u32string decode_symbols(std::string_view field, std::size_t line_no) {
  std::u32string out;
  std::string pending;
  auto flush = [&] {
    if (pending.empty()) return;
    try {
      out += decode_utf8(pending);
    } catch (const InputError& e) {
      lm_malformed(line_no, e.what());
    }
    pending.clear();
  };
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] != '\\') {
      pending.push_back(field[i]);
      continue;
    }
    if (i + 1 == field.size()) lm_malformed(line_no, "dangling backslash");
    const char e = field[++i];
    switch (e) {
      case '^': flush(); out.push_back(kBeginSymbol); break;
      case '$': flush(); out.push_back(kEndSymbol); break;
      case '?': flush(); out.push_back(kUnknownSymbol); break;
      case '\\': pending.push_back('\\'); break;
      case 't': pending.push_back('\t'); break;
      case 'n': pending.push_back('\n'); break;
      case 'r': pending.push_back('\r'); break;
      default: lm_malformed(line_no, std::string("unknown escape \\") + e);
    }
  }
  flush();
  return out;
}

}  // namespace

std::string CharLM::format_tsv() const {
  std::vector<std::pair<std::u32string, char32_t>> keys;
  for (const auto& [ctx, cc] : contexts_)
    for (const auto& [next, n] : cc.next) keys.emplace_back(ctx, next);
  std::sort(keys.begin(), keys.end());

  char kbuf[64];
  std::snprintf(kbuf, sizeof kbuf, "%.17g", k_);
  std::string out = "#ORDER\t" + std::to_string(order_) + "\n#K\t" + kbuf + "\n";
  for (const auto& [ctx, next] : keys) {
    out += encode_symbols(ctx);
    out += '\t';
    out += encode_symbol(next);
    out += '\t';
    out += std::to_string(count(ctx, next));
    out += '\n';
  }
  return out;
}

CharLM CharLM::parse_tsv(std::string_view tsv) {
  int order = 0;
  double k = 0.0;
  std::size_t line_no = 0;
  std::vector<std::string_view> rows;
  while (!tsv.empty()) {
    const auto eol = tsv.find('\n');
    rows.push_back(tsv.substr(0, eol));
    tsv.remove_prefix(eol == std::string_view::npos ? tsv.size() : eol + 1);
  }
  auto header = [&](std::size_t i, std::string_view key) {
    if (i >= rows.size() || rows[i].substr(0, key.size() + 1) != std::string(key) + "\t")
      lm_malformed(i + 1, "expected " + std::string(key) + " header");
    return rows[i].substr(key.size() + 1);
  };
  {
    const auto v = header(0, "#ORDER");
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), order);
    if (ec != std::errc() || p != v.data() + v.size()) lm_malformed(1, "invalid order");
  }
  {
    const std::string v(header(1, "#K"));
    char* end = nullptr;
    k = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') lm_malformed(2, "invalid smoothing constant");
  }
  CharLM lm(order, k);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    line_no = i + 1;
    const auto t1 = rows[i].find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : rows[i].find('\t', t1 + 1);
    if (t2 == std::string_view::npos || rows[i].find('\t', t2 + 1) != std::string_view::npos)
      lm_malformed(line_no, "expected context<TAB>next<TAB>count");
    const auto context = decode_symbols(rows[i].substr(0, t1), line_no);
    const auto next = decode_symbols(rows[i].substr(t1 + 1, t2 - t1 - 1), line_no);
    const auto count_field = rows[i].substr(t2 + 1);
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(count_field.data(), count_field.data() + count_field.size(), n);
    if (ec != std::errc() || p != count_field.data() + count_field.size() || n == 0)
      lm_malformed(line_no, "invalid count");
    if (context.size() != static_cast<std::size_t>(order - 1))
      lm_malformed(line_no, "context length does not match the order");
    if (next.size() != 1 || next[0] == kBeginSymbol || next[0] == kUnknownSymbol)
      lm_malformed(line_no, "invalid next symbol");
    if (lm.count(context, next[0]) != 0) lm_malformed(line_no, "duplicate row");
    lm.add(context, next[0], n);
  }
  return lm;
}

void CharLM::save(const std::filesystem::path& path) const { write_file(path, format_tsv()); }

CharLM CharLM::load(const std::filesystem::path& path) {
  return parse_tsv(read_file_utf8(path));
}

// --- ChannelModel ---------------------------------------------------------

ChannelModel::ChannelModel(const ConfusionTable& table, double k_channel) {
  if (!(k_channel > 0.0)) throw InputError("channel smoothing constant must be positive");
  std::map<char32_t, std::vector<Candidate>> by_observed;
  std::set<char32_t> targets;
  for (const auto& [pair, n] : table.substitutions()) targets.insert(pair.second);
  for (char32_t truth : targets) {
    const auto sources = table.sources_of(truth);
    const double denom = static_cast<double>(table.target_count(truth)) +
                         static_cast<double>(sources.size()) * k_channel;
    double mass = 0.0;
    for (const auto& [observed, n] : sources) {
      const double p = static_cast<double>(n) / denom;
      confusion_[{observed, truth}] = p;
      by_observed[observed].push_back({truth, std::log(p)});
      mass += p;
    }
    identity_[truth] = 1.0 - mass;
  }
  for (auto& [observed, list] : by_observed) {
    list.push_back({observed, std::log(prob(observed, observed))});
    std::sort(list.begin(), list.end(),
              [](const Candidate& a, const Candidate& b) { return a.truth < b.truth; });
    candidates_[observed] = std::move(list);
  }
}

double ChannelModel::prob(char32_t observed, char32_t truth) const {
  if (observed == truth) {
    auto it = identity_.find(truth);
    return it == identity_.end() ? 1.0 : it->second;
  }
  auto it = confusion_.find({observed, truth});
  return it == confusion_.end() ? 0.0 : it->second;
}

std::vector<ChannelModel::Candidate> ChannelModel::candidates(char32_t observed) const {
  auto it = candidates_.find(observed);
  if (it != candidates_.end()) return it->second;
  return {{observed, std::log(prob(observed, observed))}};
}

// --- decoding -------------------------------------------------------------

namespace {

struct Hypothesis {
  std::u32string text;
  std::u32string context;
  double score = 0.0;
};

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.text < b.text;
}

}  // namespace

std::u32string correct_line(std::u32string_view line, const CharLM& lm,
                            const ChannelModel& channel, std::size_t beam_width) {
  if (line.empty()) return {};
  if (beam_width == 0) throw InputError("beam width must be positive");
  std::vector<Hypothesis> beam{{{}, lm.initial_context(), 0.0}};
  std::vector<Hypothesis> next;
  for (char32_t observed : line) {
    const auto cands = channel.candidates(observed);
    next.clear();
    next.reserve(beam.size() * cands.size());
    for (const auto& h : beam) {
      for (const auto& cand : cands) {
        if (std::isinf(cand.log_prob)) continue;
        const char32_t sym = lm.symbol(cand.truth);
        Hypothesis e{h.text, h.context, h.score};
        e.score = e.score + cand.log_prob;
        e.score = e.score + lm.log_prob(h.context, sym);
        e.text.push_back(cand.truth);
        lm.advance(e.context, sym);
        next.push_back(std::move(e));
      }
    }
    if (next.size() > beam_width) {
      std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(beam_width),
                        next.end(), better);
      next.resize(beam_width);
    }
    std::swap(beam, next);
  }
  for (auto& h : beam) h.score = h.score + lm.log_prob(h.context, kEndSymbol);
  return std::min_element(beam.begin(), beam.end(), better)->text;
}

Text correct_text(const Text& text, const CharLM& lm, const ChannelModel& channel,
                  std::size_t beam_width) {
  std::vector<std::u32string> out;
  for (const auto line : text.lines()) out.push_back(correct_line(line, lm, channel, beam_width));
  return join_lines(out);
}

std::vector<Document> correct_documents(const std::vector<Document>& docs, const CharLM& lm,
                                        const ChannelModel& channel, std::size_t beam_width,
                                        unsigned jobs) {
  std::vector<Document> out(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    out[i] = {correct_text(docs[i].text, lm, channel, beam_width), docs[i].id};
  });
  return out;
}

}  // namespace ocrsynth
