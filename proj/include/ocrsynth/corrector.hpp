#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ocrsynth/confusion.hpp"
#include "ocrsynth/text.hpp"

namespace ocrsynth {

// LM symbols outside the Unicode range.
inline constexpr char32_t kBeginSymbol = 0x110000;
inline constexpr char32_t kEndSymbol = 0x110001;
inline constexpr char32_t kUnknownSymbol = 0x110002;

/// Character n-gram model with add-k smoothing. Each line is padded with
/// order-1 begin symbols and closed with an end symbol. Characters never seen
/// in training share one unknown symbol, so every line has finite log probability.
///
///   P(c | h) = (count(h, c) + k) / (count(h) + k * V),  V = |alphabet| + 2 (unknown, end)
class CharLM {
 public:
  static constexpr double kDefaultK = 0.01;

  explicit CharLM(int order = 4, double k = kDefaultK);

  /// Throws InputError for order < 2 or an empty corpus.
  static CharLM train(const std::vector<Text>& corpus, int order = 4, double k = kDefaultK);

  int order() const { return order_; }
  double k() const { return k_; }
  const std::set<char32_t>& alphabet() const { return alphabet_; }
  std::size_t vocabulary_size() const { return alphabet_.size() + 2; }

  /// Maps a character to its LM symbol (itself, or kUnknownSymbol).
  char32_t symbol(char32_t c) const;
  /// The order-1 begin symbols that open every line.
  std::u32string initial_context() const;
  /// Shift `context` (exactly order-1 symbols) left by one and append `next`.
  void advance(std::u32string& context, char32_t next) const;

  /// `context` holds exactly order-1 symbols; `next` is an LM symbol.
  double prob(std::u32string_view context, char32_t next) const;
  double log_prob(std::u32string_view context, char32_t next) const;
  /// Sum of log probabilities of the line's characters and the end symbol.
  double line_log_prob(std::u32string_view line) const;

  /// Total training count of (context, next); 0 when unseen.
  std::uint64_t count(std::u32string_view context, char32_t next) const;

  /// `#ORDER`, `#K` header rows, then `context<TAB>next<TAB>count` sorted by
  /// (context, next) code points. Begin, end and unknown are written `\^`,
  /// `\$`, `\?`; other characters use the escaped-field encoding.
  std::string format_tsv() const;
  static CharLM parse_tsv(std::string_view tsv);

  void save(const std::filesystem::path& path) const;
  static CharLM load(const std::filesystem::path& path);

  friend bool operator==(const CharLM& a, const CharLM& b) {
    return a.order_ == b.order_ && a.k_ == b.k_ && a.alphabet_ == b.alphabet_ &&
           a.contexts_ == b.contexts_;
  }

 private:
  struct ContextCounts {
    std::unordered_map<char32_t, std::uint64_t> next;
    std::uint64_t total = 0;
    friend bool operator==(const ContextCounts&, const ContextCounts&) = default;
  };

  void add(const std::u32string& context, char32_t next, std::uint64_t n);

  int order_;
  double k_;
  std::set<char32_t> alphabet_;
  std::unordered_map<std::u32string, ContextCounts> contexts_;
};

/// P(observed a | true b) from a confusion table with add-k_channel mass on identity:
///   P(a | b) = count(a, b) / (target_count(b) + |sources(b)| * k_channel)
///   P(b | b) = 1 - sum over sources of P(a | b)   (1 when b has no sources)
class ChannelModel {
 public:
  struct Candidate {
    char32_t truth;
    double log_prob;  // log P(observed | truth)
  };

  explicit ChannelModel(const ConfusionTable& table, double k_channel = 1.0);

  double prob(char32_t observed, char32_t truth) const;
  /// Truths that could have produced `observed`: itself plus every target
  /// listing it as a source, in code-point order.
  std::vector<Candidate> candidates(char32_t observed) const;

 private:
  std::unordered_map<char32_t, double> identity_;  // only for chars with sources
  std::map<std::pair<char32_t, char32_t>, double> confusion_;  // (observed, truth)
  std::unordered_map<char32_t, std::vector<Candidate>> candidates_;
};

inline constexpr std::size_t kDefaultBeamWidth = 16;

/// Left-to-right beam search over substitution hypotheses. A hypothesis
/// extended with truth b for observed a gains log P(a|b) and then
/// log P_lm(b | context), in that order; the end symbol's log probability is
/// added last. Hypotheses rank by score, then by code-point order of their
/// text, and the best complete one is returned.
std::u32string correct_line(std::u32string_view line, const CharLM& lm,
                            const ChannelModel& channel,
                            std::size_t beam_width = kDefaultBeamWidth);

Text correct_text(const Text& text, const CharLM& lm, const ChannelModel& channel,
                  std::size_t beam_width = kDefaultBeamWidth);

std::vector<Document> correct_documents(const std::vector<Document>& docs, const CharLM& lm,
                                        const ChannelModel& channel,
                                        std::size_t beam_width = kDefaultBeamWidth,
                                        unsigned jobs = 1);

}  // namespace ocrsynth
