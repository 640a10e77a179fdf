#pragma once

// Brute-force decoder used to check the beam search: scores every
// substitution hypothesis of a line, summing in the same order the decoder
// does so equal hypotheses get bit-identical scores.

#include <cmath>
#include <string>
#include <vector>

#include "ocrsynth/confusion.hpp"
#include "ocrsynth/corrector.hpp"

namespace fixtures {

struct OracleResult {
  std::u32string best;
  double score = 0.0;
  std::size_t hypotheses = 0;
};

inline OracleResult exhaustive_correct(std::u32string_view line, const ocrsynth::CharLM& lm,
                                       const ocrsynth::ChannelModel& channel,
                                       const ocrsynth::ConfusionTable& table) {
  std::vector<std::vector<char32_t>> options;
  for (char32_t observed : line) {
    std::vector<char32_t> truths{observed};
    for (const auto& [pair, n] : table.substitutions())
      if (pair.first == observed) truths.push_back(pair.second);
    options.push_back(truths);
  }
  auto sym = [&](char32_t c) { return lm.alphabet().count(c) ? c : ocrsynth::kUnknownSymbol; };

  OracleResult result;
  bool have = false;
  std::vector<std::size_t> pick(line.size(), 0);
  while (true) {
    std::u32string text;
    std::u32string context(static_cast<std::size_t>(lm.order() - 1), ocrsynth::kBeginSymbol);
    double score = 0.0;
    bool possible = true;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char32_t truth = options[i][pick[i]];
      const double ch = channel.prob(line[i], truth);
      if (ch <= 0.0) possible = false;
      score = score + std::log(ch);
      score = score + lm.log_prob(context, sym(truth));
      text.push_back(truth);
      if (!context.empty()) {
        context.erase(0, 1);
        context.push_back(sym(truth));
      }
    }
    score = score + lm.log_prob(context, ocrsynth::kEndSymbol);
    ++result.hypotheses;
    if (possible && (!have || score > result.score ||
                     (score == result.score && text < result.best))) {
      result.best = text;
      result.score = score;
      have = true;
    }
    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
    if (i == pick.size()) break;
  }
  return result;
}

}  // namespace fixtures
