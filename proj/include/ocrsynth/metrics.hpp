#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ocrsynth/text.hpp"

namespace ocrsynth {

/// Share of character errors removed by a corrector, in percent:
///   (lev(g,o) - lev(g,f)) / lev(g,o) * 100   when lev(g,o) >= lev(g,f) and lev(g,o) > 0,
///   0                                       when the corrector made things worse.
/// With an error-free input (lev(g,o) = 0) the score is 100 if the output is
/// still error free and 0 otherwise.
double acc_increase_from_distances(std::size_t lev_gs_ocred, std::size_t lev_gs_fixed);
double acc_increase(const Text& golden, const Text& ocred, const Text& fixed);

struct WordCounts {
  std::size_t n_w = 0;  // words in the evaluated text
  std::size_t s_w = 0;  // substituted
  std::size_t d_w = 0;  // in the evaluated text only
  std::size_t i_w = 0;  // in the golden text only

  /// (N_w - S_w - D_w - I_w) / N_w * 100. Requires n_w > 0.
  double w_acc() const;
  WordCounts& operator+=(const WordCounts& o);
  friend bool operator==(const WordCounts&, const WordCounts&) = default;
};

/// Word-level Needleman-Wunsch of tokenize(evaluated) against tokenize(golden).
/// Throws InputError when the evaluated text has no words.
WordCounts word_accuracy(const Text& evaluated, const Text& golden,
                         const DelimiterSet& delims = DelimiterSet());

struct AccuracyReport {
  std::size_t lev_gs_ocred = 0;
  std::size_t lev_gs_fixed = 0;
  double acc_increase = 0.0;
  WordCounts words;  // of the fixed text against golden
  double w_acc = 0.0;
};

AccuracyReport evaluate_document(const Text& golden, const Text& ocred, const Text& fixed,
                                 const DelimiterSet& delims = DelimiterSet());

struct EvalTriple {
  Text golden;
  Text ocred;
  Text fixed;
  std::string doc_id;
};

struct CorrectorSummary {
  std::size_t documents = 0;
  std::size_t skipped = 0;
  std::vector<std::string> skipped_ids;
  double mean_acc_increase = 0.0;  // macro average over evaluated documents
  WordCounts ocred_words;          // corpus totals (micro average)
  WordCounts fixed_words;
  double ocred_w_acc = 0.0;
  double fixed_w_acc = 0.0;
  std::size_t lev_gs_ocred = 0;
  std::size_t lev_gs_fixed = 0;
};

/// Documents whose ocred or fixed side has no words are skipped and counted.
CorrectorSummary evaluate_corrector(const std::vector<EvalTriple>& triples,
                                    const DelimiterSet& delims = DelimiterSet(),
                                    unsigned jobs = 1);

struct ReportRow {
  std::string name;
  double acc_increase;
  double word_accuracy;
};

/// Two rows: the uncorrected input (acc increase 0 by definition) and the corrector.
std::vector<ReportRow> summary_rows(const CorrectorSummary& summary,
                                    const std::string& corrector_name);

/// Percentages with three decimals, e.g. "53.472%".
std::string format_percent(double value);
/// Tab-separated table with a header row:
///   Name  Character-based Accuracy Increase  Word Accuracy
std::string render_table(const std::vector<ReportRow>& rows);
/// One `{"name":..., "acc_increase":..., "word_accuracy":...}` object per line.
std::string render_json(const std::vector<ReportRow>& rows);

}  // namespace ocrsynth
