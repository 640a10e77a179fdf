#include "ocrsynth/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "ocrsynth/align.hpp"
#include "ocrsynth/parallel.hpp"

namespace ocrsynth {

double acc_increase_from_distances(std::size_t lev_gs_ocred, std::size_t lev_gs_fixed) {
  if (lev_gs_ocred == 0) return lev_gs_fixed == 0 ? 100.0 : 0.0;
  if (lev_gs_fixed > lev_gs_ocred) return 0.0;
  return static_cast<double>(lev_gs_ocred - lev_gs_fixed) / static_cast<double>(lev_gs_ocred) *
         100.0;
}

double acc_increase(const Text& golden, const Text& ocred, const Text& fixed) {
  return acc_increase_from_distances(levenshtein(golden.chars(), ocred.chars()),
                                     levenshtein(golden.chars(), fixed.chars()));
}

double WordCounts::w_acc() const {
  if (n_w == 0) throw InputError("word accuracy is undefined for a text with no words");
  const auto errors = static_cast<double>(s_w + d_w + i_w);
  return (static_cast<double>(n_w) - errors) / static_cast<double>(n_w) * 100.0;
}

WordCounts& WordCounts::operator+=(const WordCounts& o) {
  n_w += o.n_w;
  s_w += o.s_w;
  d_w += o.d_w;
  i_w += o.i_w;
  return *this;
}

WordCounts word_accuracy(const Text& evaluated, const Text& golden, const DelimiterSet& delims) {
  const auto eval_words = tokenize(evaluated, delims);
  if (eval_words.empty()) throw InputError("evaluated text contains no words");
  const auto gold_words = tokenize(golden, delims);
  const auto alignment = word_align(eval_words, gold_words);
  WordCounts counts;
  counts.n_w = eval_words.size();
  counts.s_w = alignment.count(ColumnKind::Substitute);
  counts.d_w = alignment.count(ColumnKind::Delete);
  counts.i_w = alignment.count(ColumnKind::Insert);
  return counts;
}

AccuracyReport evaluate_document(const Text& golden, const Text& ocred, const Text& fixed,
                                 const DelimiterSet& delims) {
  AccuracyReport r;
  r.lev_gs_ocred = levenshtein(golden.chars(), ocred.chars());
  r.lev_gs_fixed = levenshtein(golden.chars(), fixed.chars());
  r.acc_increase = acc_increase_from_distances(r.lev_gs_ocred, r.lev_gs_fixed);
  r.words = word_accuracy(fixed, golden, delims);
  r.w_acc = r.words.w_acc();
  return r;
}

CorrectorSummary evaluate_corrector(const std::vector<EvalTriple>& triples,
                                    const DelimiterSet& delims, unsigned jobs) {
  if (triples.empty()) throw InputError("evaluate_corrector needs at least one document");

  struct PerDoc {
    bool ok = false;
    AccuracyReport fixed;
    WordCounts ocred_words;
  };
  std::vector<PerDoc> per_doc(triples.size());
  parallel_for(triples.size(), jobs, [&](std::size_t i) {
    const auto& t = triples[i];
    try {
      per_doc[i].ocred_words = word_accuracy(t.ocred, t.golden, delims);
      per_doc[i].fixed = evaluate_document(t.golden, t.ocred, t.fixed, delims);
      per_doc[i].ok = true;
    } catch (const InputError&) {
      per_doc[i].ok = false;
    }
  });

  CorrectorSummary s;
  double acc_sum = 0.0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& d = per_doc[i];
    if (!d.ok) {
      ++s.skipped;
      s.skipped_ids.push_back(triples[i].doc_id);
      continue;
    }
    ++s.documents;
    acc_sum += d.fixed.acc_increase;
    s.ocred_words += d.ocred_words;
    s.fixed_words += d.fixed.words;
    s.lev_gs_ocred += d.fixed.lev_gs_ocred;
    s.lev_gs_fixed += d.fixed.lev_gs_fixed;
  }
  if (s.documents == 0) throw InputError("no document could be evaluated (all had no words)");
  s.mean_acc_increase = acc_sum / static_cast<double>(s.documents);
  s.ocred_w_acc = s.ocred_words.w_acc();
  s.fixed_w_acc = s.fixed_words.w_acc();
  return s;
}

std::vector<ReportRow> summary_rows(const CorrectorSummary& summary,
                                    const std::string& corrector_name) {
  return {{"uncorrected input", 0.0, summary.ocred_w_acc},
          {corrector_name, summary.mean_acc_increase, summary.fixed_w_acc}};
}

std::string format_percent(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f%%", value);
  return buf;
}

std::string render_table(const std::vector<ReportRow>& rows) {
  std::string out = "Name\tCharacter-based Accuracy Increase\tWord Accuracy\n";
  for (const auto& r : rows) {
    out += r.name;
    out += '\t';
    out += format_percent(r.acc_increase);
    out += '\t';
    out += format_percent(r.word_accuracy);
    out += '\n';
  }
  return out;
}

std::string render_json(const std::vector<ReportRow>& rows) {
  auto round3 = [](double v) { return std::round(v * 1000.0) / 1000.0; };
  std::string out;
  for (const auto& r : rows) {
    nlohmann::ordered_json rec;
    rec["name"] = r.name;
    rec["acc_increase"] = round3(r.acc_increase);
    rec["word_accuracy"] = round3(r.word_accuracy);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

}  // namespace ocrsynth
