#include "ocrsynth/align.hpp"

namespace ocrsynth {

void Scoring::validate() const {
  if (!(match > mismatch && match > gap))
    throw InputError("scoring requires match > mismatch and match > gap (got match=" +
                     std::to_string(match) + ", mismatch=" + std::to_string(mismatch) +
                     ", gap=" + std::to_string(gap) + ")");
}

std::vector<CharAlignment> align_texts(const Text& a, const Text& b, const Scoring& s,
                                       std::uint64_t cell_limit) {
  const auto la = a.lines();
  const auto lb = b.lines();
  std::vector<CharAlignment> out;
  if (la.size() == lb.size()) {
    out.reserve(la.size());
    for (std::size_t i = 0; i < la.size(); ++i) out.push_back(nw_align(la[i], lb[i], s, cell_limit));
  } else {
    out.push_back(nw_align(a.chars(), b.chars(), s, cell_limit));
  }
  return out;
}

}  // namespace ocrsynth
