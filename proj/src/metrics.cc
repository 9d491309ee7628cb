// Copyright 2026 The etrkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "etr/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "etr/error.h"

namespace etr::metrics {
namespace {

double Ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

using GramSet = std::unordered_set<std::string>;

// N-grams as unit-separator joined keys.
GramSet GramKeys(std::span<const std::string> tokens, int n) {
  GramSet keys;
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < order; ++k) {
      key.push_back('\x1f');
      key += tokens[i + k];
    }
    keys.insert(std::move(key));
  }
  return keys;
}

std::size_t CountIn(const GramSet& items, const GramSet& other, bool inside) {
  std::size_t count = 0;
  for (const auto& g : items) count += (other.count(g) > 0) == inside ? 1 : 0;
  return count;
}

// F1 for the add and keep components with the empty-set convention.
double ComponentF1(std::size_t matched, std::size_t candidate_side, std::size_t reference_side) {
  if (candidate_side == 0 && reference_side == 0) return 1.0;
  const double p = Ratio(static_cast<double>(matched), static_cast<double>(candidate_side));
  const double r = Ratio(static_cast<double>(matched), static_cast<double>(reference_side));
  return PRF::From(p, r).f1;
}

double Norm(const Vector& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace

PRF PRF::From(double precision, double recall) {
  PRF prf{precision, recall, 0.0};
  if (precision + recall > 0) prf.f1 = 2 * precision * recall / (precision + recall);
  return prf;
}

ReadabilityCounts CountReadability(std::string_view text,
                                   const text::AbbreviationList& abbreviations) {
  ReadabilityCounts counts;
  const auto tokens = text::Tokenize(text);
  counts.words = static_cast<long>(tokens.size());
  counts.sentences = static_cast<long>(text::CountSentences(text, abbreviations));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    counts.syllables += text::CountSyllablesFr(tokens.tokens[i]);
    counts.long_words += tokens.char_lengths[i] > 6 ? 1 : 0;
  }
  return counts;
}

double Kmre(const ReadabilityCounts& c) {
  if (c.words <= 0 || c.sentences <= 0) throw Error("empty text");
  const double words = static_cast<double>(c.words);
  return 209.0 - 1.15 * (words / static_cast<double>(c.sentences)) -
         0.68 * (100.0 * static_cast<double>(c.syllables) / words);
}

double Kmre(std::string_view text, const text::AbbreviationList& abbreviations) {
  return Kmre(CountReadability(text, abbreviations));
}

double Lix(const ReadabilityCounts& c) {
  if (c.words <= 0 || c.sentences <= 0) throw Error("empty text");
  const double words = static_cast<double>(c.words);
  return words / static_cast<double>(c.sentences) +
         100.0 * static_cast<double>(c.long_words) / words;
}

double Lix(std::string_view text, const text::AbbreviationList& abbreviations) {
  return Lix(CountReadability(text, abbreviations));
}

PRF RougeN(const text::TokenSeq& candidate, const text::TokenSeq& reference, int n) {
  const auto cand = text::NGrams(candidate, n);
  const auto ref = text::NGrams(reference, n);
  long match = 0;
  for (const auto& [gram, count] : cand.counts) {
    auto it = ref.counts.find(gram);
    if (it != ref.counts.end()) match += std::min(count, it->second);
  }
  return PRF::From(Ratio(static_cast<double>(match), static_cast<double>(cand.total())),
                   Ratio(static_cast<double>(match), static_cast<double>(ref.total())));
}

std::size_t LcsLength(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  // Two-row DP with the shorter sequence on the inner dimension.
  if (b.size() > a.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PRF RougeL(const text::TokenSeq& candidate, const text::TokenSeq& reference) {
  const auto lcs = static_cast<double>(LcsLength(candidate.tokens, reference.tokens));
  return PRF::From(Ratio(lcs, static_cast<double>(candidate.size())),
                   Ratio(lcs, static_cast<double>(reference.size())));
}

SariBreakdown Sari(const text::TokenSeq& source, const text::TokenSeq& candidate,
                   std::span<const text::TokenSeq> references) {
  if (references.empty()) throw Error("no references");
  SariBreakdown out;
  double sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const GramSet src = GramKeys(source.tokens, n);
    const GramSet cand = GramKeys(candidate.tokens, n);
    GramSet ref;
    for (const auto& r : references) ref.merge(GramKeys(r.tokens, n));

    // add: candidate n-grams absent from the source.
    std::size_t add_cand = 0, add_match = 0;
    for (const auto& g : cand) {
      if (src.count(g)) continue;
      ++add_cand;
      add_match += ref.count(g);
    }
    const std::size_t add_ref = CountIn(ref, src, /*inside=*/false);

    // keep: candidate n-grams retained from the source.
    std::size_t keep_cand = 0, keep_match = 0;
    for (const auto& g : cand) {
      if (!src.count(g)) continue;
      ++keep_cand;
      keep_match += ref.count(g);
    }
    const std::size_t keep_ref = CountIn(src, ref, /*inside=*/true);

    // del: source n-grams dropped by the candidate; correct when the
    // references drop them too.
    std::size_t del_cand = 0, del_match = 0, del_ref = 0;
    for (const auto& g : src) {
      const bool in_ref = ref.count(g) > 0;
      del_ref += in_ref ? 0 : 1;
      if (cand.count(g)) continue;
      ++del_cand;
      del_match += in_ref ? 0 : 1;
    }

    SariOrder& order = out.per_order[static_cast<std::size_t>(n - 1)];
    order.f_add = ComponentF1(add_match, add_cand, add_ref);
    order.f_keep = ComponentF1(keep_match, keep_cand, keep_ref);
    order.p_del = (del_cand == 0 && del_ref == 0)
                      ? 1.0
                      : Ratio(static_cast<double>(del_match), static_cast<double>(del_cand));
    sum += (order.f_add + order.f_keep + order.p_del) / 3.0;
  }
  out.total = 100.0 * sum / 4.0;
  return out;
}

double Novelty(const text::TokenSeq& source, const text::TokenSeq& target) {
  if (target.empty()) throw Error("empty target");
  std::unordered_set<std::string> seen;
  for (const auto& t : source.tokens) seen.insert(text::FoldCase(t));
  std::size_t novel = 0;
  for (const auto& t : target.tokens) novel += seen.count(text::FoldCase(t)) ? 0 : 1;
  return 100.0 * static_cast<double>(novel) / static_cast<double>(target.size());
}

double CompressionRatio(const text::TokenSeq& source, const text::TokenSeq& target) {
  if (source.empty()) throw Error("empty source");
  return 100.0 * (1.0 - static_cast<double>(target.size()) / static_cast<double>(source.size()));
}

PRF BertScore(std::span<const Vector> candidate, std::span<const Vector> reference,
              const std::optional<IdfWeights>& idf) {
  if (candidate.empty() || reference.empty()) throw Error("empty embedding sequence");
  const std::size_t dim = candidate.front().size();
  auto normalized = [dim](std::span<const Vector> side) {
    std::vector<Vector> out;
    out.reserve(side.size());
    for (const auto& v : side) {
      if (v.size() != dim) throw Error("dimension mismatch");
      const double norm = Norm(v);
      if (!(norm > 0.0) || !std::isfinite(norm)) throw Error("degenerate embedding");
      Vector unit(v);
      for (double& x : unit) x /= norm;
      out.push_back(std::move(unit));
    }
    return out;
  };
  const auto cand = normalized(candidate);
  const auto ref = normalized(reference);

  if (idf) {
    if (idf->candidate.size() != cand.size() || idf->reference.size() != ref.size()) {
      throw Error("idf weight count does not match token count");
    }
  }
  auto weight = [&](bool cand_side, std::size_t i) {
    if (!idf) return 1.0;
    return cand_side ? idf->candidate[i] : idf->reference[i];
  };

  std::vector<double> best_for_cand(cand.size(), -2.0), best_for_ref(ref.size(), -2.0);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      double sim = 0.0;
      for (std::size_t d = 0; d < dim; ++d) sim += cand[i][d] * ref[j][d];
      best_for_cand[i] = std::max(best_for_cand[i], sim);
      best_for_ref[j] = std::max(best_for_ref[j], sim);
    }
  }
  double p_num = 0.0, p_den = 0.0, r_num = 0.0, r_den = 0.0;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    p_num += weight(true, i) * best_for_cand[i];
    p_den += weight(true, i);
  }
  for (std::size_t j = 0; j < ref.size(); ++j) {
    r_num += weight(false, j) * best_for_ref[j];
    r_den += weight(false, j);
  }
  if (!(p_den > 0.0) || !(r_den > 0.0)) throw Error("idf weights must have a positive sum");
  return PRF::From(p_num / p_den, r_num / r_den);
}

double SelectionScore(double sari, double rouge_l_f1, double bert_f1) {
  if (!(sari > 0.0) || !(rouge_l_f1 > 0.0) || !(bert_f1 > 0.0)) {
    throw Error("undefined harmonic mean");
  }
  return 3.0 / (1.0 / sari + 1.0 / rouge_l_f1 + 1.0 / bert_f1);
}

}  // namespace etr::metrics
