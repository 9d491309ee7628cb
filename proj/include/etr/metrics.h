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

#ifndef ETR_METRICS_H_
#define ETR_METRICS_H_

// Automatic metric kernels. Kernels compute on the [0, 1] scale; the x100
// reporting scale is applied by callers (evalrun, corpus) at output time.
// KMRE and LIX are unbounded indices and are returned as-is.

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "etr/textcore.h"

namespace etr::metrics {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // f1 is the harmonic mean of p and r, 0 when both are 0.
  static PRF From(double precision, double recall);
};

struct SariOrder {
  double f_add = 0.0;
  double f_keep = 0.0;
  double p_del = 0.0;
};

struct SariBreakdown {
  std::array<SariOrder, 4> per_order{};  // n = 1..4
  double total = 0.0;                    // x100
};

// Raw counts behind the readability indices.
struct ReadabilityCounts {
  long words = 0;
  long sentences = 0;
  long syllables = 0;
  long long_words = 0;  // more than six letters
};

ReadabilityCounts CountReadability(
    std::string_view text,
    const text::AbbreviationList& abbreviations = text::AbbreviationList::BuiltIn());

// Kandel-Moles reading ease: 209 - 1.15 * words/sentence - 0.68 * syllables
// per 100 words.
double Kmre(const ReadabilityCounts& counts);
double Kmre(std::string_view text,
            const text::AbbreviationList& abbreviations = text::AbbreviationList::BuiltIn());

// words/sentence + 100 * long_words/words.
double Lix(const ReadabilityCounts& counts);
double Lix(std::string_view text,
           const text::AbbreviationList& abbreviations = text::AbbreviationList::BuiltIn());

// Clipped n-gram overlap.
PRF RougeN(const text::TokenSeq& candidate, const text::TokenSeq& reference, int n);

// Longest common subsequence over the whole token sequences.
PRF RougeL(const text::TokenSeq& candidate, const text::TokenSeq& reference);
std::size_t LcsLength(std::span<const std::string> a, std::span<const std::string> b);

// SARI over n-gram sets for n = 1..4. The reference side is the union of the
// references' n-grams. A component whose candidate-side and reference-side
// sets are both empty scores 1; otherwise an empty denominator scores 0.
SariBreakdown Sari(const text::TokenSeq& source, const text::TokenSeq& candidate,
                   std::span<const text::TokenSeq> references);

// Percentage of target token occurrences whose folded form is absent from
// the source.
double Novelty(const text::TokenSeq& source, const text::TokenSeq& target);

// 100 * (1 - |target| / |source|); negative when the target is longer.
double CompressionRatio(const text::TokenSeq& source, const text::TokenSeq& target);

using Vector = std::vector<double>;

struct IdfWeights {
  std::vector<double> candidate;
  std::vector<double> reference;
};

// Greedy cosine matching over externally produced token embeddings. Vectors
// are L2-normalized here. No baseline rescaling. Cosines can be negative, so
// the result is only guaranteed to lie in [-1, 1].
PRF BertScore(std::span<const Vector> candidate, std::span<const Vector> reference,
              const std::optional<IdfWeights>& idf = std::nullopt);

// Harmonic mean of SARI, ROUGE-L F1 and BERTScore F1 (all on the x100 scale).
double SelectionScore(double sari, double rouge_l_f1, double bert_f1);

}  // namespace etr::metrics

#endif  // ETR_METRICS_H_
