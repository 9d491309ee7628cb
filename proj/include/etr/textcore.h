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

#ifndef ETR_TEXTCORE_H_
#define ETR_TEXTCORE_H_

// Deterministic segmentation primitives for French text: word tokens,
// sentences, syllables and n-grams. Every metric in etrkit is defined on top
// of these functions.

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace etr::text {

// Word tokens of a text, punctuation excluded.
struct TokenSeq {
  std::vector<std::string> tokens;
  // Alphabetic characters per token; digits and marks are not letters.
  std::vector<int> char_lengths;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

struct SentenceSeq {
  std::vector<std::string> sentences;
  // Byte offset into the original text where each sentence starts.
  std::vector<std::size_t> boundaries;

  std::size_t size() const { return sentences.size(); }
};

using NGram = std::vector<std::string>;

struct NGramBag {
  int n = 1;
  std::map<NGram, int> counts;

  // Sum of all multiplicities.
  long total() const;
};

// Abbreviations that do not end a sentence when followed by '.'. Entries are
// matched case-sensitively against the whitespace-delimited word that
// carries the period, period included ("M.", "etc.").
class AbbreviationList {
 public:
  AbbreviationList() = default;
  explicit AbbreviationList(std::vector<std::string> entries);

  // The list compiled into the library; config/abbreviations_fr.txt mirrors it.
  static const AbbreviationList& BuiltIn();
  // One abbreviation per line, UTF-8. Blank lines and lines starting with
  // '#' are ignored.
  static AbbreviationList Load(const std::filesystem::path& path);

  bool Contains(std::string_view word) const { return entries_.count(std::string(word)) > 0; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::set<std::string> entries_;
};

// Maximal runs of letters/digits (with internal hyphens) become tokens.
// French elided clitics (l', d', qu', jusqu', ...) are split after the
// apostrophe, which stays on the clitic; the typographic apostrophe U+2019 is
// normalized to '\''. Any other apostrophe between letters stays inside the
// word ("aujourd'hui"). With `fold_case` tokens are Unicode simple case folded.
TokenSeq Tokenize(std::string_view text, bool fold_case = false);

// Rule-based sentence splitter. Splits after a run of . ! ? … (plus closing
// quotes/brackets) that is followed by whitespace, unless the next word
// starts with a lowercase letter or the lone period closes an abbreviation. Newlines split around bullet items and at blank lines.
// Fragments without any token are merged into a neighbouring sentence.
SentenceSeq SplitSentences(std::string_view text,
                           const AbbreviationList& abbreviations = AbbreviationList::BuiltIn());

// Number of sentences that carry at least one token. Equals
// SplitSentences(text).size() unless the text has no tokens at all.
std::size_t CountSentences(std::string_view text,
                           const AbbreviationList& abbreviations = AbbreviationList::BuiltIn());

// French syllable estimate: vowel groups, with ë ï ü opening a new group,
// minus one for a silent final e/es/ent after a consonant. Always >= 1;
// tokens without letters (numbers) count as one syllable.
int CountSyllablesFr(std::string_view word);

NGramBag NGrams(const TokenSeq& tokens, int n);
NGramBag NGrams(std::span<const std::string> tokens, int n);

// Distinct case-folded tokens across all texts.
std::set<std::string> Vocabulary(std::span<const std::string> texts);

// Unicode simple case folding, code point by code point. Accents are kept.
std::string FoldCase(std::string_view text);

}  // namespace etr::text

#endif  // ETR_TEXTCORE_H_
