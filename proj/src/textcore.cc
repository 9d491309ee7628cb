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

#include "etr/textcore.h"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <fstream>

#include "etr/error.h"
#include "etr/jsonl.h"

namespace etr::text {
namespace {

struct CodePoint {
  UChar32 c;
  std::size_t begin;  // byte offset
  std::size_t end;
};

std::vector<CodePoint> Decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;  // ill-formed sequence
    out.push_back({c, static_cast<std::size_t>(begin), static_cast<std::size_t>(i)});
  }
  return out;
}

void AppendUtf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

bool IsMark(UChar32 c) {
  const auto type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_ENCLOSING_MARK ||
         type == U_COMBINING_SPACING_MARK;
}

bool IsLetter(UChar32 c) { return u_isalpha(c) != 0; }
bool IsAlnum(UChar32 c) { return u_isalpha(c) || u_isdigit(c); }
bool IsHyphen(UChar32 c) { return c == 0x2D || c == 0x2010 || c == 0x2011; }
bool IsApostrophe(UChar32 c) { return c == 0x27 || c == 0x2019 || c == 0x02BC; }
bool IsSpace(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

bool IsTerminator(UChar32 c) { return c == '.' || c == '!' || c == '?' || c == 0x2026; }

// Closing punctuation that may trail a terminator and stays with the sentence.
bool IsCloser(UChar32 c) {
  switch (c) {
    case '"': case '\'': case ')': case ']': case 0xBB: case 0x2019:
    case 0x201D: case 0x203A:
      return true;
    default:
      return false;
  }
}

// Closing marks French typography separates from the sentence by a space.
bool IsSpacedCloser(UChar32 c) { return c == 0xBB || c == 0x203A || c == 0x201D; }

bool IsBulletMarker(UChar32 c) {
  switch (c) {
    case '-': case '*': case 0x2013: case 0x2014: case 0x2022: case 0x00B7:
    case 0x25BA: case 0x25AA: case 0x2023: case 0x25CF:
      return true;
    default:
      return false;
  }
}

// Elided forms in case-folded spelling, apostrophe excluded.
constexpr std::array<std::string_view, 16> kClitics = {
    "l", "d", "j", "m", "n", "s", "t", "c", "\xc3\xa7" /* ç */, "qu",
    "jusqu", "lorsqu", "puisqu", "quoiqu", "presqu", "quelqu"};

bool IsClitic(std::string_view token) {
  const std::string folded = FoldCase(token);
  return std::find(kClitics.begin(), kClitics.end(), folded) != kClitics.end();
}

int CountLetters(std::string_view token) {
  int letters = 0;
  for (const auto& cp : Decode(token)) letters += IsLetter(cp.c) ? 1 : 0;
  return letters;
}

}  // namespace

long NGramBag::total() const {
  long sum = 0;
  for (const auto& [gram, count] : counts) sum += count;
  return sum;
}

std::string FoldCase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const auto& cp : Decode(text)) AppendUtf8(out, u_foldCase(cp.c, U_FOLD_CASE_DEFAULT));
  return out;
}

TokenSeq Tokenize(std::string_view text, bool fold_case) {
  TokenSeq seq;
  const auto cps = Decode(text);
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (fold_case) current = FoldCase(current);
    seq.char_lengths.push_back(CountLetters(current));
    seq.tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const UChar32 c = cps[i].c;
    const bool has_next = i + 1 < cps.size();
    if (IsAlnum(c) || (IsMark(c) && !current.empty())) {
      current.append(text.substr(cps[i].begin, cps[i].end - cps[i].begin));
    } else if (IsHyphen(c) && !current.empty() && has_next && IsAlnum(cps[i + 1].c)) {
      current.append(text.substr(cps[i].begin, cps[i].end - cps[i].begin));
    } else if (IsApostrophe(c) && !current.empty()) {
      if (IsClitic(current)) {
        current.push_back('\'');
        flush();
      } else if (has_next && IsLetter(cps[i + 1].c)) {
        current.push_back('\'');
      } else {
        flush();
      }
    } else {
      flush();
    }
  }
  flush();
  return seq;
}

AbbreviationList::AbbreviationList(std::vector<std::string> entries)
    : entries_(entries.begin(), entries.end()) {}

const AbbreviationList& AbbreviationList::BuiltIn() {
  static const AbbreviationList list({
      "M.", "MM.", "Mme.", "Mmes.", "Mlle.", "Mlles.", "Dr.", "Pr.", "Me.", "Mgr.",
      "St.", "Ste.", "etc.", "cf.", "p.", "pp.", "ex.", "p.ex.", "env.", "av.",
      "apr.", "J.-C.", "n\xc2\xb0.", "No.", "vol.", "chap.", "fig.", "\xc3\xa9" "d.",
      "op.", "cit.", "ibid.", "janv.", "f\xc3\xa9vr.", "avr.", "juil.", "sept.",
      "oct.", "nov.", "d\xc3\xa9" "c.", "c.-\xc3\xa0-d.", "ca.", "art.", "al.",
      "resp.", "t\xc3\xa9l.", "bd.", "boul.", "min.", "max."});
  return list;
}

AbbreviationList AbbreviationList::Load(const std::filesystem::path& path) {
  const std::string content = ReadFile(path);
  std::vector<std::string> entries;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(pos, end - pos);
    pos = end + 1;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    entries.push_back(line.substr(first, last - first + 1));
  }
  return AbbreviationList(std::move(entries));
}

SentenceSeq SplitSentences(std::string_view text, const AbbreviationList& abbreviations) {
  const auto cps = Decode(text);
  const std::size_t n = cps.size();
  std::vector<std::size_t> cuts;  // code point indices where a sentence starts

  // Terminator runs.
  for (std::size_t i = 0; i < n; ++i) {
    if (!IsTerminator(cps[i].c)) continue;
    const std::size_t run_start = i;
    std::size_t j = i;
    while (j < n && IsTerminator(cps[j].c)) ++j;
    const bool single_period = (j - run_start == 1) && cps[run_start].c == '.';
    // Closers, possibly after a space as in French "Non ! »".
    std::size_t k = j;
    bool spaced = false;
    for (;;) {
      while (k < n && IsCloser(cps[k].c)) ++k;
      std::size_t s = k;
      while (s < n && IsSpace(cps[s].c)) ++s;
      spaced = s > k;
      if (spaced && s < n && IsSpacedCloser(cps[s].c)) {
        k = s;
        continue;
      }
      j = k;
      k = s;
      break;
    }
    i = j - 1;
    if (k >= n) continue;
    const UChar32 next = cps[k].c;
    if (!spaced) continue;  // glued to the next word: "3.5", "www.a.fr"
    if (u_islower(next)) continue;
    if (single_period) {
      std::size_t w = run_start;
      while (w > 0 && !IsSpace(cps[w - 1].c)) --w;
      while (w < run_start && !IsAlnum(cps[w].c)) ++w;  // leading ( « etc.
      const std::size_t from = cps[w].begin;
      const std::size_t to = cps[run_start].end;
      if (abbreviations.Contains(text.substr(from, to - from))) continue;
    }
    cuts.push_back(k);
  }

  // Line structure: bullet items and blank lines.
  struct Line {
    std::size_t first;  // first code point of the line
    std::size_t content;  // first non-space code point, or end
    bool blank;
    bool bullet;
  };
  std::vector<Line> lines;
  for (std::size_t start = 0; start <= n;) {
    std::size_t end = start;
    while (end < n && cps[end].c != '\n') ++end;
    std::size_t content = start;
    while (content < end && IsSpace(cps[content].c)) ++content;
    const bool blank = content == end;
    const bool bullet = !blank && IsBulletMarker(cps[content].c) && content + 1 < end &&
                        IsSpace(cps[content + 1].c);
    lines.push_back({start, content, blank, bullet});
    if (end >= n) break;
    start = end + 1;
  }
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const Line& line = lines[l];
    if (line.blank) continue;
    const Line& prev = lines[l - 1];
    if (line.bullet || prev.bullet || prev.blank) cuts.push_back(line.content);
  }

  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Segments as byte ranges, trimmed.
  struct Segment {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Segment> segments;
  auto byte_at = [&](std::size_t idx) { return idx < n ? cps[idx].begin : text.size(); };
  std::size_t prev_cut = 0;
  auto emit = [&](std::size_t from, std::size_t to) {
    std::size_t a = from;
    while (a < to && IsSpace(cps[a].c)) ++a;
    std::size_t b = to;
    while (b > a && IsSpace(cps[b - 1].c)) --b;
    if (a < b) segments.push_back({byte_at(a), cps[b - 1].end});
  };
  for (std::size_t cut : cuts) {
    if (cut <= prev_cut) continue;
    emit(prev_cut, cut);
    prev_cut = cut;
  }
  emit(prev_cut, n);

  // Merge fragments without tokens into their neighbours.
  std::vector<Segment> merged;
  for (const auto& seg : segments) {
    const bool has_token = !Tokenize(text.substr(seg.begin, seg.end - seg.begin)).empty();
    if (!has_token && !merged.empty()) {
      merged.back().end = seg.end;
    } else if (has_token && !merged.empty() &&
               Tokenize(text.substr(merged.back().begin,
                                    merged.back().end - merged.back().begin)).empty()) {
      merged.back().end = seg.end;  // leading punctuation-only fragment
    } else {
      merged.push_back(seg);
    }
  }

  SentenceSeq out;
  for (const auto& seg : merged) {
    out.sentences.emplace_back(text.substr(seg.begin, seg.end - seg.begin));
    out.boundaries.push_back(seg.begin);
  }
  return out;
}

std::size_t CountSentences(std::string_view text, const AbbreviationList& abbreviations) {
  const auto seq = SplitSentences(text, abbreviations);
  if (seq.size() == 1 && Tokenize(seq.sentences.front()).empty()) return 0;
  return seq.size();
}

namespace {

bool IsFrenchVowel(UChar32 c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
    case 0xE9: case 0xE8: case 0xEA: case 0xEB:  // é è ê ë
    case 0xE0: case 0xE2:                        // à â
    case 0xEE: case 0xEF:                        // î ï
    case 0xF4:                                   // ô
    case 0xFB: case 0xF9: case 0xFC:             // û ù ü
    case 0x153:                                  // œ
      return true;
    default:
      return false;
  }
}

bool IsDiaeresisVowel(UChar32 c) { return c == 0xEB || c == 0xEF || c == 0xFC; }

}  // namespace

int CountSyllablesFr(std::string_view word) {
  std::vector<UChar32> letters;
  int groups = 0;
  bool in_group = false;
  for (const auto& cp : Decode(word)) {
    const UChar32 c = u_foldCase(cp.c, U_FOLD_CASE_DEFAULT);
    if (!IsLetter(c)) {
      in_group = false;
      continue;
    }
    letters.push_back(c);
    if (IsFrenchVowel(c)) {
      if (!in_group || IsDiaeresisVowel(c)) ++groups;
      in_group = true;
    } else {
      in_group = false;
    }
  }
  if (letters.empty() || groups == 0) return 1;

  auto ends_with = [&](std::string_view suffix) {
    if (letters.size() <= suffix.size()) return false;
    for (std::size_t i = 0; i < suffix.size(); ++i) {
      if (letters[letters.size() - suffix.size() + i] != static_cast<UChar32>(suffix[i])) {
        return false;
      }
    }
    const UChar32 before = letters[letters.size() - suffix.size() - 1];
    return !IsFrenchVowel(before);
  };
  const bool silent_final = ends_with("ent") || ends_with("es") || ends_with("e");
  if (silent_final && groups - 1 >= 1) --groups;
  return groups;
}

NGramBag NGrams(std::span<const std::string> tokens, int n) {
  if (n < 1) throw Error("n-gram order must be >= 1");
  NGramBag bag;
  bag.n = n;
  const auto order = static_cast<std::size_t>(n);
  if (tokens.size() < order) return bag;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    ++bag.counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                       tokens.begin() + static_cast<std::ptrdiff_t>(i + order))];
  }
  return bag;
}

NGramBag NGrams(const TokenSeq& tokens, int n) { return NGrams(std::span(tokens.tokens), n); }

std::set<std::string> Vocabulary(std::span<const std::string> texts) {
  std::set<std::string> vocab;
  for (const auto& t : texts) {
    auto seq = Tokenize(t, /*fold_case=*/true);
    vocab.insert(std::make_move_iterator(seq.tokens.begin()),
                 std::make_move_iterator(seq.tokens.end()));
  }
  return vocab;
}

}  // namespace etr::text
