//
// Copyright 2026 The fairaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "fairaudit/parser.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "fairaudit/error.h"
#include "text_util.h"

namespace fairaudit {
namespace {

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string Lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Matches normalised `cand` at `pos`, letting each space in cand absorb a
// run of whitespace. Returns the end offset on success.
std::optional<size_t> MatchAt(std::string_view lower, size_t pos,
                              std::string_view cand) {
  size_t i = pos;
  for (size_t k = 0; k < cand.size(); ++k) {
    if (cand[k] == ' ') {
      if (i >= lower.size() || !IsSpace(lower[i])) return std::nullopt;
      while (i < lower.size() && IsSpace(lower[i])) ++i;
      continue;
    }
    if (i >= lower.size() || lower[i] != cand[k]) return std::nullopt;
    ++i;
  }
  return i;
}

struct Match {
  size_t begin;
  size_t end;
  size_t label;
};

// Whole-word occurrences of any label name or long name within [from, to).
std::vector<Match> FindLabelMentions(std::string_view lower, size_t from,
                                     size_t to, const TaskKind& task) {
  std::vector<Match> matches;
  std::string_view window = lower.substr(0, to);
  for (size_t l = 0; l < task.num_labels(); ++l) {
    for (const std::string* s : {&task.labels()[l].name, &task.labels()[l].long_name}) {
      if (s->empty()) continue;
      const std::string cand = internal::NormalizeForMatch(*s);
      for (size_t p = from; p < to; ++p) {
        if (window[p] != cand[0]) continue;
        if (p > 0 && IsWordChar(window[p - 1])) continue;
        auto end = MatchAt(window, p, cand);
        if (!end) continue;
        if (*end < window.size() && IsWordChar(window[*end])) continue;
        matches.push_back({p, *end, l});
      }
    }
  }
  // Drop mentions nested inside a longer one ("stress" in "non-stress").
  std::vector<Match> kept;
  for (const Match& m : matches) {
    bool nested = std::any_of(matches.begin(), matches.end(), [&](const Match& o) {
      return o.begin <= m.begin && o.end >= m.end && (o.end - o.begin) > (m.end - m.begin);
    });
    if (!nested) kept.push_back(m);
  }
  return kept;
}

size_t SkipFiller(std::string_view lower, size_t i, bool allow_newlines) {
  while (i < lower.size()) {
    char c = lower[i];
    if (c == '*' || c == '_' || c == ' ' || c == '\t' ||
        (allow_newlines && (c == '\n' || c == '\r'))) {
      ++i;
    } else {
      break;
    }
  }
  return i;
}

// Finds "output" [spaces] ":" starting at or after `from`; returns the offset
// just past the colon.
std::optional<size_t> FindOutputToken(std::string_view lower, size_t from) {
  for (size_t p = lower.find("output", from); p != std::string_view::npos;
       p = lower.find("output", p + 1)) {
    if (p > 0 && IsWordChar(lower[p - 1])) continue;
    size_t i = p + 6;
    while (i < lower.size() && (lower[i] == ' ' || lower[i] == '*')) ++i;
    if (i < lower.size() && lower[i] == ':') return i + 1;
  }
  return std::nullopt;
}

std::optional<std::string> ExtractReasoning(std::string_view text,
                                            std::string_view lower,
                                            size_t from) {
  size_t p = lower.find("reasoning:", from);
  if (p == std::string_view::npos) return std::nullopt;
  std::string_view r = internal::Trim(text.substr(p + 10));
  if (r.empty()) return std::nullopt;
  return std::string(r);
}

ParsedPrediction Failed(std::string reason) {
  ParsedPrediction p;
  p.status = ParseStatus::kFailed;
  p.reason = std::move(reason);
  return p;
}

// Parses a run of digits at i. Returns value and end offset.
std::optional<std::pair<long long, size_t>> ReadInt(std::string_view s, size_t i) {
  size_t j = i;
  long long v = 0;
  while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) && j - i < 12) {
    v = v * 10 + (s[j] - '0');
    ++j;
  }
  if (j == i) return std::nullopt;
  return std::make_pair(v, j);
}

ParsedPrediction ParseSingle(std::string_view text, std::string_view lower,
                             const TaskKind& task) {
  auto after = FindOutputToken(lower, 0);
  if (!after) return Failed("no OUTPUT token");
  size_t i = SkipFiller(lower, *after, /*allow_newlines=*/true);

  ParsedPrediction pred;
  if (auto num = ReadInt(lower, i)) {
    const long long v = num->first;
    if (v < 0 || static_cast<size_t>(v) >= task.num_labels()) {
      return Failed("label index " + std::to_string(v) + " out of range");
    }
    size_t j = SkipFiller(lower, num->second, false);
    if (j < lower.size() && lower[j] == '(') {
      size_t close = lower.find(')', j);
      if (close != std::string_view::npos) {
        auto named = task.FindLabel(text.substr(j + 1, close - j - 1));
        if (named && *named != static_cast<size_t>(v)) {
          return Failed("OUTPUT index " + std::to_string(v) +
                        " contradicts label name '" +
                        std::string(text.substr(j + 1, close - j - 1)) + "'");
        }
      }
    }
    pred.label = static_cast<int>(v);
  } else {
    // Resolve by name within the answer line.
    size_t end = lower.find('\n', i);
    if (end == std::string_view::npos) end = lower.size();
    size_t stop = lower.find("reasoning", i);
    if (stop != std::string_view::npos && stop < end) end = stop;
    auto mentions = FindLabelMentions(lower, i, end, task);
    std::set<size_t> labels;
    for (const Match& m : mentions) labels.insert(m.label);
    if (labels.empty()) return Failed("no label after OUTPUT");
    if (labels.size() > 1) return Failed("ambiguous label names after OUTPUT");
    pred.label = static_cast<int>(*labels.begin());
  }
  pred.status = ParseStatus::kOk;
  pred.reasoning = ExtractReasoning(text, lower, *after);
  return pred;
}

// Value following "<label>:" at i: a digit 0/1 and/or a Yes/No word.
// Returns -1 when absent, -2 when contradictory or out of range.
int ReadFlagValue(std::string_view lower, size_t i) {
  i = SkipFiller(lower, i, false);
  if (lower.substr(i, 6) == "output") {
    size_t j = i + 6;
    while (j < lower.size() && lower[j] == ' ') ++j;
    if (j < lower.size() && lower[j] == ':') i = SkipFiller(lower, j + 1, false);
  }
  int digit = -1;
  if (auto num = ReadInt(lower, i)) {
    if (num->first > 1) return -2;
    digit = static_cast<int>(num->first);
    i = SkipFiller(lower, num->second, false);
    if (i < lower.size() && lower[i] == '(') ++i;
  }
  int word = -1;
  if (lower.substr(i, 3) == "yes" && (i + 3 >= lower.size() || !IsWordChar(lower[i + 3]))) {
    word = 1;
  } else if (lower.substr(i, 2) == "no" && (i + 2 >= lower.size() || !IsWordChar(lower[i + 2]))) {
    word = 0;
  }
  if (digit >= 0 && word >= 0 && digit != word) return -2;
  return digit >= 0 ? digit : word;
}

ParsedPrediction ParseMulti(std::string_view text, std::string_view lower,
                            const TaskKind& task) {
  std::vector<int> flags(task.num_labels(), -1);
  for (size_t l = 0; l < task.num_labels(); ++l) {
    const Label& label = task.labels()[l];
    size_t best_pos = std::string_view::npos;
    int best_value = -1;
    bool contradiction = false;
    for (const std::string* s : {&label.name, &label.long_name}) {
      if (s->empty()) continue;
      const std::string cand = internal::NormalizeForMatch(*s);
      for (size_t p = lower.find(cand[0]); p != std::string_view::npos;
           p = lower.find(cand[0], p + 1)) {
        if (p >= best_pos) break;
        if (p > 0 && IsWordChar(lower[p - 1])) continue;
        auto end = MatchAt(lower, p, cand);
        if (!end) continue;
        size_t c = *end;
        while (c < lower.size() && (lower[c] == ' ' || lower[c] == '*')) ++c;
        if (c >= lower.size() || lower[c] != ':') continue;
        int v = ReadFlagValue(lower, c + 1);
        if (v == -1) continue;
        best_pos = p;
        best_value = v;
        contradiction = (v == -2);
        break;
      }
    }
    if (best_pos == std::string_view::npos) {
      return Failed("missing value for label '" + label.display() + "'");
    }
    if (contradiction) {
      return Failed("invalid or contradictory value for label '" +
                    label.display() + "'");
    }
    flags[l] = best_value;
  }
  ParsedPrediction pred;
  pred.status = ParseStatus::kOk;
  pred.flags = std::move(flags);
  pred.reasoning = ExtractReasoning(text, lower, 0);
  return pred;
}

}  // namespace

Annotation ParsedPrediction::ToAnnotation() const {
  if (flags) return Annotation::Multi(*flags);
  return Annotation::Single(label.value_or(-1));
}

ParsedPrediction ParseResponse(std::string_view text, const TaskKind& task,
                               std::string_view prompt) {
  if (!prompt.empty()) {
    std::string_view body = text;
    while (!body.empty() && IsSpace(body.front())) body.remove_prefix(1);
    if (body.substr(0, prompt.size()) == prompt) text = body.substr(prompt.size());
  }
  if (internal::IsBlank(text)) return Failed("empty response");
  const std::string lower = Lower(text);
  return task.type() == TaskType::kMultilabel ? ParseMulti(text, lower, task)
                                              : ParseSingle(text, lower, task);
}

double FailureRate(std::span<const ParsedPrediction> predictions) {
  if (predictions.empty()) {
    throw Error(ErrorCode::kEmptyInput, "failure rate of an empty prediction list");
  }
  size_t failed = 0;
  for (const auto& p : predictions) failed += p.ok() ? 0 : 1;
  return static_cast<double>(failed) / static_cast<double>(predictions.size());
}

}  // namespace fairaudit
