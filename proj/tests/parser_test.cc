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

#include <gtest/gtest.h>

#include "fairaudit/datasets.h"
#include "fairaudit/error.h"
#include "refusal_corpus.h"

namespace fairaudit {
namespace {

TaskKind Task(const char* name) { return FindBuiltinSpec(name)->task; }

TEST(ParserTest, BinaryIndexWithName) {
  const auto p = ParseResponse("OUTPUT: 1 (Stress)\nREASONING: deadlines.", Task("Dreaddit"));
  ASSERT_TRUE(p.ok()) << p.reason;
  EXPECT_EQ(p.label, 1);
  EXPECT_FALSE(p.flags);
  EXPECT_EQ(p.reasoning, "deadlines.");
}

TEST(ParserTest, IndexOnlyAndFormattingNoise) {
  const TaskKind t = Task("Dreaddit");
  EXPECT_EQ(ParseResponse("output:0", t).label, 0);
  EXPECT_EQ(ParseResponse("**OUTPUT:** 1", t).label, 1);
  EXPECT_EQ(ParseResponse("Sure.\nOUTPUT:\n  1 (Stress)", t).label, 1);
}

TEST(ParserTest, NameOnly) {
  const TaskKind t = Task("Dreaddit");
  auto p = ParseResponse("OUTPUT: Non-stress\nREASONING: calm", t);
  ASSERT_TRUE(p.ok()) << p.reason;
  EXPECT_EQ(p.label, 0);
  p = ParseResponse("OUTPUT: stress", t);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p.label, 1);
  p = ParseResponse("OUTPUT: jobs   and careers", Task("CAMS"));
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p.label, 2);
}

TEST(ParserTest, AmbiguousOrContradictoryFails) {
  const TaskKind t = Task("Dreaddit");
  auto p = ParseResponse("OUTPUT: Stress or Non-stress", t);
  EXPECT_FALSE(p.ok());
  EXPECT_EQ(p.reason, "ambiguous label names after OUTPUT");
  p = ParseResponse("OUTPUT: 0 (Stress)", t);
  EXPECT_FALSE(p.ok());
  EXPECT_NE(p.reason.find("contradicts"), std::string::npos);
  p = ParseResponse("OUTPUT: 2 (Stress)", t);
  EXPECT_FALSE(p.ok());
  EXPECT_EQ(p.reason, "label index 2 out of range");
}

TEST(ParserTest, FirstOutputWins) {
  const auto p = ParseResponse("OUTPUT: 5 (Alienation)\nREASONING: x\nOUTPUT: 2", Task("CAMS"));
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p.label, 5);
}

TEST(ParserTest, EchoedPromptIsStripped) {
  const std::string prompt =
      "Example:\nOUTPUT: 0 (Non-stress)\nREASONING: calm\n\nPost: x\nOUTPUT:\nREASONING:";
  const TaskKind t = Task("Dreaddit");
  auto p = ParseResponse(prompt + "\nOUTPUT: 1 (Stress)\nREASONING: busy", t, prompt);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p.label, 1);
  // Without the prompt the echoed exemplar answer is found first.
  EXPECT_EQ(ParseResponse(prompt + "\nOUTPUT: 1 (Stress)", t).label, 0);
  // A response that does not echo is parsed as is.
  EXPECT_EQ(ParseResponse("OUTPUT: 1", t, prompt).label, 1);
}

TEST(ParserTest, MultilabelLongNames) {
  const auto p = ParseResponse(
      "Thwarted Belongingness: 1 (Yes)\nREASONING: alone.\n"
      "Perceived Burdensomeness: 0 (No)\nREASONING: none.",
      Task("IRF"));
  ASSERT_TRUE(p.ok()) << p.reason;
  EXPECT_EQ(*p.flags, (std::vector<int>{1, 0}));
  EXPECT_FALSE(p.label);
  EXPECT_EQ(p.ToAnnotation(), Annotation::Multi({1, 0}));
}

TEST(ParserTest, MultilabelShortNamesAndWords) {
  const TaskKind t = Task("IRF");
  auto p = ParseResponse("TBe: Yes\nPBu: no", t);
  ASSERT_TRUE(p.ok()) << p.reason;
  EXPECT_EQ(*p.flags, (std::vector<int>{1, 0}));
  p = ParseResponse("tbe: OUTPUT: 0\npbu: 1", t);
  ASSERT_TRUE(p.ok()) << p.reason;
  EXPECT_EQ(*p.flags, (std::vector<int>{0, 1}));
}

TEST(ParserTest, MultilabelFailures) {
  const TaskKind t = Task("IRF");
  auto p = ParseResponse("Thwarted Belongingness: 1 (Yes)", t);
  EXPECT_FALSE(p.ok());
  EXPECT_EQ(p.reason, "missing value for label 'Perceived Burdensomeness'");
  p = ParseResponse("Thwarted Belongingness: 1 (No)\nPerceived Burdensomeness: 0", t);
  EXPECT_FALSE(p.ok());
  EXPECT_EQ(p.reason, "invalid or contradictory value for label 'Thwarted Belongingness'");
  p = ParseResponse("TBe: 3\nPBu: 0", t);
  EXPECT_FALSE(p.ok());
}

TEST(ParserTest, SadLabelsWithSpaces) {
  const TaskKind t = Task("SAD");
  std::string text;
  for (size_t i = 0; i < t.num_labels(); ++i) {
    text += t.labels()[i].display() + ": " + (i % 3 == 0 ? "1 (Yes)" : "0 (No)") +
            "\nREASONING: r\n";
  }
  const auto p = ParseResponse(text, t);
  ASSERT_TRUE(p.ok()) << p.reason;
  for (size_t i = 0; i < t.num_labels(); ++i) EXPECT_EQ((*p.flags)[i], i % 3 == 0 ? 1 : 0);
}

TEST(ParserTest, RefusalCorpusFails) {
  for (const char* name : {"Dreaddit", "CAMS", "SWMH", "IRF", "SAD"}) {
    for (std::string_view text : testing::kRefusals) {
      const auto p = ParseResponse(text, Task(name));
      EXPECT_FALSE(p.ok()) << name << ": " << text;
      EXPECT_FALSE(p.reason.empty());
    }
  }
  EXPECT_EQ(ParseResponse("I cannot help with that request.", Task("Dreaddit")).reason,
            "no OUTPUT token");
}

TEST(ParserTest, Idempotent) {
  const TaskKind t = Task("CAMS");
  for (std::string_view text : {"OUTPUT: 3 (Medication)", "OUTPUT: nothing", "x"}) {
    const auto a = ParseResponse(text, t);
    const auto b = ParseResponse(text, t);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.reason, b.reason);
  }
}

TEST(ParserTest, FailureRate) {
  const TaskKind t = Task("Dreaddit");
  std::vector<ParsedPrediction> v = {ParseResponse("OUTPUT: 1", t), ParseResponse("OUTPUT: 0", t),
                                     ParseResponse("OUTPUT: 1", t), ParseResponse("no", t)};
  EXPECT_DOUBLE_EQ(FailureRate(v), 0.25);
  v.pop_back();
  EXPECT_DOUBLE_EQ(FailureRate(v), 0.0);
  std::vector<ParsedPrediction> bad = {ParseResponse("", t)};
  EXPECT_DOUBLE_EQ(FailureRate(bad), 1.0);
  try {
    FailureRate({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

}  // namespace
}  // namespace fairaudit
