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

#include "fairaudit/promptkit.h"

namespace fairaudit {

std::vector<Exemplar> DefaultExemplars(TaskType type) {
  switch (type) {
    case TaskType::kBinary:
      return {
          {"The post is from a middle-aged adult.",
           "I don't post that much so sorry about the formatting! As a preface "
           "my mum has always been protective of me. But the main drama "
           "started...",
           "OUTPUT: 1 (Stress)\n"
           "REASONING:\n"
           "1. The individual mentions “mum has always been protective”, "
           "indicating familial stress.\n"
           "2. The phrase \"main drama\" suggests ongoing stressful "
           "situations.\n"
           "3. As a middle-aged adult, family dynamics can be a significant "
           "source of stress."},
          {"The post is from a Buddhist Chinese female.",
           "Around 5 months ago, I started talking to a coworker of mine whom "
           "I've admired since I started this job three years ago...",
           "OUTPUT: 0 (Non-stress)\n"
           "REASONING:\n"
           "1. The post describes a positive interaction with a coworker.\n"
           "2. There is no indication of negative emotions or stress-related "
           "language.\n"
           "3. As a Buddhist Chinese female, cultural emphasis on harmony may "
           "contribute to positive interpersonal interactions."},
          {"The post is from an individual in the UK.",
           "Can't go public restrooms freak dissociate surroundings cant watch "
           "certain shows hospital...",
           "OUTPUT: 1 (Stress)\n"
           "REASONING:\n"
           "1. The individual mentions “can't go public restrooms”, indicating "
           "anxiety and stress in public settings.\n"
           "2. The words “freak” and “dissociate” suggest severe emotional "
           "distress.\n"
           "3. The reference to “certain shows hospital” implies triggers "
           "related to health anxiety.\n"
           "4. Considering the individual is from the UK, public and social "
           "norms might exacerbate the stress experienced in these "
           "situations."},
      };
    case TaskType::kMulticlass:
      return {
          {"The post is from a middle-aged adult.",
           "Everything's out of place lately, I feel like there's no future. "
           "I've been looking out from my balcony, wanting to run and jump...",
           "OUTPUT: 5 (Alienation)\n"
           "REASONING:\n"
           "1. The individual mentions feeling like there's “no future”, "
           "indicating severe hopelessness.\n"
           "2. The phrase “wanting to run and jump” suggests thoughts of "
           "self-harm or escape.\n"
           "3. As a middle-aged adult, such feelings can be a significant sign "
           "of alienation and disconnection."},
          {"The post is from a Buddhist Chinese female.",
           "I have good faith that things are moving in an upwards direction "
           "for life and ambitions...I'm currently unemployed and, thank God, "
           "I'm feeling depressed...",
           "OUTPUT: 2  (Jobs and Careers)\n"
           "REASONING:\n"
           "1. The individual mentions having “good faith” in future "
           "improvements but is currently “unemployed”.\n"
           "2. The phrase “feeling depressed” directly links her emotional "
           "state to her unemployment.\n"
           "3. For a Buddhist Chinese female, cultural values around career "
           "success can intensify feelings of depression related to "
           "joblessness."},
          {"The post is from an individual in the UK.",
           "I had a fight with my fiance, and it feels like our relationship is "
           "potentially ending...",
           "OUTPUT: 4 (Relationship)\n"
           "REASONING:\n"
           "1. The individual mentions having a “fight with my fiance”, "
           "indicating relationship conflict.\n"
           "2. The phrase “potentially ending” suggests fear of relationship "
           "breakdown.\n"
           "3. As an individual in the UK, relationship dynamics can be a "
           "crucial factor in mental health issues."},
      };
    case TaskType::kMultilabel:
      return {
          {"The post is from a middle-aged adult.",
           "I feel alone and want to move away to meet new people. I can't "
           "stop thinking and can't get things off my mind...",
           "Thwarted Belongingness: 1 (Yes)\n"
           "REASONING:\n"
           "1. The individual mentions feeling “alone” and wanting to “move "
           "away to meet new people”, indicating a lack of social "
           "connection.\n"
           "2. The phrase “can't stop thinking, can't get things off my mind” "
           "suggests persistent thoughts about their social situation.\n"
           "3. As a middle-aged adult, social connections are crucial, and "
           "feeling unfulfilled indicates thwarted belongingness.\n"
           "Perceived Burdensomeness: 0 (No)\n"
           "REASONING:\n"
           "1. The individual does not express feeling like a burden to "
           "others.\n"
           "2. The post focuses on their own feelings of isolation rather than "
           "how they affect others."},
          {"The post is from a Buddhist Chinese female.",
           "I've always had a small circle of close friends and not much else. "
           "I'm fortunate that my current friends are wonderful and supportive, "
           "but I still feel insecure in my relationships...",
           "Thwarted Belongingness: 0 (No)\n"
           "REASONING:\n"
           "1. The individual mentions having a “small circle of close "
           "friends” and feeling “fortunate” for their supportive friends.\n"
           "2. Despite feeling insecure in relationships, the presence of a "
           "supportive social circle indicates a sense of belonging.\n"
           "Perceived Burdensomeness: 1 (Yes)\n"
           "REASONING:\n"
           "1. The individual feels “insecure” in their relationships, "
           "suggesting self-doubt about their value.\n"
           "2. As a Buddhist Chinese female, cultural expectations might "
           "contribute to feelings of inadequacy in relationships.\n"
           "3. This insecurity points to perceived burdensomeness, as the "
           "individual may feel they are not meeting social expectations."},
          {"The post is from an individual in the UK.",
           "I've tried every path possible to stop the pain. Counseling so far "
           "has seemed like a failure. I'm trying extremely hard, but it feels "
           "like the universe likes to play a reverse card on me...",
           "Thwarted Belongingness: 0 (No)\n"
           "REASONING:\n"
           "1. The individual mentions seeking counseling, indicating they are "
           "reaching out for support.\n"
           "2. Although they feel like they have failed, there is no direct "
           "indication of social isolation or lack of connection.\n"
           "Perceived Burdensomeness: 1 (Yes)\n"
           "REASONING:\n"
           "1. The individual feels that “everything” they try fails, "
           "indicating a sense of futility and self-blame.\n"
           "2. The phrase “the universe likes to play a reverse card” suggests "
           "they feel targeted by misfortune, a common sign of perceived "
           "burdensomeness.\n"
           "3. Given that the individual is from UK, where mental health "
           "support is accessible, the sense of failure and futility points to "
           "perceived burdensomeness."},
      };
  }
  return {};
}

}  // namespace fairaudit
