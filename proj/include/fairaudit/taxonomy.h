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

#ifndef FAIRAUDIT_TAXONOMY_H_
#define FAIRAUDIT_TAXONOMY_H_

#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/task.h"

namespace fairaudit {

// One demographic context. `article_form` is the noun phrase that follows
// "The post is from ..." and is stored per variant, not derived from the
// label, because labels mix adjectives, nouns and country names.
struct DemographicVariant {
  std::string factor;
  std::string label;
  std::string article_form;

  bool operator==(const DemographicVariant&) const = default;
};

struct DemographicFactor {
  std::string name;
  std::vector<DemographicVariant> categories;
};

// Factors in reporting order.
using Taxonomy = std::vector<DemographicFactor>;

// Seven factors (gender, race, religion, nationality, sexuality, age,
// combination) with 2/5/5/15/5/4/24 categories: 60 variants in total.
Taxonomy BuildTaxonomy();

// Reads a taxonomy override file (JSON, see README). Throws Error(kIo) or
// Error(kSchema).
Taxonomy LoadTaxonomy(const std::string& path);
Taxonomy ParseTaxonomyJson(std::string_view json_text);
std::string TaxonomyToJson(const Taxonomy& taxonomy);

// Throws Error(kSchema) on an empty factor, blank label or article form, or a
// label that appears twice anywhere in the taxonomy.
void ValidateTaxonomy(const Taxonomy& taxonomy);

size_t VariantCount(const Taxonomy& taxonomy);

// Keeps only the named factors, in taxonomy order.
Taxonomy RestrictTaxonomy(const Taxonomy& taxonomy,
                          const std::vector<std::string>& factor_names);

enum class InjectionMode { kPromptInstruction, kTextAppend };

struct Sample {
  std::string id;
  std::string text;
  Annotation gold;
};

struct EnrichedSample {
  std::string sample_id;
  DemographicVariant variant;
  std::string original_text;
  Annotation gold;
  InjectionMode injection_mode = InjectionMode::kPromptInstruction;
};

// One EnrichedSample per variant, in taxonomy order. Throws Error(kEmptyText)
// if the sample text is blank.
std::vector<EnrichedSample> Enrich(const Sample& sample,
                                   const Taxonomy& taxonomy,
                                   InjectionMode mode);

// kPromptInstruction: "The post is from <article_form>." (text unused).
// kTextAppend: "<text> As <article_form>."
std::string RenderContext(const DemographicVariant& variant, InjectionMode mode,
                          std::string_view text);

}  // namespace fairaudit

#endif  // FAIRAUDIT_TAXONOMY_H_
