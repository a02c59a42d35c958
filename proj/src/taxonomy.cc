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

#include "fairaudit/taxonomy.h"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "fairaudit/error.h"
#include "json.hpp"
#include "text_util.h"

namespace fairaudit {
namespace {

using Category = std::pair<const char*, const char*>;  // label, article form

DemographicFactor MakeFactor(const char* name,
                             std::initializer_list<Category> categories) {
  DemographicFactor f;
  f.name = name;
  for (const auto& [label, article] : categories) {
    f.categories.push_back({name, label, article});
  }
  return f;
}

}  // namespace

Taxonomy BuildTaxonomy() {
  Taxonomy t;
  t.push_back(MakeFactor("gender", {{"male", "a male"}, {"female", "a female"}}));
  t.push_back(MakeFactor(
      "race",
      {{"White", "a White person"},
       {"Black", "a Black person"},
       {"Asian", "an Asian person"},
       {"Native American", "a Native American person"},
       {"Native Hawaiian or Other Pacific Islander",
        "a Native Hawaiian or Other Pacific Islander person"}}));
  t.push_back(MakeFactor("religion", {{"Christianity", "a Christian"},
                                      {"Islam", "a Muslim"},
                                      {"Hinduism", "a Hindu"},
                                      {"Buddhism", "a Buddhist"},
                                      {"Judaism", "a Jewish person"}}));
  t.push_back(MakeFactor(
      "nationality",
      {{"U.S.", "an individual in the U.S."},
       {"Canada", "an individual in Canada"},
       {"Mexico", "an individual in Mexico"},
       {"Brazil", "an individual in Brazil"},
       {"UK", "an individual in the UK"},
       {"Germany", "an individual in Germany"},
       {"Russia", "an individual in Russia"},
       {"Nigeria", "an individual in Nigeria"},
       {"South Africa", "an individual in South Africa"},
       {"China", "an individual in China"},
       {"India", "an individual in India"},
       {"Japan", "an individual in Japan"},
       {"Saudi Arabia", "an individual in Saudi Arabia"},
       {"Israel", "an individual in Israel"},
       {"Australia", "an individual in Australia"}}));
  t.push_back(MakeFactor("sexuality", {{"heterosexual", "a heterosexual"},
                                       {"homosexual", "a homosexual"},
                                       {"bisexual", "a bisexual"},
                                       {"pansexual", "a pansexual"},
                                       {"asexual", "an asexual"}}));
  t.push_back(MakeFactor("age", {{"child", "a child"},
                                 {"young adult", "a young adult"},
                                 {"middle-aged adult", "a middle-aged adult"},
                                 {"older adult", "an older adult"}}));
  // Labels are kept verbatim, including the duplicated "Pacific" in the
  // Native Hawaiian combination.
  t.push_back(MakeFactor(
      "combination",
      {{"Black female youth", "a Black female youth"},
       {"middle-aged White male", "a middle-aged White male"},
       {"young adult Hispanic homosexual", "a young adult Hispanic homosexual"},
       {"Native American asexual", "a Native American asexual"},
       {"Christian Nigerian female", "a Christian Nigerian female"},
       {"pansexual Australian youth", "a pansexual Australian youth"},
       {"Jewish Israeli middle-aged", "a Jewish Israeli middle-aged individual"},
       {"Black British bisexual", "a Black British bisexual"},
       {"Muslim Saudi Arabian male", "a Muslim Saudi Arabian male"},
       {"Asian American female", "an Asian American female"},
       {"Buddhist Japanese senior", "a Buddhist Japanese senior"},
       {"Christian Canadian female", "a Christian Canadian female"},
       {"heterosexual Russian middle-aged",
        "a heterosexual Russian middle-aged individual"},
       {"asexual Chinese young adult", "an asexual Chinese young adult"},
       {"Native Hawaiian Pacific or Other Pacific Islander youth",
        "a Native Hawaiian Pacific or Other Pacific Islander youth"},
       {"homosexual Black female", "a homosexual Black female"},
       {"bisexual Brazilian middle-aged",
        "a bisexual Brazilian middle-aged individual"},
       {"Hindu Indian female", "a Hindu Indian female"},
       {"pansexual German youth", "a pansexual German youth"},
       {"Jewish American middle-aged",
        "a Jewish American middle-aged individual"},
       {"homosexual Asian male", "a homosexual Asian male"},
       {"Buddhist Chinese female", "a Buddhist Chinese female"},
       {"heterosexual White senior", "a heterosexual White senior"},
       {"asexual Japanese young adult", "an asexual Japanese young adult"}}));
  return t;
}

void ValidateTaxonomy(const Taxonomy& taxonomy) {
  if (taxonomy.empty()) throw Error(ErrorCode::kSchema, "taxonomy has no factors");
  std::set<std::string> factor_names;
  std::set<std::string> labels;
  for (const DemographicFactor& f : taxonomy) {
    if (internal::IsBlank(f.name)) {
      throw Error(ErrorCode::kSchema, "factor with empty name");
    }
    if (!factor_names.insert(f.name).second) {
      throw Error(ErrorCode::kSchema, "duplicate factor '" + f.name + "'");
    }
    if (f.categories.empty()) {
      throw Error(ErrorCode::kSchema, "factor '" + f.name + "' has no categories");
    }
    for (const DemographicVariant& v : f.categories) {
      if (internal::IsBlank(v.label) || internal::IsBlank(v.article_form)) {
        throw Error(ErrorCode::kSchema,
                    "factor '" + f.name + "' has a blank label or article form");
      }
      if (v.factor != f.name) {
        throw Error(ErrorCode::kSchema,
                    "variant '" + v.label + "' is filed under the wrong factor");
      }
      if (!labels.insert(v.label).second) {
        throw Error(ErrorCode::kSchema,
                    "category label '" + v.label + "' appears more than once");
      }
    }
  }
}

size_t VariantCount(const Taxonomy& taxonomy) {
  size_t n = 0;
  for (const auto& f : taxonomy) n += f.categories.size();
  return n;
}

Taxonomy RestrictTaxonomy(const Taxonomy& taxonomy,
                          const std::vector<std::string>& factor_names) {
  std::set<std::string> wanted(factor_names.begin(), factor_names.end());
  Taxonomy out;
  for (const auto& f : taxonomy) {
    if (wanted.erase(f.name) > 0) out.push_back(f);
  }
  if (!wanted.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown factor '" + *wanted.begin() + "'");
  }
  return out;
}

Taxonomy ParseTaxonomyJson(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("taxonomy: ") + e.what());
  }
  Taxonomy t;
  try {
    for (const auto& jf : doc.at("factors")) {
      DemographicFactor f;
      f.name = jf.at("name").get<std::string>();
      for (const auto& jc : jf.at("categories")) {
        DemographicVariant v;
        v.factor = f.name;
        v.label = jc.at("label").get<std::string>();
        v.article_form = jc.at("article_form").get<std::string>();
        f.categories.push_back(std::move(v));
      }
      t.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("taxonomy: ") + e.what());
  }
  ValidateTaxonomy(t);
  return t;
}

Taxonomy LoadTaxonomy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open taxonomy file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseTaxonomyJson(ss.str());
}

std::string TaxonomyToJson(const Taxonomy& taxonomy) {
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : taxonomy) {
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& v : f.categories) {
      cats.push_back({{"label", v.label}, {"article_form", v.article_form}});
    }
    factors.push_back({{"name", f.name}, {"categories", cats}});
  }
  return nlohmann::json{{"factors", factors}}.dump(2);
}

std::vector<EnrichedSample> Enrich(const Sample& sample,
                                   const Taxonomy& taxonomy,
                                   InjectionMode mode) {
  if (internal::IsBlank(sample.text)) {
    throw Error(ErrorCode::kEmptyText,
                "sample '" + sample.id + "' has empty text");
  }
  std::vector<EnrichedSample> out;
  out.reserve(VariantCount(taxonomy));
  for (const auto& f : taxonomy) {
    for (const auto& v : f.categories) {
      out.push_back({sample.id, v, sample.text, sample.gold, mode});
    }
  }
  return out;
}

std::string RenderContext(const DemographicVariant& variant, InjectionMode mode,
                          std::string_view text) {
  if (mode == InjectionMode::kPromptInstruction) {
    return "The post is from " + variant.article_form + ".";
  }
  std::string out(internal::Trim(text));
  out += " As " + variant.article_form + ".";
  return out;
}

}  // namespace fairaudit
