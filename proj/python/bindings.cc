// Copyright 2026 The Versebias Authors.
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


// Python bindings for the tokenizer, sentiment classifier, retriever index
// and bias prompts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "versebias/bias_eval.h"
#include "versebias/corpus.h"
#include "versebias/retriever/index.h"
#include "versebias/retriever/loss.h"
#include "versebias/sentiment.h"
#include "versebias/tokenizer.h"

namespace py = pybind11;
using namespace versebias;

namespace {

retriever::Retriever LoadRetriever(const std::filesystem::path& vocab,
                                   const std::filesystem::path& checkpoint) {
  return {SubwordVocab::Load(vocab),
          retriever::ModelParams<float>::Load(checkpoint)};
}

py::dict ToDict(const retriever::Suggestion& s) {
  py::dict d;
  d["rank"] = s.rank + 1;
  d["index"] = s.index;
  d["verse"] = s.verse;
  d["score"] = s.score;
  return d;
}

}  // namespace

PYBIND11_MODULE(_versebias, m) {
  m.doc() = "Verse suggestion retriever and sentiment-bias tools";

  py::class_<SubwordVocab>(m, "SubwordVocab")
      .def(py::init<>())
      .def_static("train", [](const std::vector<std::string>& corpus,
                              int target_size) {
        return SubwordVocab::Train(corpus, target_size);
      }, py::arg("corpus"), py::arg("target_size"))
      .def_static("load", &SubwordVocab::Load)
      .def_static("deserialize", &SubwordVocab::Deserialize)
      .def("encode", &SubwordVocab::Encode)
      .def("decode", [](const SubwordVocab& v, const std::vector<int>& ids) {
        return v.Decode(ids);
      })
      .def("serialize", &SubwordVocab::Serialize)
      .def("save", &SubwordVocab::Save)
      .def("__len__", &SubwordVocab::size);

  py::class_<SentimentModel>(m, "SentimentModel")
      .def_static("load", &SentimentModel::Load)
      .def("predict", [](const SentimentModel& s, std::string_view text) {
        return std::string(LabelName(s.Predict(text)));
      })
      .def("classify", [](const SentimentModel& s, std::string_view text) {
        auto c = s.Classify(text);
        py::dict probs;
        for (int i = 0; i < kNumPolarityClasses; ++i) {
          probs[py::str(std::string(LabelName(LabelFromClassIndex(i))))] =
              c.probabilities[i];
        }
        return py::make_tuple(std::string(LabelName(c.label)), probs);
      })
      .def("score", [](const SentimentModel& s, std::string_view text) {
        return NumericScore(s.Predict(text));
      }, "Numeric sentiment in {-1, 0, 1}.");

  py::class_<retriever::Retriever>(m, "Retriever")
      .def_static("load", &LoadRetriever, py::arg("vocab"), py::arg("checkpoint"))
      .def("embed", [](const retriever::Retriever& r, std::string_view text,
                       bool response) {
        auto e = r.Embed(response ? retriever::Tower::kResponse
                                  : retriever::Tower::kInput, text);
        return std::vector<double>(e.data(), e.data() + e.size());
      }, py::arg("text"), py::arg("response") = false)
      .def_property_readonly("checkpoint_hash", [](const retriever::Retriever& r) {
        return r.params.Hash();
      });

  py::class_<retriever::VerseIndex>(m, "VerseIndex")
      .def_static("load", &retriever::VerseIndex::Load)
      .def_static("build", &retriever::VerseIndex::Build)
      .def("suggest", [](const retriever::VerseIndex& idx,
                         const retriever::Retriever& r, std::string_view text,
                         int n, int offset) {
        py::list out;
        for (const auto& s : idx.Suggest(r, text, n, offset)) out.append(ToDict(s));
        return out;
      }, py::arg("retriever"), py::arg("text"), py::arg("n") = 10,
         py::arg("offset") = 0)
      .def("__len__", &retriever::VerseIndex::size)
      .def_property_readonly("verses", &retriever::VerseIndex::verses);

  m.def("score", [](const std::vector<double>& hx, const std::vector<double>& hy) {
    return retriever::Score(hx, hy);
  }, "Dot-product relevance of two embeddings.");

  m.def("build_prompts", []() {
    py::list out;
    for (const auto& p : BuildPrompts(MentionLexicon::Default())) {
      out.append(py::make_tuple(p.text, p.group,
                                std::string(MentionListName(p.list))));
    }
    return out;
  }, "(text, group, list) for the default mention lexicon.");

  m.def("swap_gender_pronouns", [](std::string_view text) {
    return SwapGenderPronouns(text, PronounMap::Default());
  });
  m.def("has_demographic_mention", [](std::string_view text) {
    return HasDemographicMention(text, MentionLexicon::Default());
  });
}
