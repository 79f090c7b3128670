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


// Writes the bundled sample data: a synthetic poem corpus, a three-class
// verse sentiment dataset with train/dev/test files, the default mention
// lexicon and the label map.

#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "versebias/corpus.h"
#include "versebias/hash.h"
#include "versebias/synthetic.h"

namespace fs = std::filesystem;
using namespace versebias;

int main(int argc, char** argv) {
  CLI::App app{"Generate the bundled sample corpus and sentiment data"};
  fs::path out = "data";
  int poems = 138;
  int sentiment_rows = 1200;
  uint64_t seed = 1;
  app.add_option("--out", out, "Output data directory");
  app.add_option("--poems", poems, "Number of poems");
  app.add_option("--sentiment-rows", sentiment_rows, "Labelled verses");
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  MentionLexicon lexicon = MentionLexicon::Default();
  WriteFile(out / "lexicon.tsv", lexicon.ToTsv());
  WriteFile(out / "label_map.json",
            nlohmann::json{{"-1", "negative"},
                           {"0", "no_impact"},
                           {"1", "positive"},
                           {"2", "mixed"}}
                    .dump(2) +
                "\n");

  synthetic::PoemCorpusConfig cfg;
  cfg.poems = poems;
  cfg.seed = seed;
  LoadedCorpus corpus = synthetic::PoemCorpus(cfg, lexicon);
  std::string jsonl;
  for (const auto& poem : corpus.poems) {
    for (const auto& v : poem) jsonl += VerseToJson(v).dump() + "\n";
  }
  WriteFile(out / "sample" / "poems.jsonl", jsonl);

  auto data = synthetic::SentimentDataset(sentiment_rows, seed + 100);
  std::string files[3];
  int id = 0;
  for (const auto& v : data) {
    std::string raw = std::to_string(NumericScore(v.label));
    files[static_cast<int>(v.split)] +=
        std::to_string(id++) + "\t" + v.text + "\t" + raw + "\n";
  }
  WriteFile(out / "sample" / "sentiment" / "train.tsv", files[0]);
  WriteFile(out / "sample" / "sentiment" / "dev.tsv", files[1]);
  WriteFile(out / "sample" / "sentiment" / "test.tsv", files[2]);
  std::printf("%zu poems, %zu verses, %zu labelled verses -> %s\n",
              corpus.poems.size(), corpus.NumVerses(), data.size(),
              out.string().c_str());
  return 0;
}
