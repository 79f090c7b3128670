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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "support/retriever_oracles.h"
#include "versebias/retriever/index.h"
#include "versebias/retriever/trainer.h"
#include "versebias/synthetic.h"
#include "versebias/tokenizer.h"

namespace versebias::retriever {
namespace {

using testing::CheckGradients;
using testing::RandomBatch;
using testing::RandomIds;
using testing::SoftmaxAt;
using testing::TinyConfig;

const LossOptions kPlain{.self_negative = false, .hard_negatives = false};

TEST(ScoreTest, HandExamples) {
  std::vector<double> a = {1, 0}, b = {0, 1};
  EXPECT_EQ(Score(a, b), 0.0);
  EXPECT_EQ(Score(a, a), 1.0);
  std::vector<double> c = {0.5, -0.5}, d = {0.2, 0.4};
  EXPECT_NEAR(Score(c, d), -0.1, 1e-15);
}

TEST(ScoreTest, DimensionMismatchThrows) {
  std::vector<double> a = {1, 0}, b = {1, 0, 0};
  EXPECT_THROW(Score(a, b), std::invalid_argument);
}

TEST(ScoreTest, GradientWithRespectToInputIsResponse) {
  std::vector<double> hx = {0.3, -0.7, 0.1}, hy = {0.9, 0.2, -0.4};
  const double eps = 1e-6;
  for (size_t i = 0; i < hx.size(); ++i) {
    auto up = hx, down = hx;
    up[i] += eps;
    down[i] -= eps;
    EXPECT_NEAR((Score(up, hy) - Score(down, hy)) / (2 * eps), hy[i], 1e-9);
  }
}

TEST(EncodeTest, ZeroParamsGiveZeroEmbedding) {
  auto params = ModelParams<double>::Zeros(TinyConfig());
  auto h = Encode(params, Tower::kInput, std::vector<int>{2, 5, 6, 3});
  EXPECT_EQ(h.size(), 8);
  EXPECT_EQ(h.cwiseAbs().maxCoeff(), 0.0);
}

TEST(EncodeTest, Deterministic) {
  auto params = ModelParams<float>::Random(TinyConfig(), 3);
  std::vector<int> ids = {2, 7, 9, 11, 3};
  auto a = Encode(params, Tower::kResponse, ids);
  auto b = Encode(params, Tower::kResponse, ids);
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(EncodeTest, ComponentsStrictlyInsideUnitInterval) {
  UniformStream rng(11);
  auto cfg = TinyConfig(30, 8, 1);
  ModelParams<double> p;
  for (int draw = 0; draw < 1000; ++draw) {
    // Fresh parameters every 50 draws, scaled up to push the head output.
    if (draw % 50 == 0) {
      p = ModelParams<double>::Random(cfg, 100 + draw);
      for (auto& [name, m] : p.Tensors()) *m *= 3.0;
    }
    auto h = Encode(p, draw % 2 ? Tower::kInput : Tower::kResponse,
                    RandomIds(rng, 30, 6));
    ASSERT_TRUE(h.allFinite());
    EXPECT_LT(h.cwiseAbs().maxCoeff(), 1.0) << "draw " << draw;
  }
}

TEST(EncodeTest, LongSequencesAreTruncatedAndFlagged) {
  auto cfg = TinyConfig();
  auto params = ModelParams<double>::Random(cfg, 5);
  std::vector<int> long_ids(cfg.max_len + 4, 7);
  long_ids.front() = 2;
  long_ids.back() = 3;
  bool truncated = false;
  auto h = Encode(params, Tower::kInput, long_ids, &truncated);
  EXPECT_TRUE(truncated);
  std::vector<int> kept(long_ids.begin(), long_ids.begin() + cfg.max_len - 1);
  kept.push_back(3);
  bool again = true;
  auto h2 = Encode(params, Tower::kInput, kept, &again);
  EXPECT_FALSE(again);
  EXPECT_TRUE((h.array() == h2.array()).all());
}

TEST(EncodeTest, InvalidIdsRejected) {
  auto params = ModelParams<double>::Zeros(TinyConfig());
  EXPECT_THROW(Encode(params, Tower::kInput, std::vector<int>{}),
               std::invalid_argument);
  EXPECT_THROW(Encode(params, Tower::kInput, std::vector<int>{2, 99, 3}),
               std::out_of_range);
}

TEST(ProbFullTest, EqualScoresAreUniform) {
  auto params = ModelParams<double>::Zeros(TinyConfig());
  std::vector<TokenIds> pool = {{2, 5, 3}, {2, 6, 3}, {2, 7, 3}, {2, 8, 3}};
  for (const auto& y : pool) {
    EXPECT_NEAR(ProbFull(params, pool[0], y, pool), 0.25, 1e-12);
  }
}

TEST(ProbFullTest, ClosedFormTwoElementPool) {
  // Scores 1 and 0 through the embedding-level helper with no self term.
  BatchEmbeddings e;
  e.inputs.resize(1, 2);
  e.inputs << 1, 0;
  e.responses.resize(2, 2);
  e.responses << 1, 0, 0, 0;
  EXPECT_NEAR(ProbFromEmbeddings(e, 0), std::exp(1.0) / (std::exp(1.0) + 1),
              1e-12);
  EXPECT_NEAR(ProbFromEmbeddings(e, 0), 0.73106, 1e-5);
}

TEST(ProbFullTest, SumsToOneAndRejectsForeignResponse) {
  UniformStream rng(2);
  auto params = ModelParams<double>::Random(TinyConfig(), 9);
  std::vector<TokenIds> pool;
  for (int i = 0; i < 12; ++i) pool.push_back(RandomIds(rng, 20, 5));
  auto x = RandomIds(rng, 20, 5);
  auto dist = PoolDistribution(params, x, pool);
  EXPECT_NEAR(std::accumulate(dist.begin(), dist.end(), 0.0), 1.0, 1e-9);
  EXPECT_THROW(ProbFull(params, x, TokenIds{2, 19, 19, 19, 19, 19, 19, 3}, pool),
               std::invalid_argument);
}

TEST(ProbBatchTest, ZeroParamsWithSelfNegative) {
  auto params = ModelParams<double>::Zeros(TinyConfig());
  TrainBatch b{{{{2, 5, 3}, {2, 6, 3}, {}}, {{2, 7, 3}, {2, 8, 3}, {}}}};
  EXPECT_NEAR(ProbBatch(params, b, 0, LossOptions{}), 1.0 / 3, 1e-12);
}

TEST(ProbBatchTest, HandSetEmbeddings) {
  BatchEmbeddings e;
  e.inputs.resize(2, 2);
  e.inputs << 1, 0, 0, 1;
  e.responses.resize(2, 2);
  e.responses << 1, 0, 0, 1;
  e.selves.resize(2, 2);
  e.selves << 1, 0, 0, 1;
  const double expected = std::exp(1.0) / (2 * std::exp(1.0) + 1);
  EXPECT_NEAR(ProbFromEmbeddings(e, 0), expected, 1e-12);
  EXPECT_NEAR(expected, 0.42231, 1e-5);
}

TEST(ProbBatchTest, HardNegativesOnlyEnterTheirOwnRow) {
  BatchEmbeddings e;
  e.inputs.resize(2, 2);
  e.inputs << 1, 0, 0, 1;
  e.responses = e.inputs;
  e.hard.resize(2);
  e.hard[0].resize(1, 2);
  e.hard[0] << 1, 0;
  e.hard[1].resize(0, 2);
  EXPECT_EQ(RowLogits(e, 0).size(), 3u);
  EXPECT_EQ(RowLogits(e, 1).size(), 2u);
  EXPECT_NEAR(ProbFromEmbeddings(e, 1), SoftmaxAt({0, 1}, 1), 1e-12);
}

TEST(ProbBatchTest, EqualsProbFullWhenBatchIsThePool) {
  UniformStream rng(4);
  for (int draw = 0; draw < 5; ++draw) {
    auto params = ModelParams<double>::Random(TinyConfig(), 40 + draw);
    TrainBatch b = RandomBatch(rng, 6, 20, 0);
    std::vector<TokenIds> pool;
    for (auto& r : b.rows) pool.push_back(r.positive);
    for (int i = 0; i < 6; ++i) {
      EXPECT_NEAR(ProbBatch(params, b, i, kPlain),
                  ProbFull(params, b.rows[i].input, b.rows[i].positive, pool),
                  1e-9);
    }
  }
}

TEST(BatchLossTest, ZeroParamsIsLogThree) {
  auto params = ModelParams<double>::Zeros(TinyConfig());
  TrainBatch b{{{{2, 5, 3}, {2, 6, 3}, {}}, {{2, 7, 3}, {2, 8, 3}, {}}}};
  EXPECT_NEAR(BatchLoss(params, b, LossOptions{}), std::log(3.0), 1e-12);
}

TEST(BatchLossTest, MatchesRecomputationFromProbBatch) {
  UniformStream rng(8);
  auto params = ModelParams<double>::Random(TinyConfig(), 77);
  TrainBatch b = RandomBatch(rng, 4, 20, 2);
  double oracle = 0;
  for (int i = 0; i < 4; ++i) oracle -= std::log(ProbBatch(params, b, i, LossOptions{}));
  EXPECT_NEAR(BatchLoss(params, b, LossOptions{}), oracle / 4, 1e-12);
}

TEST(BatchLossTest, PositiveWithSelfNegative) {
  UniformStream rng(9);
  for (int draw = 0; draw < 20; ++draw) {
    auto params = ModelParams<double>::Random(TinyConfig(), 500 + draw);
    TrainBatch b = RandomBatch(rng, 3, 20, 1);
    EXPECT_GT(BatchLoss(params, b, LossOptions{}), 0.0);
    for (int i = 0; i < 3; ++i) {
      EXPECT_LE(ProbBatch(params, b, i, LossOptions{}), 1.0);
    }
  }
}

TEST(BatchLossTest, RejectsSingleRowBatch) {
  auto params = ModelParams<double>::Zeros(TinyConfig());
  TrainBatch b{{{{2, 5, 3}, {2, 6, 3}, {}}}};
  EXPECT_THROW(BatchLoss(params, b, LossOptions{}), std::invalid_argument);
}

TEST(GradientTest, MatchesFiniteDifferences) {
  UniformStream rng(21);
  auto params = ModelParams<double>::Random(TinyConfig(12, 8, 1), 13);
  TrainBatch b = RandomBatch(rng, 3, 12, 2);
  auto r = CheckGradients(params, b, LossOptions{});
  EXPECT_EQ(r.checked, params.NumScalars());
  EXPECT_EQ(r.above_1e4, 0u) << "worst " << r.worst << " "
                             << r.max_relative_error;
}

TEST(GradientTest, SharedTowersMatchFiniteDifferences) {
  UniformStream rng(22);
  auto cfg = TinyConfig(12, 8, 1);
  cfg.share_towers = true;
  auto params = ModelParams<double>::Random(cfg, 14);
  TrainBatch b = RandomBatch(rng, 3, 12, 1);
  auto r = CheckGradients(params, b, LossOptions{});
  EXPECT_EQ(r.above_1e4, 0u) << "worst " << r.worst;
}

TEST(GradientTest, SymmetricSaddleHasZeroInputGradient) {
  // Identical token embeddings and no positional signal make every
  // sequence encode to the same vector; all logits then tie and the input
  // tower receives d(loss)/d(hx) = E[hy] - hy_i summed to zero over rows.
  auto cfg = TinyConfig(12, 8, 1);
  auto params = ModelParams<double>::Random(cfg, 15);
  for (auto t : {Tower::kInput, Tower::kResponse}) {
    auto& tower = params.tower(t);
    for (Eigen::Index r = 1; r < tower.token_embedding.rows(); ++r) {
      tower.token_embedding.row(r) = tower.token_embedding.row(0);
    }
    tower.position_embedding.setZero();
  }
  UniformStream rng(3);
  TrainBatch b = RandomBatch(rng, 4, 12, 0);
  auto grads = ModelParams<double>::Zeros(cfg);
  BatchLossAndGrad(params, b, kPlain, grads);
  const auto& g = grads.tower(Tower::kInput);
  EXPECT_LT(g.token_embedding.cwiseAbs().sum(), 1e-12);
  EXPECT_LT(g.head_weights.back().cwiseAbs().sum(), 1e-12);
}

TEST(TrainTest, RequiresTwoBatchesOfExamples) {
  std::vector<TrainRow> rows(7, TrainRow{{2, 5, 3}, {2, 6, 3}, {}});
  TrainConfig tc;
  tc.batch_size = 4;
  tc.steps = 1;
  EXPECT_THROW(Train(rows, TinyConfig(), tc), std::invalid_argument);
}

std::vector<TrainRow> TopicRows(int n, const SubwordVocab& vocab) {
  std::vector<TrainRow> rows;
  for (auto& [x, y] : synthetic::TopicPairs(n, 5)) {
    rows.push_back({vocab.Encode(x), vocab.Encode(y), {}});
  }
  return rows;
}

TEST(TrainTest, SeedRepeatIsBitIdenticalAndOrderFree) {
  SubwordVocab vocab;
  auto rows = TopicRows(40, vocab);
  auto cfg = TinyConfig(vocab.size(), 8, 1);
  cfg.max_len = 48;
  TrainConfig tc;
  tc.batch_size = 8;
  tc.steps = 6;
  auto a = Train(rows, cfg, tc);
  auto b = Train(rows, cfg, tc);
  EXPECT_EQ(a.params.Serialize(), b.params.Serialize());
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  std::mt19937 shuffle(1);
  std::shuffle(rows.begin(), rows.end(), shuffle);
  auto c = Train(rows, cfg, tc);
  EXPECT_EQ(a.params.Hash(), c.params.Hash());
  tc.seed = 8;
  EXPECT_NE(Train(rows, cfg, tc).params.Hash(), a.params.Hash());
}

TEST(TrainTest, LossDecreasesOnTopicPairs) {
  auto pairs = synthetic::TopicPairs(120, 5);
  std::vector<std::string> text;
  for (auto& [x, y] : pairs) {
    text.push_back(x);
    text.push_back(y);
  }
  auto vocab = SubwordVocab::Train(text, 400);
  auto rows = TopicRows(120, vocab);
  auto cfg = TinyConfig(vocab.size(), 16, 1);
  cfg.max_len = 24;
  TrainConfig tc;
  tc.batch_size = 16;
  tc.steps = 200;
  auto r = Train(rows, cfg, tc);
  ASSERT_EQ(r.loss_curve.size(), 200u);
  double head = std::accumulate(r.loss_curve.begin(), r.loss_curve.begin() + 20, 0.0);
  double tail = std::accumulate(r.loss_curve.end() - 20, r.loss_curve.end(), 0.0);
  EXPECT_LT(tail, head);
}

TEST(TrainTest, DivergenceIsReported) {
  SubwordVocab vocab;
  auto rows = TopicRows(16, vocab);
  auto cfg = TinyConfig(vocab.size(), 8, 1);
  cfg.max_len = 48;
  TrainConfig tc;
  tc.batch_size = 8;
  tc.steps = 50;
  tc.learning_rate = 1e30;
  EXPECT_THROW(Train(rows, cfg, tc), TrainingDiverged);
}

TEST(TrainConfigTest, RejectsUnknownKeys) {
  EXPECT_THROW(TrainConfig::FromJson({{"stepz", 3}}), std::invalid_argument);
  auto tc = TrainConfig::FromJson(TrainConfig{}.ToJson());
  EXPECT_EQ(tc.ToJson(), TrainConfig{}.ToJson());
}

class CheckpointTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_ = std::filesystem::temp_directory_path() /
                               ("vb_ckpt_" + std::to_string(::getpid()));
  void SetUp() override { std::filesystem::create_directories(dir_); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
};

TEST_F(CheckpointTest, RoundTripPreservesHash) {
  auto params = ModelParams<float>::Random(TinyConfig(), 99);
  params.Save(dir_ / "m.ckpt");
  auto loaded = ModelParams<float>::Load(dir_ / "m.ckpt");
  EXPECT_EQ(loaded.Hash(), params.Hash());
  EXPECT_EQ(loaded.config(), params.config());
  EXPECT_EQ(loaded.Serialize(), params.Serialize());
}

TEST_F(CheckpointTest, CorruptionDetected) {
  auto params = ModelParams<float>::Random(TinyConfig(), 99);
  std::string bytes = params.Serialize();
  bytes[bytes.size() - 3] ^= 0x40;
  EXPECT_THROW(ModelParams<float>::Deserialize(bytes), std::invalid_argument);
  EXPECT_THROW(ModelParams<double>::Deserialize(params.Serialize()),
               std::invalid_argument);
}

TEST(EncoderConfigTest, JsonRoundTripAndValidation) {
  auto cfg = EncoderConfig::Desk(300);
  EXPECT_EQ(EncoderConfig::FromJson(cfg.ToJson()), cfg);
  auto j = cfg.ToJson();
  j["colour"] = 1;
  EXPECT_THROW(EncoderConfig::FromJson(j), std::invalid_argument);
  cfg.num_heads = 3;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  auto ref = EncoderConfig::Reference(300);
  EXPECT_EQ(ref.num_layers, 4);
  EXPECT_EQ(ref.num_heads, 4);
  EXPECT_EQ(ref.head_hidden, 500);
}

Retriever ByteRetriever(uint64_t seed, bool zero = false) {
  SubwordVocab vocab;
  auto cfg = TinyConfig(vocab.size(), 16, 1);
  cfg.max_len = 48;
  return {vocab, zero ? ModelParams<float>::Zeros(cfg)
                      : ModelParams<float>::Random(cfg, seed)};
}

std::vector<std::string> Verses(int n) {
  std::vector<std::string> out;
  for (auto& [x, y] : synthetic::TopicPairs(n, 3)) out.push_back(y);
  return out;
}

TEST(IndexTest, SingleVersePool) {
  auto r = ByteRetriever(1);
  auto idx = VerseIndex::Build({"a lone verse"}, r);
  EXPECT_EQ(idx.embeddings().rows(), 1);
  EXPECT_EQ(idx.embeddings().cols(), 8);
  EXPECT_THROW(VerseIndex::Build({}, r), std::invalid_argument);
}

TEST(IndexTest, RowsReEncodeExactly) {
  auto r = ByteRetriever(2);
  auto verses = Verses(10);
  auto idx = VerseIndex::Build(verses, r);
  for (size_t i = 0; i < verses.size(); ++i) {
    auto h = r.Embed(Tower::kResponse, verses[i]);
    EXPECT_TRUE((idx.embeddings().row(i).array() == h.array()).all()) << i;
  }
}

TEST(IndexTest, HashTracksParameters) {
  auto a = ByteRetriever(3);
  auto b = ByteRetriever(3);
  auto c = ByteRetriever(4);
  auto verses = Verses(5);
  auto ia = VerseIndex::Build(verses, a);
  EXPECT_EQ(ia.checkpoint_hash(), VerseIndex::Build(verses, b).checkpoint_hash());
  EXPECT_NE(ia.checkpoint_hash(), VerseIndex::Build(verses, c).checkpoint_hash());
  EXPECT_THROW(ia.Suggest(c, "the river", 3), StaleIndex);
  EXPECT_NO_THROW(ia.Suggest(b, "the river", 3));
}

TEST(IndexTest, IdenticalEmbeddingsFallBackToPoolOrder) {
  auto r = ByteRetriever(0, true);
  auto verses = Verses(8);
  auto idx = VerseIndex::Build(verses, r);
  auto got = idx.Suggest(r, "anything", 3);
  ASSERT_EQ(got.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(got[i].index, i);
    EXPECT_EQ(got[i].verse, verses[i]);
    EXPECT_EQ(got[i].rank, i);
  }
}

TEST(IndexTest, OversizedRequestReturnsWholePoolAndPagesAreDisjoint) {
  auto r = ByteRetriever(5);
  auto idx = VerseIndex::Build(Verses(7), r);
  auto all = idx.Suggest(r, "the stone", 50);
  EXPECT_EQ(all.size(), 7u);
  auto first = idx.Suggest(r, "the stone", 3, 0);
  auto second = idx.Suggest(r, "the stone", 3, 3);
  auto third = idx.Suggest(r, "the stone", 3, 6);
  EXPECT_EQ(third.size(), 1u);
  std::vector<int> seen;
  for (auto* page : {&first, &second, &third}) {
    for (auto& s : *page) seen.push_back(s.index);
  }
  std::vector<int> expected;
  for (auto& s : all) expected.push_back(s.index);
  EXPECT_EQ(seen, expected);
  EXPECT_TRUE(idx.Suggest(r, "the stone", 3, 9).empty());
  EXPECT_THROW(idx.Suggest(r, "x", 0), std::invalid_argument);
  EXPECT_THROW(idx.Suggest(r, "x", 1, -1), std::invalid_argument);
  for (size_t i = 1; i < all.size(); ++i) EXPECT_GE(all[i - 1].score, all[i].score);
}

TEST(IndexTest, ScoreOrderEqualsProbabilityOrder) {
  auto r = ByteRetriever(6);
  auto verses = Verses(20);
  auto idx = VerseIndex::Build(verses, r);
  const std::string input = "she walked by the river in sweet delight";
  std::vector<TokenIds> pool;
  for (auto& v : verses) pool.push_back(r.vocab.Encode(v));
  auto dist = PoolDistribution(r.params, r.vocab.Encode(input), pool);
  std::vector<int> by_prob(verses.size());
  std::iota(by_prob.begin(), by_prob.end(), 0);
  std::stable_sort(by_prob.begin(), by_prob.end(),
                   [&](int a, int b) { return dist[a] > dist[b]; });
  std::vector<int> by_score;
  for (auto& s : idx.Suggest(r, input, 20)) by_score.push_back(s.index);
  EXPECT_EQ(by_score, by_prob);
}

TEST(IndexTest, SerializationRoundTrip) {
  auto r = ByteRetriever(7);
  auto idx = VerseIndex::Build(Verses(6), r);
  auto back = VerseIndex::Deserialize(idx.Serialize());
  EXPECT_EQ(back.verses(), idx.verses());
  EXPECT_EQ(back.checkpoint_hash(), idx.checkpoint_hash());
  EXPECT_TRUE((back.embeddings().array() == idx.embeddings().array()).all());
  EXPECT_THROW(VerseIndex::Deserialize("junk"), std::exception);
}

}  // namespace
}  // namespace versebias::retriever
