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


#include "versebias/retriever/model.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "versebias/hash.h"

namespace versebias::retriever {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr std::string_view kCheckpointMagic = "versebias-checkpoint 1";
constexpr double kNormEpsilon = 1e-5;

template <typename Real>
std::string_view DtypeName() {
  return sizeof(Real) == 4 ? "float32" : "float64";
}

template <typename Real>
Matrix<Real> Zero(int rows, int cols) {
  return Matrix<Real>::Zero(rows, cols);
}

template <typename Real>
void FillNormal(Matrix<Real>& m, double stddev, UniformStream& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<Real>(stddev * rng.Normal());
  }
}

template <typename Real>
TowerParams<Real> ZeroTower(const EncoderConfig& c) {
  const int d = c.model_dim;
  TowerParams<Real> t;
  t.token_embedding = Zero<Real>(c.vocab_size, d);
  t.position_embedding = Zero<Real>(c.max_len, d);
  for (int l = 0; l < c.num_layers; ++l) {
    LayerParams<Real> p;
    p.attn_norm_gain = p.attn_norm_bias = Zero<Real>(1, d);
    p.query = p.key = p.value = p.output = Zero<Real>(d, d);
    p.query_bias = p.value_bias = p.output_bias = Zero<Real>(1, d);
    p.ff_norm_gain = p.ff_norm_bias = Zero<Real>(1, d);
    p.ff_in = Zero<Real>(d, c.ff_hidden);
    p.ff_in_bias = Zero<Real>(1, c.ff_hidden);
    p.ff_out = Zero<Real>(c.ff_hidden, d);
    p.ff_out_bias = Zero<Real>(1, d);
    t.layers.push_back(std::move(p));
  }
  t.final_norm_gain = t.final_norm_bias = Zero<Real>(1, d);
  for (int l = 0; l < c.head_layers; ++l) {
    int in = l == 0 ? d : c.head_hidden;
    int out = l == c.head_layers - 1 ? c.embedding_dim : c.head_hidden;
    t.head_weights.push_back(Zero<Real>(in, out));
    t.head_biases.push_back(Zero<Real>(1, out));
  }
  return t;
}

template <typename Real>
void RandomizeTower(TowerParams<Real>& t, UniformStream& rng) {
  auto xavier = [&](Matrix<Real>& m) {
    FillNormal(m, std::sqrt(2.0 / static_cast<double>(m.rows() + m.cols())),
               rng);
  };
  const double embed_std = 1.0 / std::sqrt(t.token_embedding.cols());
  FillNormal(t.token_embedding, embed_std, rng);
  FillNormal(t.position_embedding, embed_std, rng);
  for (auto& p : t.layers) {
    p.attn_norm_gain.setOnes();
    p.ff_norm_gain.setOnes();
    xavier(p.query);
    xavier(p.key);
    xavier(p.value);
    xavier(p.output);
    xavier(p.ff_in);
    xavier(p.ff_out);
  }
  t.final_norm_gain.setOnes();
  for (auto& w : t.head_weights) xavier(w);
}

template <typename Real>
void AppendTower(const std::string& prefix, TowerParams<Real>& t,
                 std::vector<std::pair<std::string, Matrix<Real>*>>& out) {
  out.emplace_back(prefix + "token_embedding", &t.token_embedding);
  out.emplace_back(prefix + "position_embedding", &t.position_embedding);
  for (size_t l = 0; l < t.layers.size(); ++l) {
    auto& p = t.layers[l];
    std::string lp = prefix + "layer" + std::to_string(l) + ".";
    out.emplace_back(lp + "attn_norm_gain", &p.attn_norm_gain);
    out.emplace_back(lp + "attn_norm_bias", &p.attn_norm_bias);
    out.emplace_back(lp + "query", &p.query);
    out.emplace_back(lp + "query_bias", &p.query_bias);
    out.emplace_back(lp + "key", &p.key);
    out.emplace_back(lp + "value", &p.value);
    out.emplace_back(lp + "value_bias", &p.value_bias);
    out.emplace_back(lp + "output", &p.output);
    out.emplace_back(lp + "output_bias", &p.output_bias);
    out.emplace_back(lp + "ff_norm_gain", &p.ff_norm_gain);
    out.emplace_back(lp + "ff_norm_bias", &p.ff_norm_bias);
    out.emplace_back(lp + "ff_in", &p.ff_in);
    out.emplace_back(lp + "ff_in_bias", &p.ff_in_bias);
    out.emplace_back(lp + "ff_out", &p.ff_out);
    out.emplace_back(lp + "ff_out_bias", &p.ff_out_bias);
  }
  out.emplace_back(prefix + "final_norm_gain", &t.final_norm_gain);
  out.emplace_back(prefix + "final_norm_bias", &t.final_norm_bias);
  for (size_t l = 0; l < t.head_weights.size(); ++l) {
    std::string hp = prefix + "head" + std::to_string(l) + ".";
    out.emplace_back(hp + "weight", &t.head_weights[l]);
    out.emplace_back(hp + "bias", &t.head_biases[l]);
  }
}

int GetInt(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    throw std::invalid_argument("encoder config '" + key +
                                "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace

EncoderConfig EncoderConfig::Desk(int vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  return c;
}

EncoderConfig EncoderConfig::Reference(int vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.max_len = 64;
  c.model_dim = 1024;
  c.num_layers = 4;
  c.num_heads = 4;
  c.ff_hidden = 1024;
  c.head_layers = 2;
  c.head_hidden = 500;
  c.embedding_dim = 500;
  return c;
}

void EncoderConfig::Validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) {
      throw std::invalid_argument(std::string("encoder config: ") + name +
                                  " must be >= 1");
    }
  };
  positive(vocab_size, "vocab_size");
  positive(max_len, "max_len");
  positive(model_dim, "model_dim");
  positive(num_heads, "num_heads");
  positive(ff_hidden, "ff_hidden");
  positive(head_layers, "head_layers");
  positive(head_hidden, "head_hidden");
  positive(embedding_dim, "embedding_dim");
  if (num_layers < 0) {
    throw std::invalid_argument("encoder config: num_layers must be >= 0");
  }
  if (max_len < 2) {
    throw std::invalid_argument("encoder config: max_len must be >= 2");
  }
  if (model_dim % num_heads != 0) {
    throw std::invalid_argument(
        "encoder config: model_dim must be divisible by num_heads");
  }
  if (!(attention_dropout >= 0 && attention_dropout < 1)) {
    throw std::invalid_argument(
        "encoder config: attention_dropout must be in [0, 1)");
  }
}

nlohmann::json EncoderConfig::ToJson() const {
  return {{"vocab_size", vocab_size},
          {"max_len", max_len},
          {"model_dim", model_dim},
          {"num_layers", num_layers},
          {"num_heads", num_heads},
          {"ff_hidden", ff_hidden},
          {"head_layers", head_layers},
          {"head_hidden", head_hidden},
          {"embedding_dim", embedding_dim},
          {"attention_dropout", attention_dropout},
          {"share_towers", share_towers}};
}

EncoderConfig EncoderConfig::FromJson(const nlohmann::json& j) {
  EncoderConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "vocab_size") {
      c.vocab_size = GetInt(v, key);
    } else if (key == "max_len") {
      c.max_len = GetInt(v, key);
    } else if (key == "model_dim") {
      c.model_dim = GetInt(v, key);
    } else if (key == "num_layers") {
      c.num_layers = GetInt(v, key);
    } else if (key == "num_heads") {
      c.num_heads = GetInt(v, key);
    } else if (key == "ff_hidden") {
      c.ff_hidden = GetInt(v, key);
    } else if (key == "head_layers") {
      c.head_layers = GetInt(v, key);
    } else if (key == "head_hidden") {
      c.head_hidden = GetInt(v, key);
    } else if (key == "embedding_dim") {
      c.embedding_dim = GetInt(v, key);
    } else if (key == "attention_dropout") {
      c.attention_dropout = v.get<double>();
    } else if (key == "share_towers") {
      c.share_towers = v.get<bool>();
    } else {
      throw std::invalid_argument("unknown encoder config key: " + key);
    }
  }
  return c;
}

template <typename Real>
ModelParams<Real> ModelParams<Real>::Zeros(const EncoderConfig& config) {
  config.Validate();
  ModelParams p;
  p.config_ = config;
  p.input_ = ZeroTower<Real>(config);
  if (!config.share_towers) p.response_ = ZeroTower<Real>(config);
  return p;
}

template <typename Real>
ModelParams<Real> ModelParams<Real>::Random(const EncoderConfig& config,
                                            uint64_t seed) {
  ModelParams p = Zeros(config);
  UniformStream rng(seed);
  RandomizeTower(p.input_, rng);
  if (!config.share_towers) RandomizeTower(p.response_, rng);
  return p;
}

template <typename Real>
TowerParams<Real>& ModelParams<Real>::tower(Tower t) {
  return t == Tower::kResponse && !config_.share_towers ? response_ : input_;
}

template <typename Real>
const TowerParams<Real>& ModelParams<Real>::tower(Tower t) const {
  return t == Tower::kResponse && !config_.share_towers ? response_ : input_;
}

template <typename Real>
std::vector<typename ModelParams<Real>::NamedTensor>
ModelParams<Real>::Tensors() {
  std::vector<NamedTensor> out;
  AppendTower(config_.share_towers ? "shared." : "input.", input_, out);
  if (!config_.share_towers) AppendTower("response.", response_, out);
  return out;
}

template <typename Real>
std::vector<typename ModelParams<Real>::ConstNamedTensor>
ModelParams<Real>::Tensors() const {
  auto mutable_list = const_cast<ModelParams*>(this)->Tensors();
  std::vector<ConstNamedTensor> out;
  out.reserve(mutable_list.size());
  for (auto& [name, m] : mutable_list) out.emplace_back(name, m);
  return out;
}

template <typename Real>
size_t ModelParams<Real>::NumScalars() const {
  size_t n = 0;
  for (const auto& [name, m] : Tensors()) n += m->size();
  return n;
}

template <typename Real>
bool ModelParams<Real>::AllFinite() const {
  for (const auto& [name, m] : Tensors()) {
    if (!m->allFinite()) return false;
  }
  return true;
}

template <typename Real>
void ModelParams<Real>::SetZero() {
  for (auto& [name, m] : Tensors()) m->setZero();
}

template <typename Real>
void ModelParams<Real>::AddScaled(const ModelParams& other, Real scale) {
  if (!(other.config_ == config_)) {
    throw std::invalid_argument("AddScaled: config mismatch");
  }
  auto dst = Tensors();
  auto src = other.Tensors();
  for (size_t i = 0; i < dst.size(); ++i) *dst[i].second += scale * *src[i].second;
}

template <typename Real>
double ModelParams<Real>::SquaredNorm() const {
  double total = 0;
  for (const auto& [name, m] : Tensors()) {
    total += m->template cast<double>().squaredNorm();
  }
  return total;
}

namespace {

template <typename Real>
std::string HashPayload(const EncoderConfig& config,
                        const std::vector<std::pair<std::string,
                                                    const Matrix<Real>*>>& ts) {
  std::string payload = config.ToJson().dump() + "\n" +
                        std::string(DtypeName<Real>()) + "\n";
  for (const auto& [name, m] : ts) {
    payload += name + "\t" + std::to_string(m->rows()) + "x" +
               std::to_string(m->cols()) + "\n";
    payload.append(reinterpret_cast<const char*>(m->data()),
                   sizeof(Real) * m->size());
  }
  return payload;
}

}  // namespace

template <typename Real>
std::string ModelParams<Real>::Hash() const {
  return Sha256Hex(HashPayload<Real>(config_, Tensors()));
}

template <typename Real>
std::string ModelParams<Real>::Serialize() const {
  nlohmann::json shapes = nlohmann::json::array();
  std::string data;
  for (const auto& [name, m] : Tensors()) {
    shapes.push_back({name, m->rows(), m->cols()});
    data.append(reinterpret_cast<const char*>(m->data()),
                sizeof(Real) * m->size());
  }
  nlohmann::json header = {{"config", config_.ToJson()},
                           {"dtype", DtypeName<Real>()},
                           {"hash", Hash()},
                           {"tensors", shapes}};
  return std::string(kCheckpointMagic) + "\n" + header.dump() + "\n" + data;
}

template <typename Real>
ModelParams<Real> ModelParams<Real>::Deserialize(std::string_view bytes) {
  size_t first = bytes.find('\n');
  if (first == std::string_view::npos ||
      bytes.substr(0, first) != kCheckpointMagic) {
    throw std::invalid_argument("not a versebias checkpoint");
  }
  size_t second = bytes.find('\n', first + 1);
  if (second == std::string_view::npos) {
    throw std::invalid_argument("checkpoint header is truncated");
  }
  nlohmann::json header =
      nlohmann::json::parse(bytes.substr(first + 1, second - first - 1));
  if (header.at("dtype").get<std::string>() != DtypeName<Real>()) {
    throw std::invalid_argument("checkpoint dtype is " +
                                header.at("dtype").get<std::string>() +
                                ", expected " + std::string(DtypeName<Real>()));
  }
  ModelParams p = Zeros(EncoderConfig::FromJson(header.at("config")));
  auto tensors = p.Tensors();
  const auto& shapes = header.at("tensors");
  if (shapes.size() != tensors.size()) {
    throw std::invalid_argument("checkpoint tensor count mismatch");
  }
  size_t offset = second + 1;
  for (size_t i = 0; i < tensors.size(); ++i) {
    auto& [name, m] = tensors[i];
    if (shapes[i][0].get<std::string>() != name ||
        shapes[i][1].get<Eigen::Index>() != m->rows() ||
        shapes[i][2].get<Eigen::Index>() != m->cols()) {
      throw std::invalid_argument("checkpoint tensor " + name +
                                  " does not match its config");
    }
    size_t n = sizeof(Real) * m->size();
    if (offset + n > bytes.size()) {
      throw std::invalid_argument("checkpoint data is truncated");
    }
    std::memcpy(m->data(), bytes.data() + offset, n);
    offset += n;
  }
  if (offset != bytes.size()) {
    throw std::invalid_argument("checkpoint has trailing bytes");
  }
  if (p.Hash() != header.at("hash").get<std::string>()) {
    throw std::invalid_argument("checkpoint content hash mismatch");
  }
  return p;
}

template <typename Real>
void ModelParams<Real>::Save(const std::filesystem::path& path) const {
  WriteFile(path, Serialize());
}

template <typename Real>
ModelParams<Real> ModelParams<Real>::Load(const std::filesystem::path& path) {
  return Deserialize(ReadFile(path));
}

template <typename Real>
TowerPass<Real>::TowerPass(const ModelParams<Real>& params, Tower tower,
                           std::span<const int> ids, UniformStream* dropout)
    : params_(params), tower_(tower) {
  const EncoderConfig& c = params.config();
  if (ids.empty()) throw std::invalid_argument("cannot encode an empty sequence");
  for (int id : ids) {
    if (id < 0 || id >= c.vocab_size) {
      throw std::out_of_range("token id " + std::to_string(id) +
                              " outside encoder vocabulary");
    }
  }
  if (static_cast<int>(ids.size()) > c.max_len) {
    ids_.assign(ids.begin(), ids.begin() + (c.max_len - 1));
    ids_.push_back(ids.back());
    truncated_ = true;
  } else {
    ids_.assign(ids.begin(), ids.end());
  }
  const TowerParams<Real>& t = params.tower(tower);
  const int n = static_cast<int>(ids_.size());
  const int d = c.model_dim;
  const int heads = c.num_heads;
  const int dh = d / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));
  const double drop = c.attention_dropout;
  dropout_applied_ = dropout != nullptr && drop > 0;

  auto norm = [](const Matrix<Real>& x, const Matrix<Real>& gain,
                 const Matrix<Real>& bias, NormCache& cache) {
    const int rows = static_cast<int>(x.rows());
    const Real cols = static_cast<Real>(x.cols());
    cache.normalized.resize(x.rows(), x.cols());
    cache.inv_std.resize(rows);
    for (int r = 0; r < rows; ++r) {
      Real mean = x.row(r).sum() / cols;
      auto centered = x.row(r).array() - mean;
      Real var = centered.square().sum() / cols;
      Real inv = Real(1) / std::sqrt(var + static_cast<Real>(kNormEpsilon));
      cache.inv_std[r] = inv;
      cache.normalized.row(r) = centered * inv;
    }
    Matrix<Real> y = cache.normalized.array().rowwise() * gain.row(0).array();
    y.rowwise() += bias.row(0);
    return y;
  };

  Matrix<Real> x(n, d);
  for (int i = 0; i < n; ++i) {
    x.row(i) = t.token_embedding.row(ids_[i]) + t.position_embedding.row(i);
  }

  layers_.resize(t.layers.size());
  for (size_t l = 0; l < t.layers.size(); ++l) {
    const LayerParams<Real>& p = t.layers[l];
    LayerCache& lc = layers_[l];
    lc.input = x;
    lc.normed = norm(x, p.attn_norm_gain, p.attn_norm_bias, lc.attn_norm);
    lc.q = lc.normed * p.query;
    lc.q.rowwise() += p.query_bias.row(0);
    lc.k = lc.normed * p.key;
    lc.v = lc.normed * p.value;
    lc.v.rowwise() += p.value_bias.row(0);
    lc.context.resize(n, d);
    lc.probs.resize(heads);
    lc.keep.resize(dropout_applied_ ? heads : 0);
    for (int h = 0; h < heads; ++h) {
      Matrix<Real> scores =
          (lc.q.middleCols(h * dh, dh) * lc.k.middleCols(h * dh, dh).transpose()) *
          scale;
      for (int r = 0; r < n; ++r) {
        Real mx = scores.row(r).maxCoeff();
        scores.row(r) = (scores.row(r).array() - mx).exp();
        scores.row(r) /= scores.row(r).sum();
      }
      lc.probs[h] = scores;
      if (dropout_applied_) {
        Matrix<Real> keep(n, n);
        const Real kept = static_cast<Real>(1.0 / (1.0 - drop));
        for (Eigen::Index i = 0; i < keep.size(); ++i) {
          keep.data()[i] = dropout->Next() < drop ? Real(0) : kept;
        }
        lc.keep[h] = keep;
        lc.context.middleCols(h * dh, dh) =
            (scores.array() * keep.array()).matrix() * lc.v.middleCols(h * dh, dh);
      } else {
        lc.context.middleCols(h * dh, dh) = scores * lc.v.middleCols(h * dh, dh);
      }
    }
    Matrix<Real> attn = lc.context * p.output;
    attn.rowwise() += p.output_bias.row(0);
    lc.mid = x + attn;
    lc.ff_normed = norm(lc.mid, p.ff_norm_gain, p.ff_norm_bias, lc.ff_norm);
    lc.hidden_pre = lc.ff_normed * p.ff_in;
    lc.hidden_pre.rowwise() += p.ff_in_bias.row(0);
    Matrix<Real> ff = lc.hidden_pre.cwiseMax(Real(0)) * p.ff_out;
    ff.rowwise() += p.ff_out_bias.row(0);
    x = lc.mid + ff;
  }
  last_ = x;
  Matrix<Real> z = norm(x, t.final_norm_gain, t.final_norm_bias, final_norm_);
  RowVector<Real> u = z.colwise().mean();
  const size_t num_head = t.head_weights.size();
  head_inputs_.resize(num_head);
  head_pre_.resize(num_head);
  for (size_t l = 0; l < num_head; ++l) {
    head_inputs_[l] = u;
    RowVector<Real> pre = u * t.head_weights[l] + t.head_biases[l].row(0);
    head_pre_[l] = pre;
    if (l + 1 < num_head) {
      u = pre.cwiseMax(Real(0));
    } else {
      u = pre.array() / (Real(1) + pre.array().abs());
    }
  }
  output_ = u;
}

template <typename Real>
void TowerPass<Real>::Backward(const RowVector<Real>& d_output,
                               ModelParams<Real>& grads) const {
  const EncoderConfig& c = params_.config();
  const TowerParams<Real>& t = params_.tower(tower_);
  TowerParams<Real>& g = grads.tower(tower_);
  const int n = static_cast<int>(ids_.size());
  const int d = c.model_dim;
  const int heads = c.num_heads;
  const int dh = d / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));

  auto norm_back = [](const Matrix<Real>& dy, const NormCache& cache,
                      const Matrix<Real>& gain, Matrix<Real>& d_gain,
                      Matrix<Real>& d_bias) {
    d_gain.row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
    d_bias.row(0) += dy.colwise().sum();
    Matrix<Real> dxhat = dy.array().rowwise() * gain.row(0).array();
    Matrix<Real> dx(dy.rows(), dy.cols());
    const Real cols = static_cast<Real>(dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      Real mean_d = dxhat.row(r).sum() / cols;
      Real mean_dx = dxhat.row(r).dot(cache.normalized.row(r)) / cols;
      dx.row(r) = cache.inv_std[r] *
                  (dxhat.row(r).array() - mean_d -
                   cache.normalized.row(r).array() * mean_dx)
                      .matrix();
    }
    return dx;
  };

  // Head layers, last to first.
  RowVector<Real> du = d_output;
  for (size_t l = t.head_weights.size(); l-- > 0;) {
    const RowVector<Real>& pre = head_pre_[l];
    RowVector<Real> dpre(pre.size());
    if (l + 1 == t.head_weights.size()) {
      for (Eigen::Index i = 0; i < pre.size(); ++i) {
        Real s = Real(1) + std::abs(pre[i]);
        dpre[i] = du[i] / (s * s);
      }
    } else {
      for (Eigen::Index i = 0; i < pre.size(); ++i) {
        dpre[i] = pre[i] > 0 ? du[i] : Real(0);
      }
    }
    g.head_weights[l].noalias() += head_inputs_[l].transpose() * dpre;
    g.head_biases[l].row(0) += dpre;
    du = dpre * t.head_weights[l].transpose();
  }

  // Mean pooling and final norm.
  Matrix<Real> dz = du.replicate(n, 1) / static_cast<Real>(n);
  Matrix<Real> dx =
      norm_back(dz, final_norm_, t.final_norm_gain, g.final_norm_gain,
                g.final_norm_bias);

  for (size_t l = t.layers.size(); l-- > 0;) {
    const LayerParams<Real>& p = t.layers[l];
    LayerParams<Real>& gp = g.layers[l];
    const LayerCache& lc = layers_[l];

    // Feed-forward block.
    Matrix<Real> hidden = lc.hidden_pre.cwiseMax(Real(0));
    gp.ff_out.noalias() += hidden.transpose() * dx;
    gp.ff_out_bias.row(0) += dx.colwise().sum();
    Matrix<Real> dhidden = dx * p.ff_out.transpose();
    dhidden = (lc.hidden_pre.array() > Real(0)).select(dhidden, Real(0));
    gp.ff_in.noalias() += lc.ff_normed.transpose() * dhidden;
    gp.ff_in_bias.row(0) += dhidden.colwise().sum();
    Matrix<Real> dnormed = dhidden * p.ff_in.transpose();
    Matrix<Real> dmid = dx + norm_back(dnormed, lc.ff_norm, p.ff_norm_gain,
                                       gp.ff_norm_gain, gp.ff_norm_bias);

    // Attention block.
    gp.output.noalias() += lc.context.transpose() * dmid;
    gp.output_bias.row(0) += dmid.colwise().sum();
    Matrix<Real> dcontext = dmid * p.output.transpose();
    Matrix<Real> dq(n, d), dk(n, d), dv(n, d);
    for (int h = 0; h < heads; ++h) {
      const Matrix<Real>& probs = lc.probs[h];
      auto dctx = dcontext.middleCols(h * dh, dh);
      auto vh = lc.v.middleCols(h * dh, dh);
      Matrix<Real> dprobs = dctx * vh.transpose();
      if (dropout_applied_) {
        Matrix<Real> dropped = probs.array() * lc.keep[h].array();
        dv.middleCols(h * dh, dh) = dropped.transpose() * dctx;
        dprobs = dprobs.array() * lc.keep[h].array();
      } else {
        dv.middleCols(h * dh, dh) = probs.transpose() * dctx;
      }
      Matrix<Real> dscores(n, n);
      for (int r = 0; r < n; ++r) {
        Real inner = dprobs.row(r).dot(probs.row(r));
        dscores.row(r) =
            probs.row(r).array() * (dprobs.row(r).array() - inner);
      }
      dscores *= scale;
      dq.middleCols(h * dh, dh) = dscores * lc.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) =
          dscores.transpose() * lc.q.middleCols(h * dh, dh);
    }
    gp.query.noalias() += lc.normed.transpose() * dq;
    gp.query_bias.row(0) += dq.colwise().sum();
    gp.key.noalias() += lc.normed.transpose() * dk;
    gp.value.noalias() += lc.normed.transpose() * dv;
    gp.value_bias.row(0) += dv.colwise().sum();
    Matrix<Real> dnormed_attn = dq * p.query.transpose() +
                                dk * p.key.transpose() +
                                dv * p.value.transpose();
    dx = dmid + norm_back(dnormed_attn, lc.attn_norm, p.attn_norm_gain,
                          gp.attn_norm_gain, gp.attn_norm_bias);
  }

  for (int i = 0; i < n; ++i) {
    g.token_embedding.row(ids_[i]) += dx.row(i);
    g.position_embedding.row(i) += dx.row(i);
  }
}

template <typename Real>
RowVector<Real> Encode(const ModelParams<Real>& params, Tower tower,
                       std::span<const int> ids, bool* truncated) {
  TowerPass<Real> pass(params, tower, ids);
  if (truncated != nullptr) *truncated = pass.truncated();
  return pass.output();
}

template class ModelParams<float>;
template class ModelParams<double>;
template class TowerPass<float>;
template class TowerPass<double>;
template RowVector<float> Encode(const ModelParams<float>&, Tower,
                                 std::span<const int>, bool*);
template RowVector<double> Encode(const ModelParams<double>&, Tower,
                                  std::span<const int>, bool*);

}  // namespace versebias::retriever
