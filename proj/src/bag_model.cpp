#include <cmath>

#include "molmask/models.hpp"

namespace molmask {

using ad::Tensor;

std::vector<ElementDistribution> NeuralModel::predict(const CorruptedMolecule& cm) const {
  ad::NoGradGuard no_grad;
  const Tensor probs = ad::softmax(logits(cm), 1);
  std::vector<ElementDistribution> out(cm.masked.size());
  for (std::size_t r = 0; r < out.size(); ++r)
    for (std::size_t c = 0; c < kNumElements; ++c) out[r][c] = probs[r * kNumElements + c];
  return out;
}

std::size_t NeuralModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

Tensor& NeuralModel::add_parameter(std::string name, Tensor t) {
  params_.push_back({std::move(name), std::move(t)});
  return params_.back().tensor;
}

nlohmann::json BagConfig::to_json() const {
  return {{"d_emb", d_emb}, {"d_nn", d_nn}, {"layers", layers}, {"seed", seed}};
}

BagConfig BagConfig::from_json(const nlohmann::json& j) {
  BagConfig c;
  c.d_emb = j.value("d_emb", c.d_emb);
  c.d_nn = j.value("d_nn", c.d_nn);
  c.layers = j.value("layers", c.layers);
  c.seed = j.value("seed", c.seed);
  return c;
}

// Parameter layout: [embedding, (w_l, b_l) * layers, out_w, out_b].
BagOfVectorsModel::BagOfVectorsModel(Mode mode, BagConfig cfg) : mode_(mode), cfg_(cfg) {
  if (cfg_.d_emb == 0 || cfg_.d_nn == 0 || cfg_.layers == 0)
    throw ModelError("bag model dimensions and layer count must be positive");
  Rng rng(cfg_.seed);
  add_parameter("embedding", ad::uniform_init({kVocabSize, cfg_.d_emb}, kVocabSize, rng));
  std::size_t in = cfg_.d_emb;
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    add_parameter("nn" + std::to_string(l) + ".weight", ad::uniform_init({in, cfg_.d_nn}, in, rng));
    add_parameter("nn" + std::to_string(l) + ".bias", Tensor::zeros({cfg_.d_nn}, true));
    in = cfg_.d_nn;
  }
  add_parameter("output.weight", ad::uniform_init({cfg_.d_nn, kNumElements}, cfg_.d_nn, rng));
  add_parameter("output.bias", Tensor::zeros({kNumElements}, true));
}

Tensor BagOfVectorsModel::logits(const CorruptedMolecule& cm) const {
  const Molecule& g = cm.graph;
  const std::size_t n = g.size();
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = element_id(g.atom(i));
  const Tensor tokens = ad::embedding_lookup(param(0), ids);  // [n, d_emb]

  Tensor bag;
  if (mode_ == Mode::Atoms) {
    bag = ad::reshape(ad::sum(tokens, 0), {1, cfg_.d_emb});
  } else {
    // Binary adjacency rows of the masked atoms; isolated atoms give a zero bag.
    std::vector<double> adj(cm.masked.size() * n, 0.0);
    for (std::size_t r = 0; r < cm.masked.size(); ++r) {
      const auto row = g.bond_row(cm.masked[r]);
      for (std::size_t j = 0; j < n; ++j) adj[r * n + j] = row[j] != 0 ? 1.0 : 0.0;
    }
    bag = ad::matmul(Tensor::from({cm.masked.size(), n}, std::move(adj)), tokens);
  }

  Tensor h = bag;
  for (std::size_t l = 0; l < cfg_.layers; ++l)
    h = ad::relu(ad::add(ad::matmul(h, param(1 + 2 * l)), param(2 + 2 * l)));
  const std::size_t out = 1 + 2 * cfg_.layers;
  Tensor scores = ad::add(ad::matmul(h, param(out)), param(out + 1));

  if (mode_ == Mode::Atoms) {
    const std::vector<std::size_t> rows(cm.masked.size(), 0);
    scores = ad::select_rows(scores, rows);
  }
  return scores;
}

}  // namespace molmask
