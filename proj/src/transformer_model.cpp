#include <cmath>

#include "molmask/models.hpp"

namespace molmask {

using ad::Tensor;

nlohmann::json TransformerConfig::to_json() const {
  return {{"layers", layers},         {"heads", heads}, {"d_emb", d_emb}, {"d_transform", d_transform},
          {"ffn_multiplier", ffn_multiplier}, {"seed", seed}};
}

TransformerConfig TransformerConfig::from_json(const nlohmann::json& j) {
  TransformerConfig c;
  c.layers = j.value("layers", c.layers);
  c.heads = j.value("heads", c.heads);
  c.d_emb = j.value("d_emb", c.d_emb);
  c.d_transform = j.value("d_transform", c.d_transform);
  c.ffn_multiplier = j.value("ffn_multiplier", c.ffn_multiplier);
  c.seed = j.value("seed", c.seed);
  return c;
}

TransformerModel::TransformerModel(EdgeMode mode, TransformerConfig cfg) : mode_(mode), cfg_(cfg) {
  if (cfg_.layers == 0 || cfg_.heads == 0 || cfg_.d_emb == 0 || cfg_.d_transform == 0 ||
      cfg_.ffn_multiplier == 0)
    throw ModelError("transformer sizes must be positive");
  Rng rng(cfg_.seed);
  const std::size_t dt = cfg_.d_transform;
  const std::size_t dff = dt * cfg_.ffn_multiplier;
  const std::size_t classes = edge_classes();

  auto add = [&](std::string name, Tensor t) {
    add_parameter(std::move(name), std::move(t));
    return params_.size() - 1;
  };
  auto ones = [](std::size_t n) { return Tensor::from({n}, std::vector<double>(n, 1.0), true); };

  atom_embedding_ = add("atom_embedding", ad::uniform_init({kVocabSize, cfg_.d_emb}, kVocabSize, rng));
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const std::size_t din = l == 0 ? cfg_.d_emb : dt;
    LayerIndex li{};
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      const std::string hp = p + "head" + std::to_string(h) + ".";
      li.query.push_back(add(hp + "query", ad::uniform_init({din, dt}, din, rng)));
      li.key.push_back(add(hp + "key", ad::uniform_init({din, dt}, din, rng)));
      li.value.push_back(add(hp + "value", ad::uniform_init({din, dt}, din, rng)));
    }
    li.bond_key = add(p + "bond_key", ad::uniform_init({classes, dt}, classes, rng));
    li.bond_value = add(p + "bond_value", ad::uniform_init({classes, dt}, classes, rng));
    li.w_multi = add(p + "w_multi", ad::uniform_init({dt * cfg_.heads, dt}, dt * cfg_.heads, rng));
    li.has_input_proj = din != dt;
    if (li.has_input_proj) li.input_proj = add(p + "input_proj", ad::uniform_init({din, dt}, din, rng));
    li.ln1_gain = add(p + "norm1.gain", ones(dt));
    li.ln1_bias = add(p + "norm1.bias", Tensor::zeros({dt}, true));
    li.ffn_w1 = add(p + "ffn.w1", ad::uniform_init({dt, dff}, dt, rng));
    li.ffn_b1 = add(p + "ffn.b1", Tensor::zeros({dff}, true));
    li.ffn_w2 = add(p + "ffn.w2", ad::uniform_init({dff, dt}, dff, rng));
    li.ffn_b2 = add(p + "ffn.b2", Tensor::zeros({dt}, true));
    li.ln2_gain = add(p + "norm2.gain", ones(dt));
    li.ln2_bias = add(p + "norm2.bias", Tensor::zeros({dt}, true));
    layers_.push_back(std::move(li));
  }
  out_w_ = add("output.weight", ad::uniform_init({dt, kNumElements}, dt, rng));
  out_b_ = add("output.bias", Tensor::zeros({kNumElements}, true));
}

Tensor& TransformerModel::parameter(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p.tensor;
  throw ModelError("no transformer parameter named '" + name + "'");
}

std::vector<std::uint8_t> TransformerModel::edge_matrix(const Molecule& graph) const {
  std::vector<std::uint8_t> e = graph.bond_matrix();
  if (mode_ == EdgeMode::Binary)
    for (auto& x : e) x = x != 0 ? 1 : 0;
  return e;
}

Tensor TransformerModel::run(const Molecule& graph,
                             std::optional<std::pair<std::size_t, std::size_t>> probe,
                             Tensor* probe_out) const {
  const std::size_t n = graph.size();
  const std::size_t classes = edge_classes();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg_.d_transform));
  const auto edges = edge_matrix(graph);

  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = element_id(graph.atom(i));
  Tensor h = ad::embedding_lookup(param(atom_embedding_), ids);

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& li = layers_[l];
    const Tensor& bond_key = param(li.bond_key);
    const Tensor& bond_value = param(li.bond_value);
    std::vector<Tensor> heads;
    heads.reserve(cfg_.heads);
    for (std::size_t hd = 0; hd < cfg_.heads; ++hd) {
      const Tensor q = ad::matmul(h, param(li.query[hd]));
      const Tensor k = ad::matmul(h, param(li.key[hd]));
      const Tensor v = ad::matmul(h, param(li.value[hd]));
      // phi_ij = q_i . (k_j + eK[E_ij]) / sqrt(d)
      const Tensor node_scores = ad::matmul(q, ad::transpose(k));
      const Tensor edge_scores = ad::gather_classes(ad::matmul(q, ad::transpose(bond_key)), edges);
      const Tensor alpha = ad::softmax(ad::scale(ad::add(node_scores, edge_scores), inv_sqrt_d), 1);
      if (probe && probe->first == l && probe->second == hd && probe_out) *probe_out = alpha;
      // sum_j alpha_ij (v_j + eV[E_ij])
      heads.push_back(ad::add(ad::matmul(alpha, v),
                              ad::matmul(ad::scatter_classes(alpha, edges, classes), bond_value)));
    }
    const Tensor attended = ad::matmul(heads.size() == 1 ? heads[0] : ad::concat(heads, 1), param(li.w_multi));
    const Tensor residual = li.has_input_proj ? ad::matmul(h, param(li.input_proj)) : h;
    const Tensor z = ad::add(ad::mul(ad::layer_norm(ad::add(residual, attended), 1), param(li.ln1_gain)),
                             param(li.ln1_bias));
    const Tensor hidden = ad::relu(ad::add(ad::matmul(z, param(li.ffn_w1)), param(li.ffn_b1)));
    const Tensor ffn = ad::add(ad::matmul(hidden, param(li.ffn_w2)), param(li.ffn_b2));
    h = ad::add(ad::mul(ad::layer_norm(ad::add(z, ffn), 1), param(li.ln2_gain)), param(li.ln2_bias));
  }
  return h;
}

Tensor TransformerModel::encode(const Molecule& graph) const { return run(graph, std::nullopt, nullptr); }

Tensor TransformerModel::attention_weights(const Molecule& graph, std::size_t layer, std::size_t head) const {
  if (layer >= layers_.size() || head >= cfg_.heads) throw ModelError("attention probe out of range");
  Tensor alpha;
  run(graph, std::make_pair(layer, head), &alpha);
  return alpha;
}

Tensor TransformerModel::logits(const CorruptedMolecule& cm) const {
  const Tensor h = encode(cm.graph);
  const Tensor picked = ad::select_rows(h, cm.masked);
  return ad::add(ad::matmul(picked, param(out_w_)), param(out_b_));
}

}  // namespace molmask
