#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "molmask/corruption.hpp"
#include "molmask/dataset.hpp"
#include "molmask/optim.hpp"

namespace molmask {

/// Probabilities over the 10 chemical elements, indexed by element id.
using ElementDistribution = std::array<double, kNumElements>;

enum class ModelKind {
  Unigram,
  OctetUnigram,
  BagOfAtoms,
  BagOfNeighbors,
  BinaryTransformer,
  BondTransformer,
};

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> model_kind_from_name(std::string_view name);
bool is_neural(ModelKind kind);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Common interface: one distribution per masked atom, in the order of
/// CorruptedMolecule::masked.
class Model {
 public:
  virtual ~Model() = default;
  virtual ModelKind kind() const = 0;
  virtual std::vector<ElementDistribution> predict(const CorruptedMolecule& cm) const = 0;
};

// ---------------------------------------------------------------------------
// Count models

class UnigramModel final : public Model {
 public:
  UnigramModel() = default;
  explicit UnigramModel(const ElementCounts& counts);
  static UnigramModel fit(const Dataset& train);

  ModelKind kind() const override { return ModelKind::Unigram; }
  std::vector<ElementDistribution> predict(const CorruptedMolecule& cm) const override;

  bool fitted() const { return fitted_; }
  const ElementCounts& counts() const { return counts_; }
  const ElementDistribution& distribution() const;

  nlohmann::json to_json() const;
  static UnigramModel from_json(const nlohmann::json& j);

 private:
  ElementCounts counts_{};
  ElementDistribution probs_{};
  bool fitted_ = false;
};

/// Predicts from the covalent bond count b of the masked atom: training
/// counts restricted to elements whose valence equals b (b in 1..4), plus
/// additive smoothing k over all ten elements. b in {5,6} and any other
/// count fall back to the uniform distribution.
class OctetRuleUnigramModel final : public Model {
 public:
  static constexpr int kMaxBondCount = 6;

  OctetRuleUnigramModel() = default;
  OctetRuleUnigramModel(const ElementCounts& counts, double k);
  static OctetRuleUnigramModel fit(const Dataset& train, double k = 0.0);

  ModelKind kind() const override { return ModelKind::OctetUnigram; }
  std::vector<ElementDistribution> predict(const CorruptedMolecule& cm) const override;

  ElementDistribution conditional(int bond_count) const;
  bool fitted() const { return fitted_; }
  double k() const { return k_; }
  void set_k(double k);
  const ElementCounts& counts() const { return counts_; }

  nlohmann::json to_json() const;
  static OctetRuleUnigramModel from_json(const nlohmann::json& j);

 private:
  ElementCounts counts_{};
  double k_ = 0.0;
  bool fitted_ = false;
};

/// `points` values log-spaced over [lo, hi] inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

struct KTuningResult {
  double best_k = 0.0;
  double best_cross_entropy = 0.0;
  std::vector<std::pair<double, double>> grid;  // (k, mean cross-entropy)
};

/// Chooses k minimising mean masked cross-entropy on validation maskings;
/// ties go to the smaller k. The model's k is set to the winner.
KTuningResult tune_k(OctetRuleUnigramModel& model, const Dataset& validation,
                     const CorruptionPolicy& policy, std::uint64_t seed,
                     const std::vector<double>& grid = log_grid(1e-2, 1e5, 50));

// ---------------------------------------------------------------------------
// Neural models

class NeuralModel : public Model {
 public:
  /// Unnormalized scores, shape [masked atoms, 10].
  virtual ad::Tensor logits(const CorruptedMolecule& cm) const = 0;
  std::vector<ElementDistribution> predict(const CorruptedMolecule& cm) const override;

  virtual nlohmann::json config_json() const = 0;

  ad::ParameterList& parameters() { return params_; }
  const ad::ParameterList& parameters() const { return params_; }
  std::size_t parameter_count() const;

 protected:
  ad::Tensor& add_parameter(std::string name, ad::Tensor t);
  const ad::Tensor& param(std::size_t index) const { return params_[index].tensor; }

  ad::ParameterList params_;
};

struct BagConfig {
  std::size_t d_emb = 64;
  std::size_t d_nn = 64;
  std::size_t layers = 4;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static BagConfig from_json(const nlohmann::json& j);
};

/// Sum of token embeddings -> relu feed-forward stack -> linear -> softmax.
/// Atoms mode bags every token of the corrupted molecule (Mask included) and
/// shares one prediction across masked atoms; neighbors mode bags the tokens
/// adjacent to each masked atom.
class BagOfVectorsModel final : public NeuralModel {
 public:
  enum class Mode { Atoms, Neighbors };

  BagOfVectorsModel(Mode mode, BagConfig cfg);

  ModelKind kind() const override {
    return mode_ == Mode::Atoms ? ModelKind::BagOfAtoms : ModelKind::BagOfNeighbors;
  }
  ad::Tensor logits(const CorruptedMolecule& cm) const override;
  nlohmann::json config_json() const override { return cfg_.to_json(); }
  Mode mode() const { return mode_; }

 private:
  Mode mode_;
  BagConfig cfg_;
};

struct TransformerConfig {
  std::size_t layers = 4;
  std::size_t heads = 3;
  std::size_t d_emb = 64;
  std::size_t d_transform = 64;
  std::size_t ffn_multiplier = 4;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static TransformerConfig from_json(const nlohmann::json& j);
};

/// Post-norm transformer over all atom pairs with bond-class embeddings added
/// to keys and values. Binary mode collapses bond orders to {0,1}.
class TransformerModel final : public NeuralModel {
 public:
  enum class EdgeMode { Binary, Bond };

  TransformerModel(EdgeMode mode, TransformerConfig cfg);

  ModelKind kind() const override {
    return mode_ == EdgeMode::Binary ? ModelKind::BinaryTransformer : ModelKind::BondTransformer;
  }
  ad::Tensor logits(const CorruptedMolecule& cm) const override;
  nlohmann::json config_json() const override { return cfg_.to_json(); }
  EdgeMode edge_mode() const { return mode_; }
  std::size_t edge_classes() const { return mode_ == EdgeMode::Binary ? 2 : 4; }

  /// Final-layer atom representations h^L, shape [atoms, d_transform].
  ad::Tensor encode(const Molecule& graph) const;
  /// Attention weights of one head in one layer, shape [atoms, atoms].
  ad::Tensor attention_weights(const Molecule& graph, std::size_t layer, std::size_t head) const;

  /// Looks up a parameter by name (e.g. "layer0.head1.query").
  ad::Tensor& parameter(const std::string& name);

 private:
  struct LayerIndex {
    std::vector<std::size_t> query, key, value;
    std::size_t bond_key, bond_value, w_multi, input_proj;
    std::size_t ln1_gain, ln1_bias, ffn_w1, ffn_b1, ffn_w2, ffn_b2, ln2_gain, ln2_bias;
    bool has_input_proj;
  };

  std::vector<std::uint8_t> edge_matrix(const Molecule& graph) const;
  ad::Tensor run(const Molecule& graph, std::optional<std::pair<std::size_t, std::size_t>> probe,
                 ad::Tensor* probe_out) const;

  EdgeMode mode_;
  TransformerConfig cfg_;
  std::size_t atom_embedding_ = 0, out_w_ = 0, out_b_ = 0;
  std::vector<LayerIndex> layers_;
};

std::unique_ptr<NeuralModel> make_neural_model(ModelKind kind, const nlohmann::json& config);

// ---------------------------------------------------------------------------
// Persistence. Count models are JSON; neural models use the checkpoint archive.

void save_model(const Model& model, const std::string& path);
std::unique_ptr<Model> load_model(const std::string& path);

/// Manifest embedded in neural checkpoints.
nlohmann::json neural_manifest(const NeuralModel& model);

}  // namespace molmask
