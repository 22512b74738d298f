#include <fstream>
#include <sstream>

#include "molmask/checkpoint.hpp"
#include "molmask/models.hpp"

namespace molmask {

namespace {

nlohmann::json vocabulary_json() {
  nlohmann::json v = nlohmann::json::array();
  for (std::size_t id = 0; id < kVocabSize; ++id) v.push_back(element_symbol(element_from_id(id)));
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::unique_ptr<NeuralModel> make_neural_model(ModelKind kind, const nlohmann::json& config) {
  switch (kind) {
    case ModelKind::BagOfAtoms:
      return std::make_unique<BagOfVectorsModel>(BagOfVectorsModel::Mode::Atoms, BagConfig::from_json(config));
    case ModelKind::BagOfNeighbors:
      return std::make_unique<BagOfVectorsModel>(BagOfVectorsModel::Mode::Neighbors,
                                                 BagConfig::from_json(config));
    case ModelKind::BinaryTransformer:
      return std::make_unique<TransformerModel>(TransformerModel::EdgeMode::Binary,
                                                TransformerConfig::from_json(config));
    case ModelKind::BondTransformer:
      return std::make_unique<TransformerModel>(TransformerModel::EdgeMode::Bond,
                                                TransformerConfig::from_json(config));
    default:
      throw ModelError("'" + std::string(model_kind_name(kind)) + "' is not a neural model");
  }
}

nlohmann::json neural_manifest(const NeuralModel& model) {
  return {{"kind", model_kind_name(model.kind())},
          {"config", model.config_json()},
          {"vocabulary", vocabulary_json()},
          {"format", "molmask-checkpoint-1"}};
}

void save_model(const Model& model, const std::string& path) {
  if (const auto* u = dynamic_cast<const UnigramModel*>(&model)) {
    std::ofstream(path, std::ios::binary) << u->to_json().dump(2) << '\n';
  } else if (const auto* o = dynamic_cast<const OctetRuleUnigramModel*>(&model)) {
    std::ofstream(path, std::ios::binary) << o->to_json().dump(2) << '\n';
  } else if (const auto* n = dynamic_cast<const NeuralModel*>(&model)) {
    ad::write_checkpoint(path, neural_manifest(*n), n->parameters());
  } else {
    throw ModelError("unsupported model type for saving");
  }
}

std::unique_ptr<Model> load_model(const std::string& path) {
  const std::string bytes = slurp(path);
  if (bytes.rfind("MOLMASK1", 0) == 0) {
    const auto ckpt = ad::decode_checkpoint(bytes);
    if (ckpt.manifest.at("vocabulary") != vocabulary_json())
      throw ModelError("checkpoint element vocabulary does not match this build");
    const auto kind = model_kind_from_name(ckpt.manifest.at("kind").get<std::string>());
    if (!kind || !is_neural(*kind)) throw ModelError("checkpoint holds an unknown model kind");
    auto model = make_neural_model(*kind, ckpt.manifest.at("config"));
    ad::load_parameters(ckpt, model->parameters());
    return model;
  }
  const auto j = nlohmann::json::parse(bytes);
  const auto kind = model_kind_from_name(j.at("kind").get<std::string>());
  if (kind == ModelKind::Unigram) return std::make_unique<UnigramModel>(UnigramModel::from_json(j));
  if (kind == ModelKind::OctetUnigram)
    return std::make_unique<OctetRuleUnigramModel>(OctetRuleUnigramModel::from_json(j));
  throw ModelError("model file " + path + " holds an unknown model kind");
}

}  // namespace molmask
