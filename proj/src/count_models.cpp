#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "molmask/models.hpp"

namespace molmask {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 6> kKindNames = {{
    {ModelKind::Unigram, "unigram"},
    {ModelKind::OctetUnigram, "octet-unigram"},
    {ModelKind::BagOfAtoms, "bag-of-atoms"},
    {ModelKind::BagOfNeighbors, "bag-of-neighbors"},
    {ModelKind::BinaryTransformer, "binary-transformer"},
    {ModelKind::BondTransformer, "bond-transformer"},
}};

ElementDistribution uniform_distribution() {
  ElementDistribution d;
  d.fill(1.0 / static_cast<double>(kNumElements));
  return d;
}

nlohmann::json counts_json(const ElementCounts& counts) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t a = 0; a < kNumElements; ++a) j[std::string(element_symbol(kElements[a]))] = counts[a];
  return j;
}

ElementCounts counts_from_json(const nlohmann::json& j) {
  ElementCounts counts{};
  for (const auto& [sym, value] : j.items()) {
    auto e = element_from_symbol(sym);
    if (!e) throw ModelError("unknown element '" + sym + "' in model file");
    counts[element_id(*e)] = value.get<std::uint64_t>();
  }
  return counts;
}

void expect_kind(const nlohmann::json& j, ModelKind kind) {
  if (j.at("kind").get<std::string>() != model_kind_name(kind))
    throw ModelError("model file holds '" + j.at("kind").get<std::string>() + "', expected '" +
                     std::string(model_kind_name(kind)) + "'");
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  return std::nullopt;
}

bool is_neural(ModelKind kind) {
  return kind != ModelKind::Unigram && kind != ModelKind::OctetUnigram;
}

// --- Unigram ---------------------------------------------------------------

UnigramModel::UnigramModel(const ElementCounts& counts) : counts_(counts), fitted_(true) {
  const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw ModelError("unigram model needs at least one atom");
  for (std::size_t a = 0; a < kNumElements; ++a)
    probs_[a] = static_cast<double>(counts[a]) / static_cast<double>(total);
}

UnigramModel UnigramModel::fit(const Dataset& train) {
  if (train.empty()) throw ModelError("cannot fit unigram on an empty dataset");
  return UnigramModel(element_counts(train));
}

const ElementDistribution& UnigramModel::distribution() const {
  if (!fitted_) throw ModelError("unigram model is not fitted");
  return probs_;
}

std::vector<ElementDistribution> UnigramModel::predict(const CorruptedMolecule& cm) const {
  return std::vector<ElementDistribution>(cm.masked.size(), distribution());
}

nlohmann::json UnigramModel::to_json() const {
  if (!fitted_) throw ModelError("unigram model is not fitted");
  nlohmann::json probs = nlohmann::json::object();
  for (std::size_t a = 0; a < kNumElements; ++a) probs[std::string(element_symbol(kElements[a]))] = probs_[a];
  return {{"kind", model_kind_name(kind())}, {"counts", counts_json(counts_)}, {"probabilities", probs}};
}

UnigramModel UnigramModel::from_json(const nlohmann::json& j) {
  expect_kind(j, ModelKind::Unigram);
  return UnigramModel(counts_from_json(j.at("counts")));
}

// --- Octet-rule unigram ----------------------------------------------------

OctetRuleUnigramModel::OctetRuleUnigramModel(const ElementCounts& counts, double k)
    : counts_(counts), fitted_(true) {
  set_k(k);
}

OctetRuleUnigramModel OctetRuleUnigramModel::fit(const Dataset& train, double k) {
  if (train.empty()) throw ModelError("cannot fit octet-rule unigram on an empty dataset");
  return OctetRuleUnigramModel(element_counts(train), k);
}

void OctetRuleUnigramModel::set_k(double k) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw ModelError("smoothing k must be finite and >= 0");
  k_ = k;
}

ElementDistribution OctetRuleUnigramModel::conditional(int bond_count) const {
  if (!fitted_) throw ModelError("octet-rule unigram model is not fitted");
  ElementDistribution p{};
  if (bond_count >= 1 && bond_count <= 4) {
    for (std::size_t a = 0; a < kNumElements; ++a) {
      const double in_group = valence(kElements[a]) == bond_count ? static_cast<double>(counts_[a]) : 0.0;
      p[a] = in_group + k_;
    }
  } else if (bond_count == 5 || bond_count == 6) {
    // No octet group exists; every element shares the same base mass.
    p.fill(1.0 + k_);
  } else {
    return uniform_distribution();
  }
  const double z = std::accumulate(p.begin(), p.end(), 0.0);
  if (z <= 0.0) return uniform_distribution();  // empty group and k = 0
  for (double& x : p) x /= z;
  return p;
}

std::vector<ElementDistribution> OctetRuleUnigramModel::predict(const CorruptedMolecule& cm) const {
  std::vector<ElementDistribution> out;
  out.reserve(cm.masked.size());
  for (std::size_t i : cm.masked) out.push_back(conditional(covalent_bond_count(cm.graph, i)));
  return out;
}

nlohmann::json OctetRuleUnigramModel::to_json() const {
  if (!fitted_) throw ModelError("octet-rule unigram model is not fitted");
  return {{"kind", model_kind_name(kind())}, {"counts", counts_json(counts_)}, {"k", k_}};
}

OctetRuleUnigramModel OctetRuleUnigramModel::from_json(const nlohmann::json& j) {
  expect_kind(j, ModelKind::OctetUnigram);
  return OctetRuleUnigramModel(counts_from_json(j.at("counts")), j.at("k").get<double>());
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (points == 0) throw std::invalid_argument("grid needs at least one point");
  if (!(lo > 0.0 && hi >= lo)) throw std::invalid_argument("log grid needs 0 < lo <= hi");
  if (points == 1) return {lo};
  std::vector<double> grid(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  return grid;
}

KTuningResult tune_k(OctetRuleUnigramModel& model, const Dataset& validation,
                     const CorruptionPolicy& policy, std::uint64_t seed, const std::vector<double>& grid) {
  if (validation.empty()) throw ModelError("tune_k needs a non-empty validation set");
  if (grid.empty()) throw ModelError("tune_k needs a non-empty grid");
  policy.validate();

  // Bond counts and labels of every masked atom; the cross-entropy for a
  // given k only depends on these pairs.
  std::vector<std::pair<int, std::size_t>> observations;
  for (std::size_t m = 0; m < validation.size(); ++m) {
    const auto& mol = validation.molecules[m];
    Rng rng = derived_rng(seed, m);
    const std::size_t n = std::min(policy.n_corrupt, mol.size());
    for (const auto& cm : enumerate_eval_maskings(mol, n, default_variants(n), rng))
      for (std::size_t k = 0; k < cm.masked.size(); ++k)
        observations.emplace_back(covalent_bond_count(cm.graph, cm.masked[k]), element_id(cm.original[k]));
  }

  KTuningResult result;
  result.best_cross_entropy = std::numeric_limits<double>::infinity();
  auto sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  for (double k : sorted) {
    model.set_k(k);
    std::array<ElementDistribution, OctetRuleUnigramModel::kMaxBondCount + 2> cache;
    for (int b = 0; b <= OctetRuleUnigramModel::kMaxBondCount + 1; ++b) cache[static_cast<std::size_t>(b)] = model.conditional(b);
    double nll = 0.0;
    for (auto [b, label] : observations) {
      const auto& p = cache[static_cast<std::size_t>(std::min(b, OctetRuleUnigramModel::kMaxBondCount + 1))];
      nll -= std::log(p[label]);
    }
    const double ce = nll / static_cast<double>(observations.size());
    result.grid.emplace_back(k, ce);
    if (ce < result.best_cross_entropy) {
      result.best_cross_entropy = ce;
      result.best_k = k;
    }
  }
  model.set_k(result.best_k);
  return result;
}

}  // namespace molmask
