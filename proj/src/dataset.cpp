#include "molmask/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "molmask/random.hpp"

namespace molmask {

void SplitSpec::validate() const {
  for (double f : {train, validation, test}) {
    if (!(f > 0.0 && f < 1.0)) throw ValidationError("split fractions must lie in (0,1)");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-12)
    throw ValidationError("split fractions must sum to 1");
}

Splits split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  if (ds.empty()) throw ValidationError("cannot split an empty dataset");
  if (ds.size() < 3) throw ValidationError("need at least 3 molecules to split");

  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_int(rng, 0, i)]);

  const auto n_val = static_cast<std::size_t>(std::llround(spec.validation * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::llround(spec.test * static_cast<double>(n)));
  if (n_val + n_test >= n) throw ValidationError("split leaves no training molecules");

  std::vector<int> assign(n, 0);  // 0 train, 1 validation, 2 test
  for (std::size_t k = 0; k < n_val; ++k) assign[order[k]] = 1;
  for (std::size_t k = n_val; k < n_val + n_test; ++k) assign[order[k]] = 2;

  Splits out;
  out.train.name = ds.name + ":train";
  out.validation.name = ds.name + ":validation";
  out.test.name = ds.name + ":test";
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = assign[i] == 0 ? out.train : assign[i] == 1 ? out.validation : out.test;
    dst.molecules.push_back(ds.molecules[i]);
  }
  return out;
}

ElementCounts element_counts(const Dataset& ds) {
  ElementCounts counts{};
  for (const auto& mol : ds.molecules)
    for (Element e : mol.atoms()) {
      if (e == Element::Mask) throw ValidationError("MASK atom in dataset");
      ++counts[element_id(e)];
    }
  return counts;
}

ElementProbabilities element_frequencies(const Dataset& ds) {
  if (ds.empty()) throw ValidationError("element_frequencies of an empty dataset");
  const auto counts = element_counts(ds);
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  ElementProbabilities p{};
  for (std::size_t a = 0; a < kNumElements; ++a) p[a] = static_cast<double>(counts[a]) / total;
  return p;
}

std::string element_frequency_csv(const Dataset& ds) {
  const auto counts = element_counts(ds);
  const auto probs = element_frequencies(ds);
  std::ostringstream os;
  os.precision(17);
  os << "element,count,probability\n";
  for (std::size_t a = 0; a < kNumElements; ++a)
    os << element_symbol(kElements[a]) << ',' << counts[a] << ',' << probs[a] << '\n';
  return os.str();
}

std::array<double, kNumElements> GeneratorConfig::default_weights() {
  // QM9-like heavy-atom mix: carbon-dominated, little fluorine.
  std::array<double, kNumElements> w{};
  w[element_id(Element::C)] = 0.72;
  w[element_id(Element::N)] = 0.12;
  w[element_id(Element::O)] = 0.156;
  w[element_id(Element::F)] = 0.004;
  return w;
}

void GeneratorConfig::validate() const {
  if (count == 0) throw ValidationError("generator count must be positive");
  if (min_heavy < 1) throw ValidationError("min_heavy must be >= 1");
  if (max_heavy < min_heavy) throw ValidationError("max_heavy must be >= min_heavy");
  double total = 0.0;
  for (std::size_t a = 1; a < kNumElements; ++a) {
    if (!(element_weights[a] >= 0.0) || !std::isfinite(element_weights[a]))
      throw ValidationError("element weights must be finite and nonnegative");
    total += element_weights[a];
  }
  if (total <= 0.0) throw ValidationError("heavy-element weights are all zero");
  for (double p : {motifs.sulfur6, motifs.phosphorus5, motifs.nitrogen4, motifs.sulfur4, motifs.oxygen1})
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("motif probabilities must lie in [0,1]");
  if (motifs.total() > 1.0) throw ValidationError("motif probabilities sum above 1");
  if (!(ring_probability >= 0.0 && ring_probability <= 1.0))
    throw ValidationError("ring_probability must lie in [0,1]");
  if (max_retries == 0) throw ValidationError("max_retries must be positive");
}

namespace {

struct Pendant {
  Element element;
  int order;
};

struct Slot {
  Element element;
  int capacity;  // bond order available to the skeleton and hydrogens
  std::vector<Pendant> pendants;
};

Element pick_element(const GeneratorConfig& cfg, Rng& rng) {
  double total = 0.0;
  for (std::size_t a = 1; a < kNumElements; ++a) total += cfg.element_weights[a];
  double u = uniform_real(rng) * total;
  std::size_t last = 1;
  for (std::size_t a = 1; a < kNumElements; ++a) {
    if (cfg.element_weights[a] <= 0.0) continue;
    last = a;
    if (u < cfg.element_weights[a]) return kElements[a];
    u -= cfg.element_weights[a];
  }
  return kElements[last];
}

Slot pick_slot(const GeneratorConfig& cfg, Rng& rng) {
  const auto& m = cfg.motifs;
  if (cfg.mode == GeneratorMode::Extended && m.total() > 0.0) {
    double u = uniform_real(rng);
    if ((u -= m.sulfur6) < 0.0) return {Element::S, 2, {{Element::O, 2}, {Element::O, 2}}};
    if ((u -= m.phosphorus5) < 0.0) return {Element::P, 3, {{Element::O, 2}}};
    if ((u -= m.nitrogen4) < 0.0) return {Element::N, 1, {{Element::O, 2}, {Element::O, 1}}};
    if ((u -= m.sulfur4) < 0.0) return {Element::S, 2, {{Element::O, 1}, {Element::O, 1}}};
    if ((u -= m.oxygen1) < 0.0) return {Element::O, 1, {}};
  }
  const Element e = pick_element(cfg, rng);
  return {e, valence(e), {}};
}

int pick_order(Rng& rng, int max_order) {
  static constexpr std::array<double, 3> kOrderWeights = {0.75, 0.20, 0.05};
  double total = 0.0;
  for (int o = 1; o <= max_order; ++o) total += kOrderWeights[o - 1];
  double u = uniform_real(rng) * total;
  for (int o = 1; o <= max_order; ++o) {
    if (u < kOrderWeights[o - 1]) return o;
    u -= kOrderWeights[o - 1];
  }
  return max_order;
}

std::optional<Molecule> try_build(const GeneratorConfig& cfg, Rng& rng, const std::string& id) {
  const auto n_heavy = static_cast<std::size_t>(uniform_int(rng, cfg.min_heavy, cfg.max_heavy));
  std::vector<Slot> slots;
  slots.reserve(n_heavy);
  for (std::size_t i = 0; i < n_heavy; ++i) slots.push_back(pick_slot(cfg, rng));

  std::vector<int> rem(n_heavy);
  for (std::size_t i = 0; i < n_heavy; ++i) rem[i] = slots[i].capacity;
  std::vector<std::vector<int>> skel(n_heavy, std::vector<int>(n_heavy, 0));

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i < n_heavy; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < i; ++j)
      if (rem[j] > 0) candidates.push_back(j);
    if (candidates.empty()) return std::nullopt;
    const auto j = candidates[uniform_int(rng, 0, candidates.size() - 1)];
    const int order = pick_order(rng, std::min({rem[j], rem[i], 3}));
    skel[i][j] = skel[j][i] = order;
    rem[i] -= order;
    rem[j] -= order;
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (uniform_real(rng) >= cfg.ring_probability) continue;
    pairs.clear();
    for (std::size_t a = 0; a < n_heavy; ++a)
      for (std::size_t b = a + 1; b < n_heavy; ++b)
        if (skel[a][b] == 0 && rem[a] > 0 && rem[b] > 0) pairs.emplace_back(a, b);
    if (pairs.empty()) continue;
    const auto [a, b] = pairs[uniform_int(rng, 0, pairs.size() - 1)];
    const int order = pick_order(rng, std::min({rem[a], rem[b], 3}));
    skel[a][b] = skel[b][a] = order;
    rem[a] -= order;
    rem[b] -= order;
  }

  std::size_t n = n_heavy;
  for (std::size_t i = 0; i < n_heavy; ++i) n += slots[i].pendants.size() + static_cast<std::size_t>(rem[i]);

  std::vector<Element> atoms;
  atoms.reserve(n);
  std::vector<std::uint8_t> bonds(n * n, 0);
  auto connect = [&](std::size_t a, std::size_t b, int order) {
    bonds[a * n + b] = bonds[b * n + a] = static_cast<std::uint8_t>(order);
  };
  for (std::size_t i = 0; i < n_heavy; ++i) atoms.push_back(slots[i].element);
  for (std::size_t a = 0; a < n_heavy; ++a)
    for (std::size_t b = a + 1; b < n_heavy; ++b)
      if (skel[a][b]) connect(a, b, skel[a][b]);
  for (std::size_t i = 0; i < n_heavy; ++i)
    for (const auto& p : slots[i].pendants) {
      connect(i, atoms.size(), p.order);
      atoms.push_back(p.element);
    }
  for (std::size_t i = 0; i < n_heavy; ++i)
    for (int h = 0; h < rem[i]; ++h) {
      connect(i, atoms.size(), 1);
      atoms.push_back(Element::H);
    }
  return Molecule(std::move(atoms), std::move(bonds), id);
}

}  // namespace

Molecule generate_molecule(const GeneratorConfig& cfg, std::uint64_t index) {
  Rng rng = derived_rng(cfg.seed, index);
  const std::string id = "gen-" + std::to_string(index);
  for (std::size_t attempt = 0; attempt < cfg.max_retries; ++attempt) {
    if (auto mol = try_build(cfg, rng, id)) return std::move(*mol);
  }
  throw GenerationError("could not build molecule " + std::to_string(index) + " after " +
                        std::to_string(cfg.max_retries) + " attempts; constraints look infeasible");
}

Dataset generate_synthetic(const GeneratorConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.name = cfg.mode == GeneratorMode::Octet ? "synthetic-octet" : "synthetic-extended";
  ds.molecules.reserve(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) ds.molecules.push_back(generate_molecule(cfg, i));
  return ds;
}

Dataset octet_only(const Dataset& ds) {
  Dataset out;
  out.name = ds.name;
  for (const auto& mol : ds.molecules)
    if (octet_check(mol).all_satisfied) out.molecules.push_back(mol);
  return out;
}

}  // namespace molmask
