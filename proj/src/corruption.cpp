#include "molmask/corruption.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace molmask {

Molecule CorruptedMolecule::restore() const {
  auto atoms = graph.atoms();
  for (std::size_t k = 0; k < masked.size(); ++k) atoms[masked[k]] = original[k];
  return Molecule(std::move(atoms), graph.bond_matrix(), graph.id());
}

void CorruptionPolicy::validate() const {
  if (n_corrupt == 0) throw ValidationError("n_corrupt must be positive");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in [0,1]");
}

CorruptedMolecule mask_atoms(const Molecule& mol, std::vector<std::size_t> indices) {
  if (indices.empty()) throw ValidationError("mask index set is empty");
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
    throw ValidationError("mask indices must be distinct");
  if (indices.back() >= mol.size()) throw ValidationError("mask index out of range");

  auto atoms = mol.atoms();
  CorruptedMolecule cm;
  cm.original.reserve(indices.size());
  for (std::size_t i : indices) {
    if (atoms[i] == Element::Mask) throw ValidationError("atom is already masked");
    cm.original.push_back(atoms[i]);
    atoms[i] = Element::Mask;
  }
  cm.masked = std::move(indices);
  cm.graph = Molecule::with_masks(std::move(atoms), mol.bond_matrix(), mol.id());
  return cm;
}

double corruption_count_probability(std::size_t k, std::size_t n_atoms, const CorruptionPolicy& policy) {
  if (k < 1 || k > n_atoms) return 0.0;
  const double uniform = policy.epsilon / static_cast<double>(n_atoms);
  return k == policy.n_corrupt ? 1.0 - policy.epsilon + uniform : uniform;
}

namespace {

std::vector<std::size_t> choose_positions(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[uniform_int(rng, i, n - 1)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// C(n, k) saturating at `cap`.
std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  k = std::min(k, n - k);
  long double c = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (c >= static_cast<long double>(cap)) return cap;
  }
  return static_cast<std::size_t>(c + 0.5L);
}

}  // namespace

CorruptedMolecule sample_corruption(const Molecule& mol, const CorruptionPolicy& policy, Rng& rng) {
  policy.validate();
  const std::size_t n = mol.size();
  if (policy.n_corrupt > n) throw ValidationError("n_corrupt exceeds molecule size");
  std::size_t k = policy.n_corrupt;
  if (uniform_real(rng) < policy.epsilon) k = static_cast<std::size_t>(uniform_int(rng, 1, n));
  return mask_atoms(mol, choose_positions(n, k, rng));
}

std::vector<CorruptedMolecule> enumerate_eval_maskings(const Molecule& mol, std::size_t n_corrupt,
                                                       std::size_t variants, Rng& rng) {
  const std::size_t n = mol.size();
  if (n_corrupt == 0) throw ValidationError("n_corrupt must be positive");
  if (n_corrupt > n) throw ValidationError("n_corrupt exceeds molecule size");
  if (variants == 0) throw ValidationError("variants must be positive");

  std::vector<CorruptedMolecule> out;
  if (binomial_capped(n, n_corrupt, variants + 1) <= variants) {
    // Every combination, lexicographic.
    std::vector<std::size_t> comb(n_corrupt);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      out.push_back(mask_atoms(mol, comb));
      std::size_t i = n_corrupt;
      while (i > 0 && comb[i - 1] == n - n_corrupt + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < n_corrupt; ++j) comb[j] = comb[j - 1] + 1;
    }
    return out;
  }
  std::set<std::vector<std::size_t>> seen;
  while (out.size() < variants) {
    auto idx = choose_positions(n, n_corrupt, rng);
    if (seen.insert(idx).second) out.push_back(mask_atoms(mol, std::move(idx)));
  }
  return out;
}

}  // namespace molmask
