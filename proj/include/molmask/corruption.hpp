#pragma once

#include <cstdint>
#include <vector>

#include "molmask/chem.hpp"
#include "molmask/random.hpp"

namespace molmask {

/// A molecule with some atoms replaced by Mask. The bond matrix is untouched.
struct CorruptedMolecule {
  Molecule graph;                       // masked positions hold Element::Mask
  std::vector<std::size_t> masked;      // sorted, distinct
  std::vector<Element> original;        // aligned with `masked`

  /// Restores the original labels.
  Molecule restore() const;
};

struct CorruptionPolicy {
  std::size_t n_corrupt = 1;
  double epsilon = 0.2;

  void validate() const;
};

CorruptedMolecule mask_atoms(const Molecule& mol, std::vector<std::size_t> indices);

/// Probability that sample_corruption masks exactly k atoms.
double corruption_count_probability(std::size_t k, std::size_t n_atoms, const CorruptionPolicy& policy);

/// epsilon-greedy: with probability 1-eps mask n_corrupt atoms, otherwise a
/// uniformly random count in 1..|V|. Positions are uniform without replacement.
CorruptedMolecule sample_corruption(const Molecule& mol, const CorruptionPolicy& policy, Rng& rng);

/// Up to `variants` distinct index sets of size n_corrupt. When fewer
/// combinations exist than requested, all of them are returned in
/// lexicographic order.
std::vector<CorruptedMolecule> enumerate_eval_maskings(const Molecule& mol, std::size_t n_corrupt,
                                                       std::size_t variants, Rng& rng);

/// Default number of evaluation maskings: 5 for single-atom masking, else 1.
inline std::size_t default_variants(std::size_t n_corrupt) { return n_corrupt == 1 ? 5 : 1; }

}  // namespace molmask
