#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "molmask/chem.hpp"

namespace molmask {

struct Dataset {
  std::string name;
  std::vector<Molecule> molecules;

  std::size_t size() const { return molecules.size(); }
  bool empty() const { return molecules.empty(); }
};

struct SplitSpec {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Splits {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Seeded random partition by molecule. Validation and test receive
/// round(fraction * N) molecules; train receives the remainder.
Splits split(const Dataset& ds, const SplitSpec& spec);

using ElementCounts = std::array<std::uint64_t, kNumElements>;
using ElementProbabilities = std::array<double, kNumElements>;

ElementCounts element_counts(const Dataset& ds);
ElementProbabilities element_frequencies(const Dataset& ds);

/// CSV with header `element,count,probability`, one row per element.
std::string element_frequency_csv(const Dataset& ds);

enum class GeneratorMode { Octet, Extended };

/// Probabilities, per heavy-atom slot, of placing a non-octet motif instead of
/// a plain atom. Only consulted in extended mode.
struct MotifProbabilities {
  double sulfur6 = 0.0;     // S(=O)(=O)<: total bond order 6
  double phosphorus5 = 0.0; // P(=O)<: total bond order 5
  double nitrogen4 = 0.0;   // N(=O)(O-)-: total bond order 4, nitro-like
  double sulfur4 = 0.0;     // S(O-)(O-)<: total bond order 4
  double oxygen1 = 0.0;     // O-: alkoxide-like, total bond order 1

  double total() const { return sulfur6 + phosphorus5 + nitrogen4 + sulfur4 + oxygen1; }
};

struct GeneratorConfig {
  std::size_t count = 2000;
  std::size_t min_heavy = 3;
  std::size_t max_heavy = 12;
  /// Relative weights over heavy elements, indexed by element id. H is
  /// ignored: hydrogens are added by saturation.
  std::array<double, kNumElements> element_weights = default_weights();
  GeneratorMode mode = GeneratorMode::Octet;
  MotifProbabilities motifs;
  /// Probability of attempting each ring-closing bond (two attempts per molecule).
  double ring_probability = 0.3;
  std::size_t max_retries = 100;
  std::uint64_t seed = 0;

  static std::array<double, kNumElements> default_weights();
  void validate() const;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Molecule generate_molecule(const GeneratorConfig& cfg, std::uint64_t index);
Dataset generate_synthetic(const GeneratorConfig& cfg);

/// Keeps only molecules that pass octet_check.
Dataset octet_only(const Dataset& ds);

}  // namespace molmask
