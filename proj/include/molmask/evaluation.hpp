#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "molmask/corruption.hpp"
#include "molmask/dataset.hpp"
#include "molmask/models.hpp"

namespace molmask {

/// Sentinel n_corrupt meaning "mask every atom".
inline constexpr std::size_t kAllAtoms = std::numeric_limits<std::size_t>::max();

struct EvalMasking {
  std::size_t molecule = 0;  // index into the evaluated dataset
  std::size_t variant = 0;   // 0..variants-1 within the molecule
  CorruptedMolecule corrupted;
};

/// Evaluation maskings for a whole dataset. n_corrupt is clamped to each
/// molecule's size; variants == 0 selects default_variants(n_corrupt).
/// Molecule m draws from an RNG stream derived from (seed, m).
std::vector<EvalMasking> build_eval_maskings(const Dataset& ds, std::size_t n_corrupt, std::size_t variants,
                                             std::uint64_t seed);

/// True when `predicted` equals the original label or has the valence the
/// atom actually shows in `mol`.
bool octet_correct(Element predicted, const Molecule& mol, std::size_t i);

/// Argmax with ties resolved toward the lower element id.
Element argmax_element(const ElementDistribution& p);

struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumElements>, kNumElements> counts{};  // [true][predicted]

  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t true_class) const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassScores {
  std::uint64_t support = 0;  // true occurrences
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// All rates are fractions in [0,1]; writers scale them by 100.
struct MetricsReport {
  std::size_t masked_atoms = 0;
  std::size_t maskings = 0;
  double sample_accuracy = 0.0;
  double octet_accuracy = 0.0;
  double sample_f1_micro = 0.0;
  double sample_f1_macro = 0.0;
  double octet_f1_micro = 0.0;
  double octet_f1_macro = 0.0;
  double perplexity = 1.0;  // +inf when some true label had probability 0
  double mean_log_likelihood = 0.0;
  /// Standard deviation of each headline metric across masking variants
  /// (zero when only one variant per molecule was evaluated).
  std::map<std::string, double> stddev;
  std::array<ClassScores, kNumElements> sample_classes{};
  ConfusionMatrix confusion;
  std::map<int, ConfusionMatrix> confusion_by_bond_count;
};

/// Number of worker threads from MOLMASK_THREADS (default: hardware concurrency).
std::size_t configured_threads();

/// Predictions for every masking, computed in parallel; order matches input.
std::vector<std::vector<ElementDistribution>> predict_all(const Model& model, std::span<const EvalMasking> maskings,
                                                          std::size_t threads = configured_threads());

MetricsReport evaluate(const Model& model, std::span<const EvalMasking> maskings,
                       std::size_t threads = configured_threads());

/// Metrics from precomputed predictions (exposed for oracle checks).
MetricsReport score_predictions(std::span<const EvalMasking> maskings,
                                std::span<const std::vector<ElementDistribution>> predictions);

struct SweepRow {
  std::size_t n_corrupt = 1;  // kAllAtoms for fully masked
  MetricsReport report;
};

std::vector<SweepRow> sweep_masks(const Model& model, const Dataset& test, std::span<const std::size_t> n_corrupt_list,
                                  std::uint64_t seed, std::size_t variants = 0);

// Writers ------------------------------------------------------------------

nlohmann::json report_json(const MetricsReport& r);
/// Flat `metric,name,value,stddev` rows.
std::string report_csv(const MetricsReport& r, const std::string& name);
/// Square grid with element headers; rows are true classes.
std::string confusion_csv(const ConfusionMatrix& m);
std::string sweep_csv(std::span<const SweepRow> rows);

}  // namespace molmask
