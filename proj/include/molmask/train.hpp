#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "molmask/corruption.hpp"
#include "molmask/dataset.hpp"
#include "molmask/models.hpp"

namespace molmask {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;       // mean cross-entropy per masked atom
  double val_perplexity = 0.0;   // NaN when there is no validation set
};

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  CorruptionPolicy policy{};
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // epochs; 0 disables on_checkpoint
  std::size_t val_variants = 1;      // maskings per validation molecule
  std::uint64_t val_seed = 0;

  void validate() const;
};

struct TrainCallbacks {
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const NeuralModel&, std::size_t epoch)> on_checkpoint;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_perplexity = 0.0;
};

/// Mini-batch training with masked cross-entropy. On return the model holds
/// the parameters of the epoch with the lowest validation perplexity (the
/// last epoch when `validation` is empty).
TrainResult train(NeuralModel& model, const Dataset& train_set, const Dataset& validation, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks = {});

/// Rejects count models, which are fitted in closed form.
TrainResult train(Model& model, const Dataset& train_set, const Dataset& validation, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks = {});

/// `epoch,train_loss,val_perplexity`
std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace molmask
