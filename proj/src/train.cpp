#include "molmask/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "molmask/evaluation.hpp"
#include "molmask/optim.hpp"

namespace molmask {

void TrainConfig::validate() const {
  if (epochs == 0) throw ValidationError("epochs must be positive");
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("learning rate must be finite and non-negative");
  if (val_variants == 0) throw ValidationError("validation variants must be positive");
  policy.validate();
}

TrainResult train(Model& model, const Dataset& train_set, const Dataset& validation, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks) {
  auto* neural = dynamic_cast<NeuralModel*>(&model);
  if (!neural)
    throw ModelError("'" + std::string(model_kind_name(model.kind())) +
                     "' is a count model; fit it instead of training");
  return train(*neural, train_set, validation, cfg, callbacks);
}

TrainResult train(NeuralModel& model, const Dataset& train_set, const Dataset& validation, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks) {
  cfg.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");

  auto& params = model.parameters();
  ad::zero_grads(params);
  ad::Adam adam({.lr = cfg.learning_rate});

  std::vector<EvalMasking> val_maskings;
  if (!validation.empty()) val_maskings = build_eval_maskings(validation, 1, cfg.val_variants, cfg.val_seed);

  TrainResult result;
  result.best_val_perplexity = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best = ad::snapshot(params);
  bool have_best = false;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, epoch));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_int(rng, 0, i - 1)]);

    double loss_sum = 0.0;
    std::size_t masked_total = 0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<ad::Tensor> losses;
      std::size_t batch_masked = 0;
      for (std::size_t p = start; p < stop; ++p) {
        const auto cm = sample_corruption(train_set.molecules[order[p]], cfg.policy, rng);
        std::vector<int> targets;
        for (Element e : cm.original) targets.push_back(static_cast<int>(element_id(e)));
        losses.push_back(ad::masked_cross_entropy(model.logits(cm), targets));
        batch_masked += cm.masked.size();
      }
      ad::Tensor total = losses[0];
      for (std::size_t k = 1; k < losses.size(); ++k) total = ad::add(total, losses[k]);
      ad::Tensor loss = ad::scale(total, 1.0 / static_cast<double>(batch_masked));
      const double value = loss.item();
      if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "non-finite training loss " << value << " at epoch " << epoch << ", batch " << batch;
        throw ad::NumericalError(os.str());
      }
      ad::backward(loss);
      adam.step(params);
      loss_sum += total.item();
      masked_total += batch_masked;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(masked_total);
    rec.val_perplexity = std::numeric_limits<double>::quiet_NaN();
    if (!val_maskings.empty()) {
      rec.val_perplexity = evaluate(model, val_maskings).perplexity;
      if (!have_best || rec.val_perplexity < result.best_val_perplexity) {
        result.best_val_perplexity = rec.val_perplexity;
        result.best_epoch = epoch;
        best = ad::snapshot(params);
        have_best = true;
      }
    }
    result.history.push_back(rec);
    if (callbacks.on_epoch) callbacks.on_epoch(rec);
    if (callbacks.on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
      callbacks.on_checkpoint(model, epoch);
  }

  if (have_best) {
    ad::restore(params, best);
  } else {
    result.best_epoch = cfg.epochs;
    result.best_val_perplexity = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os.precision(12);
  os << "epoch,train_loss,val_perplexity\n";
  for (const auto& r : history) {
    os << r.epoch << ',' << r.train_loss << ',';
    if (std::isnan(r.val_perplexity))
      os << "nan";
    else if (std::isinf(r.val_perplexity))
      os << "inf";
    else
      os << r.val_perplexity;
    os << '\n';
  }
  return os.str();
}

}  // namespace molmask
