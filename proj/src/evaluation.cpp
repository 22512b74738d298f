#include "molmask/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace molmask {

std::vector<EvalMasking> build_eval_maskings(const Dataset& ds, std::size_t n_corrupt, std::size_t variants,
                                             std::uint64_t seed) {
  if (n_corrupt == 0) throw ValidationError("n_corrupt must be positive");
  std::vector<EvalMasking> out;
  for (std::size_t m = 0; m < ds.size(); ++m) {
    const auto& mol = ds.molecules[m];
    const std::size_t n = std::min(n_corrupt, mol.size());
    const std::size_t v = variants == 0 ? default_variants(n_corrupt) : variants;
    Rng rng = derived_rng(seed, m);
    auto cms = enumerate_eval_maskings(mol, n, v, rng);
    for (std::size_t k = 0; k < cms.size(); ++k) out.push_back({m, k, std::move(cms[k])});
  }
  return out;
}

bool octet_correct(Element predicted, const Molecule& mol, std::size_t i) {
  return predicted == mol.atom(i) || valence(predicted) == covalent_bond_count(mol, i);
}

Element argmax_element(const ElementDistribution& p) {
  return kElements[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts)
    for (auto x : row) t += x;
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t true_class) const {
  std::uint64_t t = 0;
  for (auto x : counts.at(true_class)) t += x;
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < kNumElements; ++i)
    for (std::size_t j = 0; j < kNumElements; ++j) counts[i][j] += other.counts[i][j];
  return *this;
}

std::size_t configured_threads() {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MOLMASK_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) threads = std::min(threads, static_cast<std::size_t>(v));
  }
  return threads;
}

std::vector<std::vector<ElementDistribution>> predict_all(const Model& model, std::span<const EvalMasking> maskings,
                                                          std::size_t threads) {
  std::vector<std::vector<ElementDistribution>> out(maskings.size());
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, maskings.size()));
  if (threads == 1) {
    for (std::size_t k = 0; k < maskings.size(); ++k) out[k] = model.predict(maskings[k].corrupted);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t k = next++; k < maskings.size(); k = next++) out[k] = model.predict(maskings[k].corrupted);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace {

struct Observation {
  std::size_t truth;
  std::size_t predicted;
  bool octet_ok;
  double log_p;
  int bond_count;
  std::size_t variant;
};

struct Headline {
  double sample_accuracy, octet_accuracy, sample_f1_micro, sample_f1_macro, octet_f1_micro, octet_f1_macro,
      perplexity;
};

struct F1 {
  double micro = 0.0, macro = 0.0;
  std::array<ClassScores, kNumElements> classes{};
};

F1 f1_scores(std::span<const std::size_t> truth, std::span<const std::size_t> predicted) {
  std::array<std::uint64_t, kNumElements> tp{}, fp{}, fn{};
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] == predicted[k]) {
      ++tp[truth[k]];
    } else {
      ++fp[predicted[k]];
      ++fn[truth[k]];
    }
  }
  F1 r;
  std::uint64_t tp_all = 0, fp_all = 0, fn_all = 0;
  std::size_t present = 0;
  double macro_sum = 0.0;
  for (std::size_t c = 0; c < kNumElements; ++c) {
    tp_all += tp[c];
    fp_all += fp[c];
    fn_all += fn[c];
    auto& cs = r.classes[c];
    cs.support = tp[c] + fn[c];
    cs.precision = tp[c] + fp[c] ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]) : 0.0;
    cs.recall = cs.support ? static_cast<double>(tp[c]) / static_cast<double>(cs.support) : 0.0;
    cs.f1 = cs.precision + cs.recall > 0.0 ? 2.0 * cs.precision * cs.recall / (cs.precision + cs.recall) : 0.0;
    if (cs.support > 0) {
      ++present;
      macro_sum += cs.f1;
    }
  }
  const double p = tp_all + fp_all ? static_cast<double>(tp_all) / static_cast<double>(tp_all + fp_all) : 0.0;
  const double rc = tp_all + fn_all ? static_cast<double>(tp_all) / static_cast<double>(tp_all + fn_all) : 0.0;
  r.micro = p + rc > 0.0 ? 2.0 * p * rc / (p + rc) : 0.0;
  r.macro = present ? macro_sum / static_cast<double>(present) : 0.0;
  return r;
}

Headline headline(std::span<const Observation> obs, F1* sample_out = nullptr) {
  std::vector<std::size_t> truth, pred, octet_pred;
  truth.reserve(obs.size());
  std::size_t exact = 0, octet = 0;
  double log_sum = 0.0;
  for (const auto& o : obs) {
    truth.push_back(o.truth);
    pred.push_back(o.predicted);
    octet_pred.push_back(o.octet_ok ? o.truth : o.predicted);
    exact += o.truth == o.predicted;
    octet += o.octet_ok;
    log_sum += o.log_p;
  }
  const double n = static_cast<double>(obs.size());
  const auto sample = f1_scores(truth, pred);
  const auto octet_f1 = f1_scores(truth, octet_pred);
  if (sample_out) *sample_out = sample;
  return {static_cast<double>(exact) / n, static_cast<double>(octet) / n, sample.micro, sample.macro,
          octet_f1.micro, octet_f1.macro, std::exp(-log_sum / n)};
}

double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (!std::isfinite(mean)) return std::numeric_limits<double>::quiet_NaN();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size() - 1));
}

}  // namespace

MetricsReport score_predictions(std::span<const EvalMasking> maskings,
                                std::span<const std::vector<ElementDistribution>> predictions) {
  if (maskings.size() != predictions.size()) throw std::invalid_argument("prediction count mismatch");
  if (maskings.empty()) throw std::invalid_argument("nothing to evaluate");
  MetricsReport r;
  r.maskings = maskings.size();
  std::vector<Observation> obs;
  std::size_t max_variant = 0;
  for (std::size_t k = 0; k < maskings.size(); ++k) {
    const auto& cm = maskings[k].corrupted;
    const auto& preds = predictions[k];
    if (preds.size() != cm.masked.size()) throw std::invalid_argument("model returned wrong number of rows");
    const Molecule original = cm.restore();
    max_variant = std::max(max_variant, maskings[k].variant);
    for (std::size_t a = 0; a < cm.masked.size(); ++a) {
      const std::size_t atom = cm.masked[a];
      const Element truth = cm.original[a];
      const Element guess = argmax_element(preds[a]);
      const double p = preds[a][element_id(truth)];
      const int b = covalent_bond_count(original, atom);
      obs.push_back({element_id(truth), element_id(guess), octet_correct(guess, original, atom),
                     p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(), b, maskings[k].variant});
      r.confusion.counts[element_id(truth)][element_id(guess)] += 1;
      r.confusion_by_bond_count[b].counts[element_id(truth)][element_id(guess)] += 1;
    }
  }
  r.masked_atoms = obs.size();
  F1 sample;
  const auto h = headline(obs, &sample);
  r.sample_accuracy = h.sample_accuracy;
  r.octet_accuracy = h.octet_accuracy;
  r.sample_f1_micro = h.sample_f1_micro;
  r.sample_f1_macro = h.sample_f1_macro;
  r.octet_f1_micro = h.octet_f1_micro;
  r.octet_f1_macro = h.octet_f1_macro;
  r.perplexity = h.perplexity;
  double log_sum = 0.0;
  for (const auto& o : obs) log_sum += o.log_p;
  r.mean_log_likelihood = log_sum / static_cast<double>(obs.size());
  r.sample_classes = sample.classes;

  std::map<std::string, std::vector<double>> per_variant;
  for (std::size_t v = 0; v <= max_variant; ++v) {
    std::vector<Observation> group;
    for (const auto& o : obs)
      if (o.variant == v) group.push_back(o);
    if (group.empty()) continue;
    const auto g = headline(group);
    per_variant["sample_accuracy"].push_back(g.sample_accuracy);
    per_variant["octet_accuracy"].push_back(g.octet_accuracy);
    per_variant["sample_f1_micro"].push_back(g.sample_f1_micro);
    per_variant["sample_f1_macro"].push_back(g.sample_f1_macro);
    per_variant["octet_f1_micro"].push_back(g.octet_f1_micro);
    per_variant["octet_f1_macro"].push_back(g.octet_f1_macro);
    per_variant["perplexity"].push_back(g.perplexity);
  }
  for (const auto& [name, xs] : per_variant) r.stddev[name] = stddev_of(xs);
  return r;
}

MetricsReport evaluate(const Model& model, std::span<const EvalMasking> maskings, std::size_t threads) {
  const auto preds = predict_all(model, maskings, threads);
  return score_predictions(maskings, preds);
}

std::vector<SweepRow> sweep_masks(const Model& model, const Dataset& test, std::span<const std::size_t> n_corrupt_list,
                                  std::uint64_t seed, std::size_t variants) {
  std::vector<SweepRow> rows;
  for (std::size_t n : n_corrupt_list) {
    const auto maskings = build_eval_maskings(test, n, variants, seed);
    rows.push_back({n, evaluate(model, maskings)});
  }
  return rows;
}

// --- writers ---------------------------------------------------------------

namespace {

nlohmann::json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string fmt_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

nlohmann::json matrix_json(const ConfusionMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : m.counts) rows.push_back(row);
  return rows;
}

constexpr std::array<const char*, 7> kHeadlineNames = {"octet_accuracy", "sample_accuracy", "octet_f1_micro",
                                                       "octet_f1_macro",  "sample_f1_micro", "sample_f1_macro",
                                                       "perplexity"};

double headline_value(const MetricsReport& r, std::string_view name) {
  if (name == "octet_accuracy") return r.octet_accuracy * 100.0;
  if (name == "sample_accuracy") return r.sample_accuracy * 100.0;
  if (name == "octet_f1_micro") return r.octet_f1_micro * 100.0;
  if (name == "octet_f1_macro") return r.octet_f1_macro * 100.0;
  if (name == "sample_f1_micro") return r.sample_f1_micro * 100.0;
  if (name == "sample_f1_macro") return r.sample_f1_macro * 100.0;
  return r.perplexity;
}

double headline_stddev(const MetricsReport& r, const std::string& name) {
  auto it = r.stddev.find(name);
  if (it == r.stddev.end()) return 0.0;
  return name == "perplexity" ? it->second : it->second * 100.0;
}

}  // namespace

nlohmann::json report_json(const MetricsReport& r) {
  nlohmann::json j;
  j["masked_atoms"] = r.masked_atoms;
  j["maskings"] = r.maskings;
  nlohmann::json metrics, sd;
  for (const char* name : kHeadlineNames) {
    metrics[name] = number_or_string(headline_value(r, name));
    sd[name] = number_or_string(headline_stddev(r, name));
  }
  j["metrics"] = metrics;
  j["stddev"] = sd;
  j["mean_log_likelihood"] = number_or_string(r.mean_log_likelihood);
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumElements; ++c) {
    const auto& s = r.sample_classes[c];
    classes[std::string(element_symbol(kElements[c]))] = {
        {"support", s.support}, {"precision", s.precision * 100.0}, {"recall", s.recall * 100.0},
        {"f1", s.f1 * 100.0}};
  }
  j["sample_classes"] = classes;
  j["confusion"] = matrix_json(r.confusion);
  nlohmann::json by_b = nlohmann::json::object();
  for (const auto& [b, m] : r.confusion_by_bond_count) by_b[std::to_string(b)] = matrix_json(m);
  j["confusion_by_bond_count"] = by_b;
  nlohmann::json labels = nlohmann::json::array();
  for (Element e : kElements) labels.push_back(element_symbol(e));
  j["labels"] = labels;
  return j;
}

std::string report_csv(const MetricsReport& r, const std::string& name) {
  std::ostringstream os;
  os << "metric,name,value,stddev\n";
  for (const char* metric : kHeadlineNames)
    os << metric << ',' << name << ',' << fmt_number(headline_value(r, metric)) << ','
       << fmt_number(headline_stddev(r, metric)) << '\n';
  return os.str();
}

std::string confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream os;
  os << "true\\predicted";
  for (Element e : kElements) os << ',' << element_symbol(e);
  os << '\n';
  for (std::size_t i = 0; i < kNumElements; ++i) {
    os << element_symbol(kElements[i]);
    for (std::size_t j = 0; j < kNumElements; ++j) os << ',' << m.counts[i][j];
    os << '\n';
  }
  return os.str();
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "n_corrupt,masked_atoms";
  for (const char* metric : kHeadlineNames) os << ',' << metric;
  os << '\n';
  for (const auto& row : rows) {
    os << (row.n_corrupt == kAllAtoms ? std::string("all") : std::to_string(row.n_corrupt)) << ','
       << row.report.masked_atoms;
    for (const char* metric : kHeadlineNames) os << ',' << fmt_number(headline_value(row.report, metric));
    os << '\n';
  }
  return os.str();
}

}  // namespace molmask
