// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "molmask/evaluation.hpp"
#include "molmask/models.hpp"
#include "molmask/train.hpp"

using namespace molmask;
using testing_util::gradcheck;
using testing_util::random_tensor;
using testing_util::weighted_sum;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o, double seconds) {
  std::ostringstream t;
  t << std::fixed << std::setprecision(1) << seconds << "s";
  std::cout << "criterion " << std::setw(2) << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << name << ": "
            << o.detail << " [" << t.str() << "]" << std::endl;
  if (!o.pass) ++failures;
}

void run(int id, const std::string& name, const std::function<Outcome()>& fn) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(id, name, o, std::chrono::duration<double>(Clock::now() - t0).count());
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string pct(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * x;
  return os.str();
}

std::string num(double x, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

// Every report produced here is checked against the metric identities.
std::vector<MetricsReport> all_reports;

MetricsReport evaluated(const Model& m, std::span<const EvalMasking> maskings) {
  all_reports.push_back(evaluate(m, maskings));
  return all_reports.back();
}

// --- shared fixtures --------------------------------------------------------

constexpr std::uint64_t kSeed = 7;

Splits octet_splits() {
  GeneratorConfig g;
  g.count = 2000;
  g.seed = kSeed;
  return split(generate_synthetic(g), SplitSpec{.seed = kSeed});
}

GeneratorConfig extended_config() {
  GeneratorConfig g;
  g.count = 2000;
  g.seed = kSeed;
  g.mode = GeneratorMode::Extended;
  g.motifs = {.sulfur6 = 0.01, .phosphorus5 = 0.01, .nitrogen4 = 0.123, .sulfur4 = 0.0375, .oxygen1 = 0.0};
  return g;
}

struct Trained {
  std::unique_ptr<NeuralModel> model;
  double seconds = 0.0;
};

Trained train_default(ModelKind kind, const Splits& s) {
  const auto t0 = Clock::now();
  auto model = make_neural_model(kind, nlohmann::json{{"seed", kSeed}});
  TrainConfig cfg;  // 50 epochs, batch 32, lr 1e-3, n_corrupt 1, eps 0.2
  cfg.seed = kSeed;
  cfg.val_seed = kSeed;
  train(*model, s.train, s.validation, cfg);
  return {std::move(model), seconds_since(t0)};
}

// --- criterion 1 ------------------------------------------------------------

Outcome gradient_correctness() {
  constexpr int kCases = 20;
  constexpr double kTol = 1e-5;
  Rng rng(101);
  auto dim = [&](std::size_t lo, std::size_t hi) { return uniform_int(rng, lo, hi); };
  std::map<std::string, double> worst;
  auto note = [&](const std::string& op, double err) { worst[op] = std::max(worst[op], err); };

  for (int c = 0; c < kCases; ++c) {
    const std::size_t m = dim(1, 5), k = dim(1, 5), n = dim(2, 6);
    using ad::Tensor;
    auto a = random_tensor({m, k}, rng), b = random_tensor({k, n}, rng), row = random_tensor({n}, rng);
    auto sq = random_tensor({m, n}, rng), sq2 = random_tensor({m, n}, rng);
    const auto w_mn = random_tensor({m, n}, rng, false), w_nm = random_tensor({n, m}, rng, false);
    note("matmul", gradcheck([&] { return weighted_sum(ad::matmul(a, b), w_mn); }, {a, b}));
    note("transpose", gradcheck([&] { return weighted_sum(ad::transpose(sq), w_nm); }, {sq}));
    note("add", gradcheck([&] { return weighted_sum(ad::add(sq, row), w_mn); }, {sq, row}));
    note("mul", gradcheck([&] { return weighted_sum(ad::mul(sq, sq2), w_mn); }, {sq, sq2}));
    note("scale", gradcheck([&] { return weighted_sum(ad::scale(sq, 1.7), w_mn); }, {sq}));
    note("reshape", gradcheck([&] { return weighted_sum(ad::reshape(sq, {n, m}), w_nm); }, {sq}));
    auto r = random_tensor({m, n}, rng);
    for (auto& x : r.mutable_values())
      if (std::abs(x) < 1e-2) x = 0.5;
    note("relu", gradcheck([&] { return weighted_sum(ad::relu(r), w_mn); }, {r}));
    note("softmax", gradcheck([&] { return weighted_sum(ad::softmax(sq, c % 2), w_mn); }, {sq}));
    auto ln = random_tensor({m, n + 1}, rng, true, -2, 2);
    const auto w_ln = random_tensor({m, n + 1}, rng, false);
    note("layer_norm", gradcheck([&] { return weighted_sum(ad::layer_norm(ln, 1), w_ln); }, {ln}));
    std::vector<std::size_t> ids(dim(1, 6));
    for (auto& id : ids) id = uniform_int(rng, 0, m - 1);
    const auto w_ids = random_tensor({ids.size(), n}, rng, false);
    note("embedding_lookup", gradcheck([&] { return weighted_sum(ad::embedding_lookup(sq, ids), w_ids); }, {sq}));
    note("select_rows", gradcheck([&] { return weighted_sum(ad::select_rows(sq, ids), w_ids); }, {sq}));
    const auto w_cat = random_tensor({m, 2 * n}, rng, false);
    note("concat", gradcheck(
                       [&] {
                         const std::vector<Tensor> parts{sq, sq2};
                         return weighted_sum(ad::concat(parts, 1), w_cat);
                       },
                       {sq, sq2}));
    const auto w_sum = random_tensor({n}, rng, false);
    note("sum(axis)", gradcheck([&] { return weighted_sum(ad::sum(sq, 0), w_sum); }, {sq}));
    note("sum", gradcheck([&] { return ad::sum(ad::mul(sq, sq2)); }, {sq, sq2}));
    std::vector<int> targets(m);
    for (auto& t : targets) t = static_cast<int>(uniform_int(rng, 0, n)) - 1;
    note("masked_cross_entropy", gradcheck([&] { return ad::masked_cross_entropy(sq, targets); }, {sq}));
    const std::size_t nn = dim(1, 5), classes = dim(1, 4);
    std::vector<std::uint8_t> cls(nn * nn);
    for (auto& x : cls) x = static_cast<std::uint8_t>(uniform_int(rng, 0, classes - 1));
    auto g = random_tensor({nn, classes}, rng), sc = random_tensor({nn, nn}, rng);
    const auto w_g = random_tensor({nn, nn}, rng, false), w_s = random_tensor({nn, classes}, rng, false);
    note("gather_classes", gradcheck([&] { return weighted_sum(ad::gather_classes(g, cls), w_g); }, {g}));
    note("scatter_classes",
         gradcheck([&] { return weighted_sum(ad::scatter_classes(sc, cls, classes), w_s); }, {sc}));
  }

  // Full transformer forward pass on random molecules and random small configs.
  const auto mols = testing_util::small_octet_set(kCases, 103, 5);
  for (int c = 0; c < kCases; ++c) {
    const auto mode = c % 2 ? TransformerModel::EdgeMode::Bond : TransformerModel::EdgeMode::Binary;
    const std::size_t dt = dim(3, 5);
    TransformerModel m(mode, {.layers = dim(1, 2), .heads = dim(1, 3), .d_emb = dim(3, 5), .d_transform = dt,
                              .ffn_multiplier = 2, .seed = static_cast<std::uint64_t>(c)});
    const auto& mol = mols.molecules[static_cast<std::size_t>(c)];
    Rng mask_rng(static_cast<std::uint64_t>(c));
    const auto cm = sample_corruption(mol, {2, 0.5}, mask_rng);
    std::vector<int> targets;
    for (Element e : cm.original) targets.push_back(static_cast<int>(element_id(e)));
    std::vector<ad::Tensor> params;
    for (auto& p : m.parameters()) params.push_back(p.tensor);
    note("transformer", gradcheck([&] { return ad::masked_cross_entropy(m.logits(cm), targets); }, params));
  }

  bool ok = true;
  std::string worst_op;
  double worst_err = 0.0;
  for (const auto& [op, err] : worst) {
    ok = ok && err < kTol;
    if (err >= worst_err) {
      worst_err = err;
      worst_op = op;
    }
  }
  return {ok, std::to_string(worst.size()) + " ops x " + std::to_string(kCases) + " cases, worst rel err " +
                  num(worst_err, 3) + " (" + worst_op + ") < 1e-5"};
}

// --- criterion 2 ------------------------------------------------------------

Outcome permutation_equivariance(const Splits& s) {
  std::vector<std::unique_ptr<Model>> models;
  models.push_back(std::make_unique<UnigramModel>(UnigramModel::fit(s.train)));
  models.push_back(std::make_unique<OctetRuleUnigramModel>(OctetRuleUnigramModel::fit(s.train, 1.0)));
  for (auto kind : {ModelKind::BagOfAtoms, ModelKind::BagOfNeighbors, ModelKind::BinaryTransformer,
                    ModelKind::BondTransformer})
    models.push_back(make_neural_model(kind, nlohmann::json{{"seed", 3}}));

  Rng rng(202);
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto& mol = s.test.molecules[i % s.test.size()];
    const auto cm = sample_corruption(mol, {2, 0.5}, rng);
    const auto perm = testing_util::random_permutation(mol.size(), rng);
    std::vector<std::size_t> moved;
    for (std::size_t a : cm.masked) moved.push_back(perm[a]);
    const auto pcm = mask_atoms(mol.permuted(perm), moved);
    for (const auto& m : models) {
      const auto a = m->predict(cm), b = m->predict(pcm);
      for (std::size_t r = 0; r < cm.masked.size(); ++r) {
        const auto pos = std::find(pcm.masked.begin(), pcm.masked.end(), perm[cm.masked[r]]) - pcm.masked.begin();
        for (std::size_t c = 0; c < kNumElements; ++c)
          worst = std::max(worst, std::abs(a[r][c] - b[static_cast<std::size_t>(pos)][c]));
      }
    }
  }
  return {worst <= 1e-9, "100 molecules x 6 models, max deviation " + num(worst, 3) + " <= 1e-9"};
}

// --- criterion 3 ------------------------------------------------------------

Outcome octet_unigram_exact() {
  const auto t0 = Clock::now();
  const Splits s = octet_splits();
  const auto model = OctetRuleUnigramModel::fit(s.train, 0.0);
  const auto maskings = build_eval_maskings(s.test, 1, 0, kSeed);
  const auto r = evaluated(model, maskings);
  Dataset whole{"all", s.train.molecules};
  whole.molecules.insert(whole.molecules.end(), s.test.molecules.begin(), s.test.molecules.end());
  whole.molecules.insert(whole.molecules.end(), s.validation.molecules.begin(), s.validation.molecules.end());
  const auto r_all = evaluated(model, build_eval_maskings(whole, 1, 0, kSeed));
  const double secs = seconds_since(t0);
  const bool ok = r.octet_accuracy == 1.0 && r_all.octet_accuracy == 1.0 && secs < 10.0;
  return {ok, "octet accuracy test " + pct(r.octet_accuracy) + "%, all 2000 molecules " + pct(r_all.octet_accuracy) +
                  "% (need 100), " + num(secs, 3) + "s < 10s"};
}

// --- criterion 8 ------------------------------------------------------------

Outcome epsilon_greedy() {
  const auto mol = parse_smiles_kekulized("CCN");  // 10 atoms
  if (mol.size() != 10) return {false, "fixture is not 10 atoms"};
  Rng rng(808);
  std::vector<double> counts(11, 0.0);
  const int draws = 100000;
  for (int d = 0; d < draws; ++d) counts[sample_corruption(mol, {1, 0.2}, rng).masked.size()] += 1;
  double worst_z = 0.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const double p = k == 1 ? 0.82 : 0.02;
    const double sigma = std::sqrt(draws * p * (1 - p));
    worst_z = std::max(worst_z, std::abs(counts[k] - draws * p) / sigma);
  }
  return {worst_z <= 3.0, "10^5 draws, max |z| over buckets " + num(worst_z, 3) + " <= 3 (k=1 freq " +
                              num(counts[1] / draws, 4) + ")"};
}

// --- criterion 11 -----------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "molmask_acceptance_determinism";
  fs::remove_all(root);
  const std::string cli = MOLMASK_CLI;
  std::vector<fs::path> runs = {root / "a", root / "b"};
  for (const auto& dir : runs) {
    fs::create_directories(dir);
    std::ofstream(dir / "train.json") << R"({"model_config": {"layers": 2, "heads": 2, "d_emb": 16, "d_transform": 16}})";
    const std::string cd = "cd '" + dir.string() + "' && '" + cli + "' ";
    const std::vector<std::string> cmds = {
        cd + "generate --count 150 --seed 5 --out gen",
        cd + "train --config train.json --data gen/dataset.molg --model bond-transformer --epochs 3 --seed 5 "
             "--out train",
        cd + "eval --data gen/dataset.molg --checkpoint train/model.ckpt --seed 5 --out eval",
    };
    for (const auto& c : cmds)
      if (std::system((c + " > /dev/null 2>&1").c_str()) != 0) return {false, "command failed: " + c};
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(runs[0])) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), runs[0]);
    if (!fs::exists(runs[1] / rel)) return {false, "missing in second run: " + rel.string()};
    if (slurp(entry.path()) != slurp(runs[1] / rel)) return {false, "differs: " + rel.string()};
    ++compared;
  }
  fs::remove_all(root);
  return {compared >= 9, "generate/train/eval rerun, " + std::to_string(compared) + " files byte-identical"};
}

}  // namespace

int main() {
  std::cout << "molmask acceptance suite" << std::endl;
  const auto suite_start = Clock::now();

  run(1, "gradient correctness", gradient_correctness);
  const Splits octet = octet_splits();
  run(2, "permutation equivariance", [&] { return permutation_equivariance(octet); });
  run(3, "octet-rule-unigram exactness", octet_unigram_exact);

  // Criteria 4, 5, 6 and 10 share models trained on the synthetic octet set.
  const auto test_maskings = build_eval_maskings(octet.test, 1, 0, kSeed);
  std::map<ModelKind, MetricsReport> octet_reports;
  std::map<ModelKind, std::unique_ptr<Model>> octet_models;
  std::map<ModelKind, double> train_seconds;
  for (auto kind : {ModelKind::BondTransformer, ModelKind::BinaryTransformer, ModelKind::BagOfNeighbors,
                    ModelKind::BagOfAtoms}) {
    const auto t0 = Clock::now();
    auto t = train_default(kind, octet);
    octet_reports[kind] = evaluated(*t.model, test_maskings);
    train_seconds[kind] = seconds_since(t0);
    std::cout << "  trained " << model_kind_name(kind) << " in " << num(t.seconds, 4) << "s" << std::endl;
    octet_models[kind] = std::move(t.model);
  }
  octet_models[ModelKind::Unigram] = std::make_unique<UnigramModel>(UnigramModel::fit(octet.train));
  octet_reports[ModelKind::Unigram] = evaluated(*octet_models[ModelKind::Unigram], test_maskings);

  run(4, "bond-transformer learning", [&] {
    const auto& r = octet_reports[ModelKind::BondTransformer];
    const double secs = train_seconds[ModelKind::BondTransformer];
    const bool ok = r.octet_accuracy >= 0.99 && r.perplexity <= 1.05 && secs <= 1800;
    return Outcome{ok, "octet accuracy " + pct(r.octet_accuracy) + "% (>= 99), perplexity " + num(r.perplexity, 5) +
                           " (<= 1.05), train+eval " + num(secs, 4) + "s (<= 1800)"};
  });
  run(5, "binary-transformer learning", [&] {
    const auto& r = octet_reports[ModelKind::BinaryTransformer];
    const double secs = train_seconds[ModelKind::BinaryTransformer];
    const bool ok = r.octet_accuracy >= 0.95 && secs <= 1800;
    return Outcome{ok, "octet accuracy " + pct(r.octet_accuracy) + "% (>= 95), train+eval " + num(secs, 4) +
                           "s (<= 1800)"};
  });
  run(6, "model ordering", [&] {
    const double bond = octet_reports[ModelKind::BondTransformer].octet_accuracy;
    const double bin = octet_reports[ModelKind::BinaryTransformer].octet_accuracy;
    const double bon = octet_reports[ModelKind::BagOfNeighbors].octet_accuracy;
    const double boa = octet_reports[ModelKind::BagOfAtoms].octet_accuracy;
    const double uni = octet_reports[ModelKind::Unigram].octet_accuracy;
    const bool ok = bond >= bin && bin > bon && bon > boa && boa > uni;
    return Outcome{ok, "bond " + pct(bond) + " >= binary " + pct(bin) + " > bag-of-neighbors " + pct(bon) +
                           " > bag-of-atoms " + pct(boa) + " > unigram " + pct(uni)};
  });

  run(7, "beyond-octet discrimination", [&] {
    const auto t0 = Clock::now();
    const Dataset ext = generate_synthetic(extended_config());
    std::map<Element, double> four;
    double total4 = 0;
    for (const auto& m : ext.molecules)
      for (std::size_t i = 0; i < m.size(); ++i)
        if (covalent_bond_count(m, i) == 4) {
          four[m.atom(i)] += 1;
          total4 += 1;
        }
    const double fc = four[Element::C] / total4, fn = four[Element::N] / total4, fs_ = four[Element::S] / total4;
    const bool mix_ok = std::abs(fc - 0.80) <= 0.03 && std::abs(fn - 0.15) <= 0.03 && std::abs(fs_ - 0.05) <= 0.03;

    const Splits s = split(ext, SplitSpec{.seed = kSeed});
    auto bond = train_default(ModelKind::BondTransformer, s);
    // Every atom of every test molecule masked once.
    const auto maskings = build_eval_maskings(s.test, 1, 1000, kSeed);
    const auto r = evaluated(*bond.model, maskings);
    const auto& cm4 = r.confusion_by_bond_count.at(4);
    const auto n = element_id(Element::N), sid = element_id(Element::S), c = element_id(Element::C);
    const double n_recall = static_cast<double>(cm4.counts[n][n]) / static_cast<double>(cm4.row_sum(n));
    const double s_recall = static_cast<double>(cm4.counts[sid][sid]) / static_cast<double>(cm4.row_sum(sid));

    auto octet = OctetRuleUnigramModel::fit(s.train);
    const auto tuned = tune_k(octet, s.validation, CorruptionPolicy{}, kSeed);
    const auto ro = evaluated(octet, maskings);
    const auto& oc4 = ro.confusion_by_bond_count.at(4);
    std::uint64_t predicted_c = 0;
    for (std::size_t t = 0; t < kNumElements; ++t) predicted_c += oc4.counts[t][c];
    const bool only_c = predicted_c == oc4.total();

    const double secs = seconds_since(t0);
    const bool ok = mix_ok && n_recall >= 0.5 && s_recall >= 0.5 && only_c && secs <= 2700;
    return Outcome{ok, "4-bond mix C/N/S " + pct(fc) + "/" + pct(fn) + "/" + pct(fs_) +
                           "%; bond-transformer b=4 recall N " + pct(n_recall) + "% (" +
                           std::to_string(cm4.row_sum(n)) + " cases), S " + pct(s_recall) + "% (" +
                           std::to_string(cm4.row_sum(sid)) + " cases) (>= 50); octet-unigram k=" +
                           num(tuned.best_k, 4) + " predicts C for " + std::to_string(predicted_c) + "/" +
                           std::to_string(oc4.total()) + " b=4 atoms; " + num(secs, 4) + "s (<= 2700)"};
  });

  run(8, "epsilon-greedy distribution", epsilon_greedy);

  std::vector<SweepRow> bond_sweep, boa_sweep, uni_sweep;
  run(10, "mask-count robustness", [&] {
    const std::vector<std::size_t> counts{1, 2, 5, 10, 20, kAllAtoms};
    bond_sweep = sweep_masks(*octet_models[ModelKind::BondTransformer], octet.test, counts, kSeed);
    boa_sweep = sweep_masks(*octet_models[ModelKind::BagOfAtoms], octet.test, counts, kSeed);
    uni_sweep = sweep_masks(*octet_models[ModelKind::Unigram], octet.test, counts, kSeed);
    for (const auto* rows : {&bond_sweep, &boa_sweep, &uni_sweep})
      for (const auto& row : *rows) all_reports.push_back(row.report);
    double drop = 0.0;
    for (const auto& row : bond_sweep)
      drop = std::max(drop, bond_sweep.front().report.octet_accuracy - row.report.octet_accuracy);
    const double boa1 = boa_sweep.front().report.octet_accuracy, boa_all = boa_sweep.back().report.octet_accuracy;
    const double uni_all = uni_sweep.back().report.octet_accuracy;
    const bool ok = drop <= 0.02 && boa_all < boa1 && std::abs(boa_all - uni_all) <= 0.05;
    return Outcome{ok, "bond-transformer max drop " + pct(drop) + " points (<= 2); bag-of-atoms " + pct(boa1) +
                           "% at 1 -> " + pct(boa_all) + "% at all vs unigram " + pct(uni_all) +
                           "% (within 5 points)"};
  });

  run(9, "metric identities", [&] {
    const auto oracle_maskings = build_eval_maskings(octet.test, 1, 0, kSeed);
    struct Oracle final : Model {
      ModelKind kind() const override { return ModelKind::Unigram; }
      std::vector<ElementDistribution> predict(const CorruptedMolecule& cm) const override {
        std::vector<ElementDistribution> out(cm.masked.size());
        for (std::size_t a = 0; a < out.size(); ++a) out[a][element_id(cm.original[a])] = 1.0;
        return out;
      }
    };
    const auto r = evaluated(Oracle{}, oracle_maskings);
    bool ok = r.perplexity == 1.0 && r.sample_f1_micro == 1.0 && r.sample_f1_macro == 1.0 &&
              r.octet_f1_micro == 1.0 && r.octet_f1_macro == 1.0;
    double worst_gap = 0.0;
    bool octet_ge = true;
    for (const auto& rep : all_reports) {
      worst_gap = std::max({worst_gap, std::abs(rep.sample_f1_micro - rep.sample_accuracy),
                            std::abs(rep.octet_f1_micro - rep.octet_accuracy)});
      octet_ge = octet_ge && rep.octet_accuracy >= rep.sample_accuracy;
    }
    ok = ok && worst_gap <= 1e-12 && octet_ge;
    return Outcome{ok, "oracle perplexity " + num(r.perplexity) + ", F1 " + pct(r.sample_f1_macro) + "; over " +
                           std::to_string(all_reports.size()) + " reports |micro-F1 - accuracy| <= " +
                           num(worst_gap, 3) + ", octet >= sample: " + (octet_ge ? "yes" : "no")};
  });

  run(11, "determinism", cli_determinism);

  std::cout << "\nsweep (octet accuracy %):\n  n_corrupt  bond-transformer  bag-of-atoms  unigram\n";
  for (std::size_t i = 0; i < bond_sweep.size(); ++i)
    std::cout << "  " << std::setw(9)
              << (bond_sweep[i].n_corrupt == kAllAtoms ? std::string("all") : std::to_string(bond_sweep[i].n_corrupt))
              << "  " << std::setw(16) << pct(bond_sweep[i].report.octet_accuracy) << "  " << std::setw(12)
              << pct(boa_sweep[i].report.octet_accuracy) << "  " << std::setw(7)
              << pct(uni_sweep[i].report.octet_accuracy) << "\n";
  std::cout << "\n" << (failures == 0 ? "ALL CRITERIA PASSED" : std::to_string(failures) + " CRITERIA FAILED")
            << " in " << num(seconds_since(suite_start), 5) << "s" << std::endl;
  return failures == 0 ? 0 : 1;
}
