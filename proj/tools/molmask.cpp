// molmask command-line front end.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "molmask/dataset.hpp"
#include "molmask/evaluation.hpp"
#include "molmask/models.hpp"
#include "molmask/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace molmask;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- configuration ---------------------------------------------------------

json common_defaults() { return {{"seed", 0}, {"out", "out"}}; }

json data_defaults() {
  json j = common_defaults();
  j["data"] = "";
  j["train_fraction"] = 0.70;
  j["validation_fraction"] = 0.15;
  j["test_fraction"] = 0.15;
  return j;
}

json generate_defaults() {
  json j = common_defaults();
  const GeneratorConfig g;
  json weights = json::object();
  for (std::size_t id = 1; id < kNumElements; ++id)
    weights[std::string(element_symbol(kElements[id]))] = g.element_weights[id];
  j.update({{"count", g.count},
            {"mode", "octet"},
            {"min_heavy", g.min_heavy},
            {"max_heavy", g.max_heavy},
            {"ring_probability", g.ring_probability},
            {"max_retries", g.max_retries},
            {"element_weights", weights},
            {"motifs",
             {{"sulfur6", 0.0}, {"phosphorus5", 0.0}, {"nitrogen4", 0.0}, {"sulfur4", 0.0}, {"oxygen1", 0.0}}}});
  return j;
}

json fit_defaults() {
  json j = data_defaults();
  j.update({{"model", "unigram"}, {"k", 0.0}, {"tune_k", false}, {"n_corrupt", 1}, {"epsilon", 0.2}});
  return j;
}

json train_defaults() {
  json j = data_defaults();
  const TrainConfig t;
  j.update({{"model", "bond-transformer"},
            {"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"learning_rate", t.learning_rate},
            {"n_corrupt", t.policy.n_corrupt},
            {"epsilon", t.policy.epsilon},
            {"checkpoint_every", t.checkpoint_every},
            {"val_variants", t.val_variants},
            {"model_config", json::object()}});
  return j;
}

json eval_defaults() {
  json j = data_defaults();
  j.update({{"checkpoint", ""}, {"n_corrupt", 1}, {"variants", 0}, {"split", "test"}});
  return j;
}

json sweep_defaults() {
  json j = data_defaults();
  j.update({{"checkpoint", ""},
            {"n_corrupt_list", json::array({1, 2, 5, 10, 20, "all"})},
            {"variants", 0},
            {"split", "test"}});
  return j;
}

json predict_defaults() {
  json j = common_defaults();
  j["out"] = "";
  j.update({{"checkpoint", ""}, {"smiles", ""}, {"data", ""}, {"molecule", 0}, {"mask", json::array({0})}});
  return j;
}

void merge_checked(json& target, const json& source, const std::string& where) {
  if (!source.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : source.items()) {
    if (!target.contains(key)) throw UsageError("unknown config key '" + key + "' in " + where);
    auto& slot = target[key];
    if (slot.is_object() && key != "model_config") {
      merge_checked(slot, value, where + "." + key);
    } else {
      slot = value;
    }
  }
}

json parse_flag_value(const json& like, const std::string& text, const std::string& key) {
  if (key == "n_corrupt" && text == "all") return "all";
  try {
    if (like.is_boolean()) {
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw UsageError("expected true/false");
    }
    if (like.is_number_unsigned() || like.is_number_integer()) {
      std::size_t pos = 0;
      const long long v = std::stoll(text, &pos);
      if (pos != text.size() || v < 0) throw UsageError("expected a non-negative integer");
      return static_cast<std::uint64_t>(v);
    }
    if (like.is_number_float()) {
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw UsageError("expected a number");
      return v;
    }
    if (like.is_array()) {
      json arr = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item == "all")
          arr.push_back("all");
        else
          arr.push_back(parse_flag_value(json(0), item, key));
      }
      return arr;
    }
    return text;
  } catch (const UsageError& e) {
    throw UsageError("--" + key + ": " + e.what() + " (got '" + text + "')");
  } catch (const std::exception&) {
    throw UsageError("--" + key + ": cannot parse '" + text + "'");
  }
}

struct Command {
  std::string name;
  json defaults;
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> flags;  // json key -> raw text
  std::map<std::string, CLI::Option*> options;

  json resolve() const {
    json cfg = defaults;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot open config file " + config_path);
      json file;
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        throw UsageError("config file " + config_path + " is not valid JSON: " + e.what());
      }
      merge_checked(cfg, file, config_path);
    }
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) cfg[key] = parse_flag_value(defaults.at(key), flags.at(key), key);
    return cfg;
  }
};

std::string kebab(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

void add_flags(Command& cmd, const std::map<std::string, std::string>& help) {
  cmd.app->add_option("--config", cmd.config_path, "JSON config file; flags override its values");
  for (const auto& [key, value] : cmd.defaults.items()) {
    if (value.is_object()) continue;  // nested settings come from the config file
    auto it = help.find(key);
    const std::string text = it == help.end() ? key : it->second;
    cmd.options[key] = cmd.app->add_option("--" + kebab(key), cmd.flags[key], text);
  }
}

// --- helpers ---------------------------------------------------------------

template <class T>
T get(const json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// The echo is itself a valid --config file for the same command.
fs::path prepare_out(const json& cfg) {
  const fs::path out = get<std::string>(cfg, "out");
  fs::create_directories(out);
  write_text(out / "config.json", cfg.dump(2) + "\n");
  return out;
}

Dataset load_data(const json& cfg) {
  const auto path = get<std::string>(cfg, "data");
  if (path.empty()) throw UsageError("--data is required");
  if (!fs::exists(path)) throw std::runtime_error("data file not found: " + path);
  Dataset ds{fs::path(path).filename().string(), read_molg_file(path)};
  if (ds.empty()) throw std::runtime_error("data file " + path + " holds no molecules");
  return ds;
}

Splits load_splits(const json& cfg) {
  SplitSpec spec;
  spec.train = get<double>(cfg, "train_fraction");
  spec.validation = get<double>(cfg, "validation_fraction");
  spec.test = get<double>(cfg, "test_fraction");
  spec.seed = get<std::uint64_t>(cfg, "seed");
  return split(load_data(cfg), spec);
}

const Dataset& pick_split(const Splits& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "validation") return s.validation;
  if (name == "test") return s.test;
  throw UsageError("split must be train, validation or test (got '" + name + "')");
}

std::unique_ptr<Model> load_checkpoint(const json& cfg) {
  const auto path = get<std::string>(cfg, "checkpoint");
  if (path.empty()) throw UsageError("--checkpoint is required");
  if (!fs::exists(path)) throw std::runtime_error("model file not found: " + path);
  return load_model(path);
}

std::size_t parse_n_corrupt(const json& v) {
  if (v.is_string() && v.get<std::string>() == "all") return kAllAtoms;
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() > 0)) {
    const auto n = v.get<std::size_t>();
    if (n > 0) return n;
  }
  throw UsageError("n_corrupt values must be positive integers or \"all\"");
}

ModelKind parse_kind(const json& cfg) {
  const auto name = get<std::string>(cfg, "model");
  const auto kind = model_kind_from_name(name);
  if (!kind) throw UsageError("unknown model '" + name + "'");
  return *kind;
}

// --- commands --------------------------------------------------------------

int cmd_generate(json cfg) {
  GeneratorConfig g;
  g.count = get<std::size_t>(cfg, "count");
  g.min_heavy = get<std::size_t>(cfg, "min_heavy");
  g.max_heavy = get<std::size_t>(cfg, "max_heavy");
  g.ring_probability = get<double>(cfg, "ring_probability");
  g.max_retries = get<std::size_t>(cfg, "max_retries");
  g.seed = get<std::uint64_t>(cfg, "seed");
  const auto mode = get<std::string>(cfg, "mode");
  if (mode == "octet")
    g.mode = GeneratorMode::Octet;
  else if (mode == "extended")
    g.mode = GeneratorMode::Extended;
  else
    throw UsageError("mode must be octet or extended (got '" + mode + "')");

  g.element_weights = {};
  for (const auto& [symbol, w] : cfg.at("element_weights").items()) {
    const auto e = element_from_symbol(symbol);
    if (!e || *e == Element::Mask || *e == Element::H) throw UsageError("bad element weight key '" + symbol + "'");
    g.element_weights[element_id(*e)] = w.get<double>();
  }
  const auto& m = cfg.at("motifs");
  g.motifs = {m.at("sulfur6").get<double>(), m.at("phosphorus5").get<double>(), m.at("nitrogen4").get<double>(),
              m.at("sulfur4").get<double>(), m.at("oxygen1").get<double>()};
  if (g.mode == GeneratorMode::Extended && g.motifs.total() == 0.0) {
    g.motifs = {.sulfur6 = 0.05, .phosphorus5 = 0.03, .nitrogen4 = 0.05, .sulfur4 = 0.02, .oxygen1 = 0.0};
    cfg["motifs"] = {{"sulfur6", g.motifs.sulfur6},     {"phosphorus5", g.motifs.phosphorus5},
                     {"nitrogen4", g.motifs.nitrogen4}, {"sulfur4", g.motifs.sulfur4},
                     {"oxygen1", g.motifs.oxygen1}};
  }
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }

  const fs::path out = prepare_out(cfg);
  const Dataset ds = generate_synthetic(g);
  write_molg_file((out / "dataset.molg").string(), ds.molecules);
  write_text(out / "element_frequencies.csv", element_frequency_csv(ds));
  std::cout << "wrote " << ds.size() << " molecules to " << (out / "dataset.molg").string() << "\n";
  return 0;
}

int cmd_fit(const json& cfg) {
  const ModelKind kind = parse_kind(cfg);
  if (is_neural(kind)) throw UsageError("'" + std::string(model_kind_name(kind)) + "' is trained with `train`");
  const Splits s = load_splits(cfg);
  if (s.train.empty()) throw std::runtime_error("training split is empty");
  const fs::path out = prepare_out(cfg);
  if (kind == ModelKind::Unigram) {
    save_model(UnigramModel::fit(s.train), (out / "model.json").string());
  } else {
    auto model = OctetRuleUnigramModel::fit(s.train, get<double>(cfg, "k"));
    if (get<bool>(cfg, "tune_k")) {
      if (s.validation.empty()) throw std::runtime_error("validation split is empty");
      const CorruptionPolicy policy{get<std::size_t>(cfg, "n_corrupt"), get<double>(cfg, "epsilon")};
      const auto r = tune_k(model, s.validation, policy, get<std::uint64_t>(cfg, "seed"));
      std::ostringstream os;
      os.precision(12);
      os << "k,val_cross_entropy\n";
      for (const auto& [k, ce] : r.grid) os << k << ',' << ce << '\n';
      write_text(out / "k_grid.csv", os.str());
      std::cout << "tuned k = " << r.best_k << " (validation cross-entropy " << r.best_cross_entropy << ")\n";
    }
    save_model(model, (out / "model.json").string());
  }
  std::cout << "wrote " << (out / "model.json").string() << "\n";
  return 0;
}

json model_config_for(ModelKind kind, const json& cfg) {
  json mc = cfg.at("model_config");
  if (!mc.is_object()) throw UsageError("model_config must be an object");
  json allowed = kind == ModelKind::BagOfAtoms || kind == ModelKind::BagOfNeighbors ? BagConfig{}.to_json()
                                                                                     : TransformerConfig{}.to_json();
  for (const auto& [key, value] : mc.items())
    if (!allowed.contains(key) || key == "seed")
      throw UsageError("unknown model_config key '" + key + "' for " + std::string(model_kind_name(kind)));
  mc["seed"] = get<std::uint64_t>(cfg, "seed");
  return mc;
}

int cmd_train(const json& cfg) {
  const ModelKind kind = parse_kind(cfg);
  if (!is_neural(kind))
    throw UsageError("'" + std::string(model_kind_name(kind)) + "' is a count model; use `fit`");
  TrainConfig tc;
  tc.epochs = get<std::size_t>(cfg, "epochs");
  tc.batch_size = get<std::size_t>(cfg, "batch_size");
  tc.learning_rate = get<double>(cfg, "learning_rate");
  tc.policy = {get<std::size_t>(cfg, "n_corrupt"), get<double>(cfg, "epsilon")};
  tc.seed = get<std::uint64_t>(cfg, "seed");
  tc.val_seed = tc.seed;
  tc.checkpoint_every = get<std::size_t>(cfg, "checkpoint_every");
  tc.val_variants = get<std::size_t>(cfg, "val_variants");
  try {
    tc.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  auto model = make_neural_model(kind, model_config_for(kind, cfg));

  const Splits s = load_splits(cfg);
  const fs::path out = prepare_out(cfg);
  TrainCallbacks cb;
  cb.on_epoch = [](const EpochRecord& r) {
    std::cerr << "epoch " << r.epoch << " loss " << r.train_loss << " val_perplexity " << r.val_perplexity << "\n";
  };
  cb.on_checkpoint = [&](const NeuralModel& m, std::size_t epoch) {
    fs::create_directories(out / "checkpoints");
    save_model(m, (out / "checkpoints" / ("epoch-" + std::to_string(epoch) + ".ckpt")).string());
  };
  const auto result = train(*model, s.train, s.validation, tc, cb);
  save_model(*model, (out / "model.ckpt").string());
  write_text(out / "history.csv", history_csv(result.history));
  std::cout << "best epoch " << result.best_epoch << ", validation perplexity " << result.best_val_perplexity
            << "\nwrote " << (out / "model.ckpt").string() << "\n";
  return 0;
}

int cmd_eval(const json& cfg) {
  const auto model = load_checkpoint(cfg);
  const Splits s = load_splits(cfg);
  const Dataset& ds = pick_split(s, get<std::string>(cfg, "split"));
  if (ds.empty()) throw std::runtime_error("evaluation split is empty");
  const fs::path out = prepare_out(cfg);
  const auto maskings = build_eval_maskings(ds, parse_n_corrupt(cfg.at("n_corrupt")),
                                            get<std::size_t>(cfg, "variants"), get<std::uint64_t>(cfg, "seed"));
  const auto report = evaluate(*model, maskings);
  json j = report_json(report);
  j["model"] = model_kind_name(model->kind());
  write_text(out / "report.json", j.dump(2) + "\n");
  write_text(out / "report.csv", report_csv(report, std::string(model_kind_name(model->kind()))));
  std::cout << report_csv(report, std::string(model_kind_name(model->kind())));
  return 0;
}

int cmd_sweep(const json& cfg) {
  const auto model = load_checkpoint(cfg);
  const Splits s = load_splits(cfg);
  const Dataset& ds = pick_split(s, get<std::string>(cfg, "split"));
  if (ds.empty()) throw std::runtime_error("evaluation split is empty");
  std::vector<std::size_t> counts;
  for (const auto& v : cfg.at("n_corrupt_list")) counts.push_back(parse_n_corrupt(v));
  if (counts.empty()) throw UsageError("n_corrupt_list is empty");
  const fs::path out = prepare_out(cfg);
  const auto rows = sweep_masks(*model, ds, counts, get<std::uint64_t>(cfg, "seed"), get<std::size_t>(cfg, "variants"));
  write_text(out / "sweep.csv", sweep_csv(rows));
  std::cout << sweep_csv(rows);
  return 0;
}

int cmd_confusion(const json& cfg) {
  const auto model = load_checkpoint(cfg);
  const Splits s = load_splits(cfg);
  const Dataset& ds = pick_split(s, get<std::string>(cfg, "split"));
  if (ds.empty()) throw std::runtime_error("evaluation split is empty");
  const fs::path out = prepare_out(cfg);
  const auto maskings = build_eval_maskings(ds, parse_n_corrupt(cfg.at("n_corrupt")),
                                            get<std::size_t>(cfg, "variants"), get<std::uint64_t>(cfg, "seed"));
  const auto report = evaluate(*model, maskings);
  write_text(out / "confusion.csv", confusion_csv(report.confusion));
  for (const auto& [b, m] : report.confusion_by_bond_count)
    write_text(out / ("confusion_b" + std::to_string(b) + ".csv"), confusion_csv(m));
  std::cout << confusion_csv(report.confusion);
  return 0;
}

int cmd_predict(const json& cfg) {
  const auto model = load_checkpoint(cfg);
  const auto smiles = get<std::string>(cfg, "smiles");
  Molecule mol = [&] {
    if (!smiles.empty()) return parse_smiles_kekulized(smiles);
    const auto ds = load_data(cfg);
    const auto idx = get<std::size_t>(cfg, "molecule");
    if (idx >= ds.size()) throw UsageError("molecule index out of range");
    return ds.molecules[idx];
  }();
  std::vector<std::size_t> mask;
  for (const auto& v : cfg.at("mask")) mask.push_back(v.get<std::size_t>());
  CorruptedMolecule cm = [&] {
    try {
      return mask_atoms(mol, mask);
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
  }();
  const auto preds = model->predict(cm);

  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  json j = json::array();
  for (std::size_t a = 0; a < cm.masked.size(); ++a) {
    std::vector<std::size_t> order(kNumElements);
    for (std::size_t c = 0; c < kNumElements; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return preds[a][x] > preds[a][y]; });
    const std::size_t atom = cm.masked[a];
    os << "atom " << atom << " (true " << element_symbol(cm.original[a]) << ", " << covalent_bond_count(mol, atom)
       << " bonds)\n";
    json dist = json::array();
    for (std::size_t c : order) {
      os << "  " << std::left << std::setw(3) << element_symbol(kElements[c]) << preds[a][c] << "\n";
      dist.push_back({element_symbol(kElements[c]), preds[a][c]});
    }
    j.push_back({{"atom", atom}, {"true", element_symbol(cm.original[a])}, {"distribution", dist}});
  }
  std::cout << os.str();
  if (!get<std::string>(cfg, "out").empty()) {
    const fs::path out = prepare_out(cfg);
    write_text(out / "predictions.json", j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"molmask: masked atom prediction on molecular graphs"};
  app.require_subcommand(1);

  const std::map<std::string, std::string> help = {
      {"seed", "Global seed (generation, split, initialization, masking)"},
      {"out", "Output directory"},
      {"data", "Dataset in MOLG format"},
      {"model", "unigram|octet-unigram|bag-of-atoms|bag-of-neighbors|binary-transformer|bond-transformer"},
      {"n_corrupt", "Atoms masked per molecule (or 'all' for eval)"},
      {"epsilon", "Probability of a random mask count during training"},
      {"variants", "Evaluation maskings per molecule (0 = 5 for one masked atom, else 1)"},
      {"checkpoint", "Model file produced by fit or train"},
      {"n_corrupt_list", "Comma-separated mask counts, e.g. 1,2,5,all"},
      {"mask", "Comma-separated atom indices to mask"},
      {"smiles", "Kekulized SMILES of the molecule to query"},
      {"molecule", "Index of the molecule in --data to query"},
      {"tune_k", "Grid-search the smoothing constant on the validation split"},
      {"split", "Which split to evaluate: train, validation or test"},
  };

  std::vector<Command> commands = {
      {"generate", generate_defaults()}, {"fit", fit_defaults()},          {"train", train_defaults()},
      {"eval", eval_defaults()},         {"sweep", sweep_defaults()},      {"confusion", eval_defaults()},
      {"predict", predict_defaults()},
  };
  const std::map<std::string, std::string> descriptions = {
      {"generate", "Generate a synthetic dataset"},
      {"fit", "Fit a count model (unigram, octet-unigram)"},
      {"train", "Train a neural model"},
      {"eval", "Evaluate a model on masked atoms"},
      {"sweep", "Evaluate across several mask counts"},
      {"confusion", "Confusion matrices, overall and by covalent bond count"},
      {"predict", "Print predicted distributions for masked atoms of one molecule"},
  };
  for (auto& cmd : commands) {
    cmd.app = app.add_subcommand(cmd.name, descriptions.at(cmd.name));
    add_flags(cmd, help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      const json cfg = cmd.resolve();
      if (cmd.name == "generate") return cmd_generate(cfg);
      if (cmd.name == "fit") return cmd_fit(cfg);
      if (cmd.name == "train") return cmd_train(cfg);
      if (cmd.name == "eval") return cmd_eval(cfg);
      if (cmd.name == "sweep") return cmd_sweep(cfg);
      if (cmd.name == "confusion") return cmd_confusion(cfg);
      if (cmd.name == "predict") return cmd_predict(cfg);
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}
