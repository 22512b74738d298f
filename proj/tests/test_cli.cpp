#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "molmask/chem.hpp"
#include "molmask/models.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "molmask_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the CLI inside `dir`; stdout and stderr are captured together.
Result cli(const fs::path& dir, const std::string& args) {
  const fs::path log = dir / "cli.log";
  const std::string cmd =
      "cd '" + dir.string() + "' && '" + std::string(MOLMASK_CLI) + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), {}};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// Small shared dataset, generated once.
const fs::path& dataset_dir() {
  static const fs::path dir = [] {
    auto d = scratch("data");
    const auto r = cli(d, "generate --count 120 --seed 3 --max-heavy 6 --out gen");
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

std::string data_arg() { return "--data '" + (dataset_dir() / "gen" / "dataset.molg").string() + "'"; }

}  // namespace

TEST_CASE("usage errors exit with 1, runtime failures with 2") {
  const auto dir = scratch("errors");
  CHECK(cli(dir, "").code == 1);
  CHECK(cli(dir, "frobnicate").code == 1);
  CHECK(cli(dir, "generate --no-such-flag 3").code == 1);
  CHECK(cli(dir, "generate --count notanumber").code == 1);
  CHECK(cli(dir, "generate --mode sideways").code == 1);

  std::ofstream(dir / "bad.json") << R"({"count": 10, "colour": "blue"})";
  const auto unknown = cli(dir, "generate --config bad.json");
  CHECK(unknown.code == 1);
  CHECK(unknown.output.find("colour") != std::string::npos);

  CHECK(cli(dir, "eval --data missing.molg --checkpoint missing.json").code == 2);
  CHECK(cli(dir, "train " + data_arg() + " --model unigram --epochs 1").code == 1);
}

TEST_CASE("generate is deterministic and writes frequencies") {
  const auto a = scratch("gen_a"), b = scratch("gen_b");
  REQUIRE(cli(a, "generate --count 50 --seed 11 --out gen").code == 0);
  REQUIRE(cli(b, "generate --count 50 --seed 11 --out gen").code == 0);
  for (const char* f : {"dataset.molg", "element_frequencies.csv", "config.json"})
    CHECK(slurp(a / "gen" / f) == slurp(b / "gen" / f));
  const auto freq = slurp(a / "gen" / "element_frequencies.csv");
  CHECK(freq.rfind("element,", 0) == 0);

  REQUIRE(cli(b, "generate --count 50 --seed 12 --out other").code == 0);
  CHECK(slurp(a / "gen" / "dataset.molg") != slurp(b / "other" / "dataset.molg"));
}

TEST_CASE("config echo reproduces the run") {
  const auto dir = scratch("echo");
  REQUIRE(cli(dir, "generate --count 30 --seed 4 --out first").code == 0);
  const auto cfg = read_json(dir / "first" / "config.json");
  CHECK(cfg.at("count") == 30);
  CHECK(cfg.at("seed") == 4);
  REQUIRE(cli(dir, "generate --config first/config.json --out second").code == 0);
  CHECK(slurp(dir / "first" / "dataset.molg") == slurp(dir / "second" / "dataset.molg"));
}

TEST_CASE("extended generation produces hypervalent atoms") {
  const auto dir = scratch("extended");
  REQUIRE(cli(dir, "generate --count 200 --seed 2 --mode extended --out gen").code == 0);
  const auto mols = molmask::read_molg_file((dir / "gen" / "dataset.molg").string());
  bool over_octet = false;
  for (const auto& m : mols) over_octet = over_octet || !molmask::octet_check(m).all_satisfied;
  CHECK(over_octet);
}

TEST_CASE("fit unigram writes normalized probabilities") {
  const auto dir = scratch("fit_unigram");
  REQUIRE(cli(dir, "fit " + data_arg() + " --model unigram --out fit").code == 0);
  const auto j = read_json(dir / "fit" / "model.json");
  double total = 0;
  for (const auto& [sym, p] : j.at("probabilities").items()) total += p.get<double>();
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("octet-unigram with k=0 is exact on octet data") {
  const auto dir = scratch("fit_octet");
  REQUIRE(cli(dir, "fit " + data_arg() + " --model octet-unigram --k 0 --out fit").code == 0);
  REQUIRE(cli(dir, "eval " + data_arg() + " --checkpoint fit/model.json --out eval").code == 0);
  const auto report = read_json(dir / "eval" / "report.json");
  CHECK(report.at("metrics").at("octet_accuracy").get<double>() == 100.0);
  CHECK(slurp(dir / "eval" / "report.csv").rfind("metric,name,value,stddev", 0) == 0);

  REQUIRE(cli(dir, "fit " + data_arg() + " --model octet-unigram --tune-k true --out tuned").code == 0);
  const auto grid = slurp(dir / "tuned" / "k_grid.csv");
  CHECK(grid.rfind("k,val_cross_entropy\n", 0) == 0);
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 51);
}

TEST_CASE("train with zero learning rate keeps the initial weights") {
  const auto dir = scratch("train_lr0");
  std::ofstream(dir / "cfg.json") << R"({"model_config": {"layers": 1, "heads": 2, "d_emb": 8, "d_transform": 8}})";
  REQUIRE(cli(dir, "train --config cfg.json " + data_arg() +
                       " --model binary-transformer --epochs 2 --learning-rate 0 --seed 9 --out t")
              .code == 0);
  const auto trained = molmask::load_model((dir / "t" / "model.ckpt").string());
  const auto fresh = molmask::make_neural_model(
      molmask::ModelKind::BinaryTransformer,
      json{{"layers", 1}, {"heads", 2}, {"d_emb", 8}, {"d_transform", 8}, {"seed", 9}});
  const auto& got = dynamic_cast<const molmask::NeuralModel&>(*trained).parameters();
  const auto& want = fresh->parameters();
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(std::ranges::equal(got[i].tensor.values(), want[i].tensor.values()));
  CHECK(slurp(dir / "t" / "history.csv").rfind("epoch,train_loss,val_perplexity\n", 0) == 0);
}

TEST_CASE("same-seed training runs are byte-identical; checkpoints follow the cadence") {
  const auto dir = scratch("train_repeat");
  std::ofstream(dir / "cfg.json") << R"({"model_config": {"d_emb": 8, "d_nn": 8, "layers": 2}})";
  const std::string args =
      "train --config cfg.json " + data_arg() + " --model bag-of-neighbors --epochs 4 --checkpoint-every 2 --seed 1";
  REQUIRE(cli(dir, args + " --out a").code == 0);
  REQUIRE(cli(dir, args + " --out b").code == 0);
  CHECK(slurp(dir / "a" / "model.ckpt") == slurp(dir / "b" / "model.ckpt"));
  CHECK(slurp(dir / "a" / "history.csv") == slurp(dir / "b" / "history.csv"));
  CHECK(fs::exists(dir / "a" / "checkpoints" / "epoch-2.ckpt"));
  CHECK(fs::exists(dir / "a" / "checkpoints" / "epoch-4.ckpt"));
  CHECK_FALSE(fs::exists(dir / "a" / "checkpoints" / "epoch-3.ckpt"));

  REQUIRE(cli(dir, "train --config a/config.json --out c").code == 0);
  CHECK(slurp(dir / "a" / "model.ckpt") == slurp(dir / "c" / "model.ckpt"));
}

TEST_CASE("sweep and confusion outputs") {
  const auto dir = scratch("sweep");
  REQUIRE(cli(dir, "fit " + data_arg() + " --model unigram --out fit").code == 0);
  REQUIRE(cli(dir, "sweep " + data_arg() + " --checkpoint fit/model.json --n-corrupt-list 1,all --out s").code == 0);
  const auto sweep = slurp(dir / "s" / "sweep.csv");
  CHECK(sweep.rfind("n_corrupt,masked_atoms,octet_accuracy", 0) == 0);
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 3);
  CHECK(sweep.find("\nall,") != std::string::npos);

  REQUIRE(cli(dir, "confusion " + data_arg() + " --checkpoint fit/model.json --out c").code == 0);
  CHECK(slurp(dir / "c" / "confusion.csv").rfind("true\\predicted,H,C,N,O,F", 0) == 0);
  CHECK(fs::exists(dir / "c" / "confusion_b1.csv"));
  CHECK(fs::exists(dir / "c" / "confusion_b4.csv"));
}

TEST_CASE("predict prints a sorted distribution") {
  const auto dir = scratch("predict");
  REQUIRE(cli(dir, "fit " + data_arg() + " --model octet-unigram --k 0 --out fit").code == 0);
  const auto r = cli(dir, "predict --checkpoint fit/model.json --smiles C --mask 0 --out p");
  REQUIRE(r.code == 0);
  CHECK(r.output.find("atom 0 (true C, 4 bonds)") != std::string::npos);
  const auto j = read_json(dir / "p" / "predictions.json");
  REQUIRE(j.size() == 1);
  const auto& dist = j[0].at("distribution");
  CHECK(dist[0][0] == "C");
  CHECK(dist[0][1].get<double>() == 1.0);
  for (std::size_t i = 1; i < dist.size(); ++i) CHECK(dist[i - 1][1].get<double>() >= dist[i][1].get<double>());

  CHECK(cli(dir, "predict --checkpoint fit/model.json --smiles C --mask 9").code == 1);
}
