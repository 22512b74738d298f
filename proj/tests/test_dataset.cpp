#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "helpers.hpp"
#include "molmask/dataset.hpp"

using namespace molmask;

namespace {

Dataset numbered(std::size_t n) {
  Dataset ds{"numbered", {}};
  for (std::size_t i = 0; i < n; ++i) {
    auto m = testing_util::methane();
    m.set_id(std::to_string(i));
    ds.molecules.push_back(m);
  }
  return ds;
}

std::vector<std::string> ids(const Dataset& ds) {
  std::vector<std::string> out;
  for (const auto& m : ds.molecules) out.push_back(m.id());
  return out;
}

}  // namespace

TEST_CASE("split sizes") {
  const auto s = split(numbered(100), SplitSpec{.seed = 1});
  CHECK(s.train.size() == 70);
  CHECK(s.validation.size() == 15);
  CHECK(s.test.size() == 15);

  const auto t = split(numbered(10), SplitSpec{.seed = 1});
  CHECK(t.train.size() + t.validation.size() + t.test.size() == 10);
  CHECK(t.validation.size() == 2);  // round(1.5)
  CHECK(t.test.size() == 2);
  CHECK(t.train.size() == 6);
}

TEST_CASE("split is a deterministic partition") {
  const auto ds = numbered(57);
  const auto a = split(ds, SplitSpec{.seed = 9});
  const auto b = split(ds, SplitSpec{.seed = 9});
  CHECK(ids(a.train) == ids(b.train));
  CHECK(ids(a.test) == ids(b.test));
  const auto c = split(ds, SplitSpec{.seed = 10});
  CHECK(ids(a.train) != ids(c.train));

  std::vector<std::string> all;
  for (const auto* part : {&a.train, &a.validation, &a.test})
    for (const auto& id : ids(*part)) all.push_back(id);
  std::sort(all.begin(), all.end());
  auto expected = ids(ds);
  std::sort(expected.begin(), expected.end());
  CHECK(all == expected);
}

TEST_CASE("split rejects bad input") {
  CHECK_THROWS(split(numbered(2), SplitSpec{}));
  CHECK_THROWS(split(Dataset{}, SplitSpec{}));
  CHECK_THROWS(split(numbered(10), SplitSpec{.train = 0.5, .validation = 0.2, .test = 0.2}));
  CHECK_THROWS(split(numbered(10), SplitSpec{.train = 1.0, .validation = 0.0, .test = 0.0}));
}

TEST_CASE("element frequencies") {
  const Dataset h2{"h2", {parse_molg("atoms H H\nbonds 0-1:1")}};
  const auto p = element_frequencies(h2);
  CHECK(p[element_id(Element::H)] == 1.0);

  const Dataset two{"two", {testing_util::methane(), testing_util::water()}};
  const auto q = element_frequencies(two);
  CHECK(q[element_id(Element::H)] == doctest::Approx(6.0 / 8.0).epsilon(1e-15));
  CHECK(q[element_id(Element::C)] == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
  CHECK(q[element_id(Element::O)] == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
  CHECK(element_counts(two)[element_id(Element::H)] == 6);

  const std::string csv = element_frequency_csv(two);
  CHECK(csv.rfind("element,count,probability\n", 0) == 0);
  CHECK(csv.find("H,6,0.75") != std::string::npos);
  CHECK_THROWS(element_frequencies(Dataset{}));
}

TEST_CASE("element frequencies match a brute-force count") {
  const auto ds = testing_util::small_octet_set(300, 4, 12);
  std::map<Element, double> counts;
  double total = 0;
  for (const auto& m : ds.molecules)
    for (Element e : m.atoms()) {
      counts[e] += 1;
      total += 1;
    }
  const auto p = element_frequencies(ds);
  double sum = 0;
  for (std::size_t id = 0; id < kNumElements; ++id) {
    sum += p[id];
    CHECK(p[id] == doctest::Approx(counts[kElements[id]] / total).epsilon(1e-14));
  }
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("octet generator property over 10^4 molecules") {
  GeneratorConfig g;
  g.count = 10000;
  g.seed = 2024;
  const auto ds = generate_synthetic(g);
  REQUIRE(ds.size() == 10000);
  std::size_t failures = 0;
  for (const auto& m : ds.molecules) {
    if (!octet_check(m).all_satisfied) ++failures;
    std::size_t heavy = 0;
    for (Element e : m.atoms()) heavy += e != Element::H;
    if (heavy < g.min_heavy || heavy > g.max_heavy) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("generator determinism") {
  GeneratorConfig g;
  g.count = 100;
  g.seed = 77;
  const auto a = serialize_molg(std::span<const Molecule>(generate_synthetic(g).molecules));
  const auto b = serialize_molg(std::span<const Molecule>(generate_synthetic(g).molecules));
  CHECK(a == b);
  g.seed = 78;
  CHECK(serialize_molg(std::span<const Molecule>(generate_synthetic(g).molecules)) != a);
}

TEST_CASE("extended mode produces non-octet atoms") {
  GeneratorConfig g;
  g.count = 500;
  g.seed = 3;
  g.mode = GeneratorMode::Extended;
  g.motifs = {.sulfur6 = 0.05, .phosphorus5 = 0.05, .nitrogen4 = 0.05, .sulfur4 = 0.05, .oxygen1 = 0.05};
  const auto ds = generate_synthetic(g);
  std::map<std::pair<Element, int>, int> seen;
  for (const auto& m : ds.molecules)
    for (std::size_t i = 0; i < m.size(); ++i) seen[{m.atom(i), covalent_bond_count(m, i)}]++;
  CHECK(seen[{Element::S, 6}] > 0);
  CHECK(seen[{Element::P, 5}] > 0);
  CHECK(seen[{Element::N, 4}] > 0);
  CHECK(seen[{Element::S, 4}] > 0);
  CHECK(seen[{Element::O, 1}] > 0);
  CHECK(octet_only(ds).size() < ds.size());
}

TEST_CASE("extended mode without motifs matches octet mode") {
  GeneratorConfig octet;
  octet.count = 200;
  octet.seed = 12;
  GeneratorConfig ext = octet;
  ext.mode = GeneratorMode::Extended;
  CHECK(serialize_molg(std::span<const Molecule>(generate_synthetic(octet).molecules)) ==
        serialize_molg(std::span<const Molecule>(generate_synthetic(ext).molecules)));
}

TEST_CASE("generator config validation and infeasibility") {
  GeneratorConfig g;
  g.min_heavy = 0;
  CHECK_THROWS(g.validate());
  g = {};
  g.element_weights = {};
  CHECK_THROWS(g.validate());
  g = {};
  g.min_heavy = 3;
  g.max_heavy = 2;
  CHECK_THROWS(g.validate());

  // One O saturates to water.
  GeneratorConfig single_o;
  single_o.count = 3;
  single_o.min_heavy = single_o.max_heavy = 1;
  single_o.element_weights = {};
  single_o.element_weights[element_id(Element::O)] = 1.0;
  CHECK(generate_synthetic(single_o).size() == 3);

  GeneratorConfig impossible;
  impossible.count = 1;
  impossible.min_heavy = impossible.max_heavy = 3;
  impossible.element_weights = {};
  impossible.element_weights[element_id(Element::F)] = 1.0;  // three F atoms cannot be connected
  impossible.max_retries = 5;
  CHECK_THROWS_AS(generate_synthetic(impossible), GenerationError);
}
