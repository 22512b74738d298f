#pragma once

#include <numeric>
#include <vector>

#include "molmask/chem.hpp"
#include "molmask/dataset.hpp"
#include "molmask/random.hpp"

namespace testing_util {

inline molmask::Molecule methane() { return molmask::parse_molg("atoms C H H H H\nbonds 0-1:1 0-2:1 0-3:1 0-4:1\n"); }
inline molmask::Molecule water() { return molmask::parse_molg("atoms O H H\nbonds 0-1:1 0-2:1\n"); }

inline std::vector<std::size_t> random_permutation(std::size_t n, molmask::Rng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[molmask::uniform_int(rng, 0, i - 1)]);
  return p;
}

inline molmask::Dataset small_octet_set(std::size_t count, std::uint64_t seed, std::size_t max_heavy = 8) {
  molmask::GeneratorConfig g;
  g.count = count;
  g.seed = seed;
  g.max_heavy = max_heavy;
  return molmask::generate_synthetic(g);
}

}  // namespace testing_util
