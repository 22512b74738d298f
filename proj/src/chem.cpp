#include "molmask/chem.hpp"

#include <algorithm>
#include <numeric>

namespace molmask {

namespace {

constexpr std::array<std::string_view, kVocabSize> kSymbols = {
    "H", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I", "MASK"};

constexpr std::array<int, kNumElements> kValence = {1, 4, 3, 2, 1, 3, 2, 1, 1, 1};

bool is_connected(std::size_t n, const std::vector<std::uint8_t>& bonds) {
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (bonds[i * n + j] != 0 && !seen[j]) {
        seen[j] = true;
        ++visited;
        stack.push_back(j);
      }
    }
  }
  return visited == n;
}

}  // namespace

Element element_from_id(std::size_t id) {
  if (id >= kVocabSize) throw std::out_of_range("element id out of range");
  return static_cast<Element>(id);
}

std::string_view element_symbol(Element e) { return kSymbols[element_id(e)]; }

std::optional<Element> element_from_symbol(std::string_view sym) {
  for (std::size_t i = 0; i < kNumElements; ++i) {
    if (kSymbols[i] == sym) return static_cast<Element>(i);
  }
  return std::nullopt;
}

int valence(Element e) {
  if (e == Element::Mask) throw std::invalid_argument("MASK has no valence");
  return kValence[element_id(e)];
}

Molecule::Molecule(std::vector<Element> atoms, std::vector<std::uint8_t> bonds, std::string id)
    : Molecule(std::move(atoms), std::move(bonds), std::move(id), false) {}

Molecule Molecule::with_masks(std::vector<Element> atoms, std::vector<std::uint8_t> bonds,
                              std::string id) {
  return Molecule(std::move(atoms), std::move(bonds), std::move(id), true);
}

Molecule::Molecule(std::vector<Element> atoms, std::vector<std::uint8_t> bonds, std::string id,
                   bool allow_mask)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)), id_(std::move(id)) {
  const std::size_t n = atoms_.size();
  if (n == 0) throw ValidationError("molecule must have at least one atom");
  if (bonds_.size() != n * n) throw ValidationError("bond matrix must be n x n");
  for (Element e : atoms_) {
    if (e == Element::Mask && !allow_mask)
      throw ValidationError("MASK atom in an uncorrupted molecule");
    if (element_id(e) >= kVocabSize) throw ValidationError("invalid element");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (bonds_[i * n + i] != 0) throw ValidationError("self-bond on atom " + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = bonds_[i * n + j];
      if (b != bonds_[j * n + i]) throw ValidationError("bond matrix is not symmetric");
      if (b > 3) throw ValidationError("bond order outside 0..3");
    }
  }
  if (!is_connected(n, bonds_)) throw ValidationError("molecule graph is disconnected");
}

std::vector<std::size_t> Molecule::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  const auto row = bond_row(i);
  for (std::size_t j = 0; j < row.size(); ++j)
    if (row[j] != 0) out.push_back(j);
  return out;
}

bool Molecule::has_mask() const {
  return std::find(atoms_.begin(), atoms_.end(), Element::Mask) != atoms_.end();
}

Molecule Molecule::permuted(std::span<const std::size_t> perm) const {
  const std::size_t n = size();
  if (perm.size() != n) throw std::invalid_argument("permutation size mismatch");
  std::vector<Element> atoms(n);
  std::vector<std::uint8_t> bonds(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    atoms.at(perm[i]) = atoms_[i];
    for (std::size_t j = 0; j < n; ++j) bonds[perm[i] * n + perm[j]] = bonds_[i * n + j];
  }
  return Molecule(std::move(atoms), std::move(bonds), id_, true);
}

int covalent_bond_count(const Molecule& mol, std::size_t i) {
  if (i >= mol.size()) throw std::out_of_range("atom index out of range");
  const auto row = mol.bond_row(i);
  return std::accumulate(row.begin(), row.end(), 0);
}

OctetReport octet_check(const Molecule& mol) {
  if (mol.has_mask()) throw ValidationError("octet_check on a masked molecule");
  OctetReport report;
  report.satisfied.resize(mol.size());
  for (std::size_t i = 0; i < mol.size(); ++i) {
    const bool ok = covalent_bond_count(mol, i) == valence(mol.atom(i));
    report.satisfied[i] = ok;
    report.all_satisfied = report.all_satisfied && ok;
  }
  return report;
}

}  // namespace molmask
