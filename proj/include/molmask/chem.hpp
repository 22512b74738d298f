#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace molmask {

/// Raised for malformed MOLG/SMILES text and other invalid user input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a structural invariant of a molecule or dataset is violated.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Element vocabulary. The numeric value is the stable token id; Mask only
/// ever appears in corrupted molecules.
enum class Element : std::uint8_t { H, C, N, O, F, P, S, Cl, Br, I, Mask };

inline constexpr std::size_t kNumElements = 10;  // chemical elements
inline constexpr std::size_t kVocabSize = 11;    // elements + Mask

inline constexpr std::array<Element, kNumElements> kElements = {
    Element::H, Element::C,  Element::N,  Element::O,  Element::F,
    Element::P, Element::S,  Element::Cl, Element::Br, Element::I};

constexpr std::size_t element_id(Element e) { return static_cast<std::size_t>(e); }

Element element_from_id(std::size_t id);
std::string_view element_symbol(Element e);
std::optional<Element> element_from_symbol(std::string_view sym);

/// Standard covalent valence: H/F/Cl/Br/I=1, O/S=2, N/P=3, C=4.
int valence(Element e);

/// A kekulized molecular graph with explicit hydrogens. Bond orders are stored
/// in a dense symmetric matrix; 0 means no bond.
class Molecule {
 public:
  Molecule() = default;

  /// Validates symmetry, zero diagonal, orders in {0..3}, no Mask atoms and
  /// connectivity.
  Molecule(std::vector<Element> atoms, std::vector<std::uint8_t> bonds,
           std::string id = {});

  /// Same as the validating constructor but Mask atoms are allowed. Used for
  /// corrupted graphs.
  static Molecule with_masks(std::vector<Element> atoms, std::vector<std::uint8_t> bonds,
                             std::string id = {});

  std::size_t size() const { return atoms_.size(); }
  const std::vector<Element>& atoms() const { return atoms_; }
  Element atom(std::size_t i) const { return atoms_.at(i); }
  int bond(std::size_t i, std::size_t j) const { return bonds_[i * size() + j]; }
  std::span<const std::uint8_t> bond_row(std::size_t i) const {
    return {bonds_.data() + i * size(), size()};
  }
  const std::vector<std::uint8_t>& bond_matrix() const { return bonds_; }
  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  std::vector<std::size_t> neighbors(std::size_t i) const;
  bool has_mask() const;

  /// Returns a copy with atoms and bond rows/columns relabelled so that new
  /// index perm[i] holds old atom i.
  Molecule permuted(std::span<const std::size_t> perm) const;

  friend bool operator==(const Molecule&, const Molecule&) = default;

 private:
  Molecule(std::vector<Element> atoms, std::vector<std::uint8_t> bonds, std::string id,
           bool allow_mask);

  std::vector<Element> atoms_;
  std::vector<std::uint8_t> bonds_;
  std::string id_;
};

/// Sum of bond orders incident to atom i.
int covalent_bond_count(const Molecule& mol, std::size_t i);

struct OctetReport {
  std::vector<bool> satisfied;
  bool all_satisfied = true;
};

OctetReport octet_check(const Molecule& mol);

// MOLG text format: `atoms ...`, `bonds i-j:o ...`, optional `id ...`;
// molecules separated by blank lines.
Molecule parse_molg(std::string_view text);
std::vector<Molecule> parse_molg_file_text(std::string_view text);
std::string serialize_molg(const Molecule& mol);
std::string serialize_molg(std::span<const Molecule> mols);

std::vector<Molecule> read_molg_file(const std::string& path);
void write_molg_file(const std::string& path, std::span<const Molecule> mols);

/// Kekulized SMILES subset. Implicit hydrogens are added as explicit vertices.
Molecule parse_smiles_kekulized(std::string_view smiles);

}  // namespace molmask
