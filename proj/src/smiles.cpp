#include <algorithm>
#include <cctype>
#include <map>

#include "molmask/chem.hpp"

namespace molmask {

namespace {

[[noreturn]] void unsupported(std::string_view s, std::size_t pos, std::string_view what) {
  throw ParseError("unsupported SMILES feature (" + std::string(what) + ") at position " +
                   std::to_string(pos) + " in '" + std::string(s) + "'");
}

struct PendingRing {
  std::size_t atom;
  int order;  // 0 when no explicit bond symbol at the opening digit
};

}  // namespace

Molecule parse_smiles_kekulized(std::string_view s) {
  std::vector<Element> heavy;
  std::map<std::pair<std::size_t, std::size_t>, int> edges;
  std::vector<std::size_t> branch_stack;
  std::map<int, PendingRing> rings;
  std::optional<std::size_t> prev;
  int pending_order = 0;

  auto add_edge = [&](std::size_t a, std::size_t b, int order, std::size_t pos) {
    if (a == b) throw ParseError("ring bond closes on the same atom at position " + std::to_string(pos));
    auto key = std::minmax(a, b);
    if (edges.contains(key))
      throw ParseError("duplicate bond at position " + std::to_string(pos));
    edges[key] = order;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::string sym(1, c);
      if (i + 1 < s.size() && std::islower(static_cast<unsigned char>(s[i + 1]))) {
        const std::string two = sym + s[i + 1];
        if (two == "Cl" || two == "Br") {
          sym = two;
        }
      }
      auto e = element_from_symbol(sym);
      if (!e || *e == Element::H) unsupported(s, i, "atom symbol '" + sym + "'");
      heavy.push_back(*e);
      const std::size_t idx = heavy.size() - 1;
      if (prev) add_edge(*prev, idx, pending_order == 0 ? 1 : pending_order, i);
      else if (pending_order != 0) throw ParseError("bond symbol without a preceding atom");
      prev = idx;
      pending_order = 0;
      i += sym.size();
      continue;
    }
    if (std::islower(static_cast<unsigned char>(c))) unsupported(s, i, "aromatic atom");
    switch (c) {
      case '-':
      case '=':
      case '#': {
        if (pending_order != 0) throw ParseError("consecutive bond symbols at position " + std::to_string(i));
        pending_order = c == '-' ? 1 : c == '=' ? 2 : 3;
        ++i;
        continue;
      }
      case '(': {
        if (!prev) throw ParseError("branch without a preceding atom");
        branch_stack.push_back(*prev);
        ++i;
        continue;
      }
      case ')': {
        if (branch_stack.empty()) throw ParseError("unbalanced ')' at position " + std::to_string(i));
        if (pending_order != 0) throw ParseError("dangling bond symbol before ')'");
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++i;
        continue;
      }
      default:
        break;
    }
    if (c == '%' || std::isdigit(static_cast<unsigned char>(c))) {
      int label = 0;
      std::size_t len = 1;
      if (c == '%') {
        if (i + 2 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i + 1])) ||
            !std::isdigit(static_cast<unsigned char>(s[i + 2])))
          throw ParseError("malformed %nn ring label");
        label = (s[i + 1] - '0') * 10 + (s[i + 2] - '0');
        len = 3;
      } else {
        label = c - '0';
      }
      if (!prev) throw ParseError("ring label without a preceding atom");
      if (auto it = rings.find(label); it != rings.end()) {
        const auto open = it->second;
        if (open.order != 0 && pending_order != 0 && open.order != pending_order)
          throw ParseError("conflicting ring-bond orders for label " + std::to_string(label));
        const int order = open.order != 0 ? open.order : (pending_order != 0 ? pending_order : 1);
        add_edge(open.atom, *prev, order, i);
        rings.erase(it);
      } else {
        rings[label] = PendingRing{*prev, pending_order};
      }
      pending_order = 0;
      i += len;
      continue;
    }
    switch (c) {
      case '[': unsupported(s, i, "bracket atom");
      case '.': unsupported(s, i, "disconnected components");
      case '/':
      case '\\': unsupported(s, i, "stereo bond");
      case '@': unsupported(s, i, "chirality");
      case ':': unsupported(s, i, "aromatic bond");
      case '$': unsupported(s, i, "quadruple bond");
      default: unsupported(s, i, std::string("character '") + c + "'");
    }
  }
  if (heavy.empty()) throw ParseError("empty SMILES");
  if (!rings.empty()) throw ParseError("unclosed ring label in '" + std::string(s) + "'");
  if (!branch_stack.empty()) throw ParseError("unbalanced '(' in '" + std::string(s) + "'");
  if (pending_order != 0) throw ParseError("dangling bond symbol at end");

  std::vector<int> used(heavy.size(), 0);
  for (const auto& [key, order] : edges) {
    used[key.first] += order;
    used[key.second] += order;
  }
  std::size_t n = heavy.size();
  std::vector<int> hcount(heavy.size());
  for (std::size_t a = 0; a < heavy.size(); ++a) {
    hcount[a] = std::max(0, valence(heavy[a]) - used[a]);
    n += static_cast<std::size_t>(hcount[a]);
  }

  std::vector<Element> atoms = heavy;
  std::vector<std::uint8_t> bonds(n * n, 0);
  for (const auto& [key, order] : edges) {
    bonds[key.first * n + key.second] = static_cast<std::uint8_t>(order);
    bonds[key.second * n + key.first] = static_cast<std::uint8_t>(order);
  }
  for (std::size_t a = 0; a < heavy.size(); ++a) {
    for (int h = 0; h < hcount[a]; ++h) {
      const std::size_t idx = atoms.size();
      atoms.push_back(Element::H);
      bonds[a * n + idx] = 1;
      bonds[idx * n + a] = 1;
    }
  }
  try {
    return Molecule(std::move(atoms), std::move(bonds), std::string(s));
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

}  // namespace molmask
