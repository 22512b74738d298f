#include <charconv>
#include <fstream>
#include <sstream>
#include <tuple>

#include "molmask/chem.hpp"

namespace molmask {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t parse_index(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError("bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(trim(text.substr(start, end - start)));
    start = end + 1;
  }
  return lines;
}

Molecule parse_block(std::span<const std::string_view> lines) {
  std::vector<Element> atoms;
  bool have_atoms = false;
  bool have_bonds = false;
  std::string id;
  std::vector<std::tuple<std::size_t, std::size_t, int>> edges;

  for (auto line : lines) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "atoms") {
      if (have_atoms) throw ParseError("duplicate 'atoms' line");
      have_atoms = true;
      for (std::size_t t = 1; t < tok.size(); ++t) {
        auto e = element_from_symbol(tok[t]);
        if (!e) throw ParseError("unknown element '" + std::string(tok[t]) + "'");
        atoms.push_back(*e);
      }
    } else if (tok[0] == "bonds") {
      if (have_bonds) throw ParseError("duplicate 'bonds' line");
      have_bonds = true;
      for (std::size_t t = 1; t < tok.size(); ++t) {
        const auto s = tok[t];
        const auto dash = s.find('-');
        const auto colon = s.find(':');
        if (dash == std::string_view::npos || colon == std::string_view::npos || colon < dash)
          throw ParseError("malformed bond '" + std::string(s) + "'");
        const auto i = parse_index(s.substr(0, dash), "atom index");
        const auto j = parse_index(s.substr(dash + 1, colon - dash - 1), "atom index");
        const auto o = parse_index(s.substr(colon + 1), "bond order");
        if (o < 1 || o > 3)
          throw ParseError("bond order outside 1..3 in '" + std::string(s) + "'");
        edges.emplace_back(i, j, static_cast<int>(o));
      }
    } else if (tok[0] == "id") {
      auto rest = trim(line.substr(2));
      id = std::string(rest);
    } else {
      throw ParseError("unknown MOLG line '" + std::string(line) + "'");
    }
  }
  if (!have_atoms || atoms.empty()) throw ParseError("missing or empty 'atoms' line");

  const std::size_t n = atoms.size();
  std::vector<std::uint8_t> bonds(n * n, 0);
  for (auto [i, j, o] : edges) {
    if (i >= n || j >= n) throw ParseError("bond index out of range");
    if (i == j) throw ParseError("self-bond on atom " + std::to_string(i));
    auto& cur = bonds[i * n + j];
    if (cur != 0 && cur != o)
      throw ParseError("conflicting duplicate bond " + std::to_string(i) + "-" + std::to_string(j));
    cur = static_cast<std::uint8_t>(o);
    bonds[j * n + i] = static_cast<std::uint8_t>(o);
  }
  try {
    return Molecule(std::move(atoms), std::move(bonds), std::move(id));
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

}  // namespace

Molecule parse_molg(std::string_view text) {
  auto mols = parse_molg_file_text(text);
  if (mols.size() != 1)
    throw ParseError("expected exactly one molecule, found " + std::to_string(mols.size()));
  return std::move(mols.front());
}

std::vector<Molecule> parse_molg_file_text(std::string_view text) {
  // "atoms ... / bonds ..." on one line is accepted as a compact form.
  std::string normalized;
  normalized.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool spaced = i > 0 && i + 1 < text.size() && text[i - 1] == ' ' && text[i + 1] == ' ';
    normalized.push_back(text[i] == '/' && spaced ? '\n' : text[i]);
  }
  const auto lines = split_lines(normalized);
  std::vector<Molecule> out;
  std::vector<std::string_view> block;
  auto flush = [&] {
    if (!block.empty()) {
      try {
        out.push_back(parse_block(block));
      } catch (const ParseError& e) {
        throw ParseError("molecule " + std::to_string(out.size()) + ": " + e.what());
      }
      block.clear();
    }
  };
  for (const auto line : lines) {
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;
    // A new 'atoms' line always opens a new block.
    if (line.rfind("atoms", 0) == 0 && !block.empty()) flush();
    block.push_back(line);
  }
  flush();
  return out;
}

std::string serialize_molg(const Molecule& mol) {
  std::ostringstream os;
  os << "atoms";
  for (Element e : mol.atoms()) os << ' ' << element_symbol(e);
  os << "\nbonds";
  for (std::size_t i = 0; i < mol.size(); ++i)
    for (std::size_t j = i + 1; j < mol.size(); ++j)
      if (int b = mol.bond(i, j); b != 0) os << ' ' << i << '-' << j << ':' << b;
  os << '\n';
  if (!mol.id().empty()) os << "id " << mol.id() << '\n';
  return os.str();
}

std::string serialize_molg(std::span<const Molecule> mols) {
  std::string out;
  for (std::size_t k = 0; k < mols.size(); ++k) {
    if (k) out += '\n';
    out += serialize_molg(mols[k]);
  }
  return out;
}

std::vector<Molecule> read_molg_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_molg_file_text(ss.str());
}

void write_molg_file(const std::string& path, std::span<const Molecule> mols) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_molg(mols);
}

}  // namespace molmask
