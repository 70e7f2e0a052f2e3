#pragma once

// Reference computations written directly from the textbook definitions,
// sharing no code with the engine. Tests compare the engine against these.

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Propositional formula over numbered atoms.
struct Prop {
  enum class Kind { atom, negation, conjunction, disjunction, constant } kind = Kind::atom;
  int atom = 0;
  bool constant = false;
  std::vector<Prop> kids;
};

Prop random_prop(std::mt19937_64& rng, int atoms, int depth);

// Fully parenthesised source text; `atom_text(i)` renders atom i.
template <class F>
std::string render(const Prop& p, F atom_text) {
  switch (p.kind) {
    case Prop::Kind::atom: return atom_text(p.atom);
    case Prop::Kind::constant: return p.constant ? "true" : "false";
    case Prop::Kind::negation: return "(not " + render(p.kids[0], atom_text) + ")";
    case Prop::Kind::conjunction: return "(" + render(p.kids[0], atom_text) + " and " + render(p.kids[1], atom_text) + ")";
    case Prop::Kind::disjunction: return "(" + render(p.kids[0], atom_text) + " or " + render(p.kids[1], atom_text) + ")";
  }
  return {};
}

// Bit i of `assignment` is the value of atom i.
bool truth(const Prop& p, unsigned assignment);

// Enumerates every completion of the atoms in `gaps`; returns the common
// value, or nullopt when completions disagree.
std::optional<bool> completion_value(const Prop& p, unsigned known, unsigned gaps, int atoms);

bool read_once(const Prop& p);

struct Kappa {
  double observed = 0.0;
  double expected = 0.0;
  double kappa = 0.0;
};

// From raw (machine, human) pairs, by counting.
Kappa cohen_kappa(const std::vector<std::pair<bool, bool>>& pairs);

// Pooled two-proportion z, in long double.
double pooled_z(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2);

// Round half to even via the FPU's default rounding mode.
std::size_t round_half_even(double x);

}  // namespace oracle
