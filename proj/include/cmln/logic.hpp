#pragma once

// Function-free first-order logic over a finite domain: formulas, ground-atom
// tables, possible worlds and the grounding count N(alpha, world).

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmln/error.hpp"
#include "cmln/rational.hpp"

namespace cmln {

struct Predicate {
  std::string name;
  std::size_t arity = 0;

  auto operator<=>(const Predicate&) const = default;
  std::string to_string() const { return name + "/" + std::to_string(arity); }
};

class Signature {
 public:
  Signature() = default;
  Signature(std::initializer_list<Predicate> preds) {
    for (const auto& p : preds) add(p);
  }

  std::size_t add(const Predicate& p) {
    if (p.name.empty()) throw LogicError("predicate name must be nonempty");
    if (index_of(p)) throw LogicError("duplicate predicate " + p.to_string());
    preds_.push_back(p);
    return preds_.size() - 1;
  }

  // Adds p unless already present; returns its index either way.
  std::size_t ensure(const Predicate& p) {
    if (auto i = index_of(p)) return *i;
    return add(p);
  }

  std::optional<std::size_t> index_of(const Predicate& p) const {
    for (std::size_t i = 0; i < preds_.size(); ++i)
      if (preds_[i] == p) return i;
    return std::nullopt;
  }

  bool contains(const Predicate& p) const { return index_of(p).has_value(); }
  bool contains_name(const std::string& name) const {
    return std::any_of(preds_.begin(), preds_.end(), [&](const Predicate& q) { return q.name == name; });
  }

  const std::vector<Predicate>& predicates() const noexcept { return preds_; }
  std::size_t size() const noexcept { return preds_.size(); }
  bool empty() const noexcept { return preds_.empty(); }
  const Predicate& operator[](std::size_t i) const { return preds_[i]; }

  friend bool operator==(const Signature&, const Signature&) = default;

 private:
  std::vector<Predicate> preds_;
};

inline bool is_variable_name(const std::string& s) { return !s.empty() && s[0] >= 'a' && s[0] <= 'z'; }
inline bool is_constant_name(const std::string& s) { return !s.empty() && s[0] >= 'A' && s[0] <= 'Z'; }

struct Term {
  enum class Kind { variable, constant };
  Kind kind = Kind::variable;
  std::string name;

  static Term variable(std::string n) {
    if (!is_variable_name(n)) throw LogicError("variable must start with a lowercase letter: " + n);
    return {Kind::variable, std::move(n)};
  }
  static Term constant(std::string n) {
    if (!is_constant_name(n)) throw LogicError("constant must start with an uppercase letter: " + n);
    return {Kind::constant, std::move(n)};
  }
  // Classifies by the casing rule.
  static Term parse(std::string n) {
    if (is_variable_name(n)) return variable(std::move(n));
    return constant(std::move(n));
  }

  bool is_variable() const noexcept { return kind == Kind::variable; }
  auto operator<=>(const Term&) const = default;
};

struct Atom {
  Predicate predicate;
  std::vector<Term> args;

  Atom() = default;
  Atom(std::string pred, std::vector<Term> arguments)
      : predicate{std::move(pred), arguments.size()}, args(std::move(arguments)) {}

  std::string to_string() const {
    if (args.empty()) return predicate.name;
    std::string s = predicate.name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i].name;
    return s + ")";
  }
  auto operator<=>(const Atom&) const = default;
};

class Formula {
 public:
  enum class Kind { atom, negation, conjunction, disjunction, implication, equivalence, top, bottom };

  Formula() : Formula(Kind::top) {}

  static Formula make_atom(Atom a) {
    Formula f(Kind::atom);
    f.node_ = std::make_shared<const Node>(Node{Kind::atom, std::move(a), {}, {}});
    return f;
  }
  static Formula top() { return Formula(Kind::top); }
  static Formula bottom() { return Formula(Kind::bottom); }
  static Formula negation(const Formula& f) { return unary(f); }
  static Formula conjunction(const Formula& a, const Formula& b) { return binary(Kind::conjunction, a, b); }
  static Formula disjunction(const Formula& a, const Formula& b) { return binary(Kind::disjunction, a, b); }
  static Formula implication(const Formula& a, const Formula& b) { return binary(Kind::implication, a, b); }
  static Formula equivalence(const Formula& a, const Formula& b) { return binary(Kind::equivalence, a, b); }

  Kind kind() const noexcept { return node_->kind; }
  const Atom& atom() const { return node_->atom; }
  // Operand of a negation, or left operand of a binary connective.
  Formula lhs() const { return Formula(node_->lhs); }
  Formula rhs() const { return Formula(node_->rhs); }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::atom: return a.atom() == b.atom();
      case Kind::top:
      case Kind::bottom: return true;
      case Kind::negation: return a.lhs() == b.lhs();
      default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    }
  }

 private:
  struct Node {
    Kind kind;
    Atom atom;
    std::shared_ptr<const Node> lhs, rhs;
  };

  explicit Formula(Kind k) : node_(std::make_shared<const Node>(Node{k, {}, {}, {}})) {}
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Formula unary(const Formula& f) {
    return Formula(std::make_shared<const Node>(Node{Kind::negation, {}, f.node_, {}}));
  }
  static Formula binary(Kind k, const Formula& a, const Formula& b) {
    return Formula(std::make_shared<const Node>(Node{k, {}, a.node_, b.node_}));
  }

  std::shared_ptr<const Node> node_;
};

inline Formula operator~(const Formula& f) { return Formula::negation(f); }
inline Formula operator&(const Formula& a, const Formula& b) { return Formula::conjunction(a, b); }
inline Formula operator|(const Formula& a, const Formula& b) { return Formula::disjunction(a, b); }

namespace detail {

template <class Visit>
void visit_atoms(const Formula& f, Visit&& visit) {
  switch (f.kind()) {
    case Formula::Kind::atom: visit(f.atom()); break;
    case Formula::Kind::top:
    case Formula::Kind::bottom: break;
    case Formula::Kind::negation: visit_atoms(f.lhs(), visit); break;
    default:
      visit_atoms(f.lhs(), visit);
      visit_atoms(f.rhs(), visit);
  }
}

inline int precedence(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::equivalence: return 1;
    case Formula::Kind::implication: return 2;
    case Formula::Kind::disjunction: return 3;
    case Formula::Kind::conjunction: return 4;
    case Formula::Kind::negation: return 5;
    default: return 6;
  }
}

inline std::string to_string_prec(const Formula& f, int min_prec) {
  using K = Formula::Kind;
  std::string s;
  int p = precedence(f.kind());
  switch (f.kind()) {
    case K::atom: s = f.atom().to_string(); break;
    case K::top: s = "true"; break;
    case K::bottom: s = "false"; break;
    case K::negation: s = "~" + to_string_prec(f.lhs(), p); break;
    default: {
      const char* op = f.kind() == K::conjunction   ? " & "
                       : f.kind() == K::disjunction ? " | "
                       : f.kind() == K::implication ? " => "
                                                    : " <=> ";
      // implication groups to the right, the others to the left
      bool right_assoc = f.kind() == K::implication;
      s = to_string_prec(f.lhs(), right_assoc ? p + 1 : p) + op + to_string_prec(f.rhs(), right_assoc ? p : p + 1);
    }
  }
  return p < min_prec ? "(" + s + ")" : s;
}

}  // namespace detail

inline std::string to_string(const Formula& f) { return detail::to_string_prec(f, 0); }

// Variables in order of first occurrence.
inline std::vector<std::string> vars(const Formula& f) {
  std::vector<std::string> out;
  detail::visit_atoms(f, [&](const Atom& a) {
    for (const auto& t : a.args)
      if (t.is_variable() && std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
  });
  return out;
}

inline std::vector<std::string> constants(const Formula& f) {
  std::vector<std::string> out;
  detail::visit_atoms(f, [&](const Atom& a) {
    for (const auto& t : a.args)
      if (!t.is_variable() && std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
  });
  return out;
}

inline std::vector<Predicate> predicates(const Formula& f) {
  std::vector<Predicate> out;
  detail::visit_atoms(f, [&](const Atom& a) {
    if (std::find(out.begin(), out.end(), a.predicate) == out.end()) out.push_back(a.predicate);
  });
  return out;
}

inline bool is_ground(const Formula& f) { return vars(f).empty(); }

// Replaces variables by terms; unmapped variables stay.
inline Formula substitute(const Formula& f, const std::map<std::string, Term>& sub) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::atom: {
      Atom a = f.atom();
      for (auto& t : a.args) {
        if (!t.is_variable()) continue;
        auto it = sub.find(t.name);
        if (it != sub.end()) t = it->second;
      }
      return Formula::make_atom(std::move(a));
    }
    case K::top:
    case K::bottom: return f;
    case K::negation: return ~substitute(f.lhs(), sub);
    case K::conjunction: return Formula::conjunction(substitute(f.lhs(), sub), substitute(f.rhs(), sub));
    case K::disjunction: return Formula::disjunction(substitute(f.lhs(), sub), substitute(f.rhs(), sub));
    case K::implication: return Formula::implication(substitute(f.lhs(), sub), substitute(f.rhs(), sub));
    case K::equivalence: return Formula::equivalence(substitute(f.lhs(), sub), substitute(f.rhs(), sub));
  }
  return f;
}

// Checks every atom against the signature (declared predicate, matching arity).
inline void check_signature(const Formula& f, const Signature& sig) {
  detail::visit_atoms(f, [&](const Atom& a) {
    if (sig.contains(a.predicate)) return;
    if (sig.contains_name(a.predicate.name))
      throw LogicError("arity mismatch for predicate " + a.predicate.name + " in " + a.to_string());
    throw LogicError("undeclared predicate " + a.predicate.to_string());
  });
}

class Domain {
 public:
  explicit Domain(std::vector<std::string> constants) : constants_(std::move(constants)) {
    if (constants_.empty()) throw LogicError("domain must be nonempty");
    std::set<std::string> seen;
    for (const auto& c : constants_) {
      if (!is_constant_name(c)) throw LogicError("domain constant must start with an uppercase letter: " + c);
      if (!seen.insert(c).second) throw LogicError("duplicate domain constant " + c);
    }
  }

  // A1, A2, ..., An
  static Domain of_size(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= n; ++i) names.push_back("A" + std::to_string(i));
    return Domain(std::move(names));
  }

  std::size_t size() const noexcept { return constants_.size(); }
  const std::vector<std::string>& constants() const noexcept { return constants_; }
  const std::string& operator[](std::size_t i) const { return constants_[i]; }
  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < constants_.size(); ++i)
      if (constants_[i] == name) return i;
    return std::nullopt;
  }
  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  std::vector<std::string> constants_;
};

// |Delta|^{|vars(alpha)|}
inline std::uint64_t grounding_count(const Formula& f, const Domain& d) { return ipow(d.size(), vars(f).size()); }

// Canonical ground-atom table: predicate-major, argument tuples in
// lexicographic order of domain indices.
class GroundAtomIndex {
 public:
  GroundAtomIndex(Signature signature, Domain domain) : sig_(std::move(signature)), domain_(std::move(domain)) {
    if (sig_.empty()) throw LogicError("signature must be nonempty");
    std::uint64_t off = 0;
    for (const auto& p : sig_.predicates()) {
      offsets_.push_back(off);
      off += ipow(domain_.size(), p.arity);
    }
    offsets_.push_back(off);
  }

  const Signature& signature() const noexcept { return sig_; }
  const Domain& domain() const noexcept { return domain_; }
  std::uint64_t size() const noexcept { return offsets_.back(); }

  // [begin, end) of the atoms of predicate p.
  std::pair<std::uint64_t, std::uint64_t> range(std::size_t pred) const { return {offsets_[pred], offsets_[pred + 1]}; }

  std::uint64_t index_of(std::size_t pred, std::span<const std::size_t> args) const {
    std::uint64_t i = 0;
    for (auto a : args) i = i * domain_.size() + a;
    return offsets_[pred] + i;
  }

  std::pair<std::size_t, std::vector<std::size_t>> decode(std::uint64_t index) const {
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
    std::size_t pred = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    std::uint64_t rest = index - offsets_[pred];
    std::vector<std::size_t> args(sig_[pred].arity);
    for (std::size_t k = args.size(); k-- > 0;) {
      args[k] = rest % domain_.size();
      rest /= domain_.size();
    }
    return {pred, args};
  }

  Atom atom(std::uint64_t index) const {
    auto [pred, args] = decode(index);
    std::vector<Term> terms;
    for (auto a : args) terms.push_back(Term::constant(domain_[a]));
    return Atom(sig_[pred].name, std::move(terms));
  }

  // Index of a ground atom; throws LogicError on unknown predicate/constant or variables.
  std::uint64_t find(const Atom& a) const {
    auto pred = sig_.index_of(a.predicate);
    if (!pred) throw LogicError("unknown predicate " + a.predicate.to_string());
    std::vector<std::size_t> args;
    for (const auto& t : a.args) {
      if (t.is_variable()) throw LogicError("atom " + a.to_string() + " is not ground");
      auto c = domain_.index_of(t.name);
      if (!c) throw LogicError("unknown constant " + t.name);
      args.push_back(*c);
    }
    return index_of(*pred, args);
  }

 private:
  Signature sig_;
  Domain domain_;
  std::vector<std::uint64_t> offsets_;
};

// Postfix program over atom indices.
struct Instr {
  enum class Op : std::uint8_t { atom, top, bottom, negation, conjunction, disjunction, implication, equivalence };
  Op op;
  std::uint32_t index = 0;
};
using Program = std::vector<Instr>;

template <class Test>
bool evaluate(const Program& prog, Test&& test) {
  bool small[64] = {};
  std::unique_ptr<bool[]> big;
  bool* st = small;
  if (prog.size() > 64) {
    big = std::make_unique<bool[]>(prog.size());
    st = big.get();
  }
  std::size_t sp = 0;
  for (const auto& in : prog) {
    using O = Instr::Op;
    switch (in.op) {
      case O::atom: st[sp++] = test(in.index); break;
      case O::top: st[sp++] = true; break;
      case O::bottom: st[sp++] = false; break;
      case O::negation: st[sp - 1] = !st[sp - 1]; break;
      default: {
        bool b = st[--sp];
        bool a = st[sp - 1];
        st[sp - 1] = in.op == O::conjunction   ? (a && b)
                     : in.op == O::disjunction ? (a || b)
                     : in.op == O::implication ? (!a || b)
                                               : (a == b);
      }
    }
  }
  return st[0];
}

namespace detail {

// atom_slot maps an atom to its index in the bit source.
template <class AtomSlot>
void compile_into(const Formula& f, Program& out, AtomSlot&& atom_slot) {
  using K = Formula::Kind;
  using O = Instr::Op;
  switch (f.kind()) {
    case K::atom: out.push_back({O::atom, static_cast<std::uint32_t>(atom_slot(f.atom()))}); return;
    case K::top: out.push_back({O::top}); return;
    case K::bottom: out.push_back({O::bottom}); return;
    case K::negation:
      compile_into(f.lhs(), out, atom_slot);
      out.push_back({O::negation});
      return;
    default:
      compile_into(f.lhs(), out, atom_slot);
      compile_into(f.rhs(), out, atom_slot);
      out.push_back({f.kind() == K::conjunction   ? O::conjunction
                     : f.kind() == K::disjunction ? O::disjunction
                     : f.kind() == K::implication ? O::implication
                                                  : O::equivalence});
  }
}

}  // namespace detail

template <class AtomSlot>
Program compile(const Formula& f, AtomSlot&& atom_slot) {
  Program p;
  detail::compile_into(f, p, atom_slot);
  return p;
}

// A formula grounded over every substitution of its variables (variables in
// first-occurrence order, substitutions in lexicographic order).
class GroundedFormula {
 public:
  GroundedFormula(const Formula& f, const GroundAtomIndex& index) {
    auto vs = vars(f);
    const auto& dom = index.domain();
    std::uint64_t count = ipow(dom.size(), vs.size());
    std::vector<std::size_t> choice(vs.size(), 0);
    for (std::uint64_t g = 0; g < count; ++g) {
      std::map<std::string, std::size_t> sub;
      for (std::size_t k = 0; k < vs.size(); ++k) sub[vs[k]] = choice[k];
      programs_.push_back(compile(f, [&](const Atom& a) {
        auto pred = index.signature().index_of(a.predicate);
        if (!pred) throw LogicError("unknown predicate " + a.predicate.to_string());
        std::vector<std::size_t> args;
        for (const auto& t : a.args) {
          if (t.is_variable()) {
            args.push_back(sub.at(t.name));
          } else {
            auto c = dom.index_of(t.name);
            if (!c) throw LogicError("unknown constant " + t.name);
            args.push_back(*c);
          }
        }
        return index.index_of(*pred, args);
      }));
      for (std::size_t k = vs.size(); k-- > 0;) {
        if (++choice[k] < dom.size()) break;
        choice[k] = 0;
      }
    }
  }

  std::size_t groundings() const noexcept { return programs_.size(); }
  const std::vector<Program>& programs() const noexcept { return programs_; }

  template <class Test>
  std::uint64_t count(Test&& test) const {
    std::uint64_t n = 0;
    for (const auto& p : programs_) n += evaluate(p, test);
    return n;
  }

  template <class Test>
  bool all(Test&& test) const {
    for (const auto& p : programs_)
      if (!evaluate(p, test)) return false;
    return true;
  }

 private:
  std::vector<Program> programs_;
};

class GroundWorld {
 public:
  explicit GroundWorld(std::shared_ptr<const GroundAtomIndex> index)
      : index_(std::move(index)), words_((index_->size() + 63) / 64, 0) {}

  static GroundWorld from_code(std::shared_ptr<const GroundAtomIndex> index, std::uint64_t code) {
    GroundWorld w(std::move(index));
    if (!w.words_.empty()) w.words_[0] = code;
    return w;
  }

  // World whose true atoms are exactly `atoms` (ground).
  static GroundWorld from_atoms(std::shared_ptr<const GroundAtomIndex> index, const std::vector<Atom>& atoms) {
    GroundWorld w(std::move(index));
    for (const auto& a : atoms) w.set(w.index_->find(a), true);
    return w;
  }

  const GroundAtomIndex& index() const noexcept { return *index_; }
  const std::shared_ptr<const GroundAtomIndex>& index_ptr() const noexcept { return index_; }

  bool test(std::uint64_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }
  void set(std::uint64_t i, bool value) {
    std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (value)
      words_[i / 64] |= mask;
    else
      words_[i / 64] &= ~mask;
  }

  std::uint64_t true_count() const {
    std::uint64_t n = 0;
    for (auto w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (std::uint64_t i = 0; i < index_->size(); ++i) {
      if (!test(i)) continue;
      s += (first ? "" : ", ") + index_->atom(i).to_string();
      first = false;
    }
    return s + "}";
  }

  friend bool operator==(const GroundWorld& a, const GroundWorld& b) { return a.words_ == b.words_; }

 private:
  std::shared_ptr<const GroundAtomIndex> index_;
  std::vector<std::uint64_t> words_;
};

inline bool satisfies(const GroundWorld& world, const Formula& ground) {
  if (!is_ground(ground)) throw LogicError("formula " + to_string(ground) + " contains variables");
  Program p = compile(ground, [&](const Atom& a) { return world.index().find(a); });
  return evaluate(p, [&](std::uint32_t i) { return world.test(i); });
}

// N(alpha, world): satisfied groundings among all |Delta|^{|vars|} substitutions.
inline std::uint64_t count_satisfied(const Formula& f, const GroundWorld& world) {
  GroundedFormula g(f, world.index());
  return g.count([&](std::uint32_t i) { return world.test(i); });
}

inline constexpr std::uint64_t kHardWorldCap = 62;

// Ground-atom cap for exhaustive enumeration: CMLN_MAX_GROUND_ATOMS or 24.
inline std::uint64_t default_world_cap() {
  if (const char* env = std::getenv("CMLN_MAX_GROUND_ATOMS")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return std::min<std::uint64_t>(v, kHardWorldCap);
  }
  return 24;
}

inline void check_enumerable(std::uint64_t atoms, std::uint64_t cap) {
  if (atoms > std::min(cap, kHardWorldCap))
    throw SizeLimitError("exhaustive enumeration needs 2^" + std::to_string(atoms) + " worlds; cap is 2^" +
                         std::to_string(std::min(cap, kHardWorldCap)));
}

// All 2^T worlds in increasing bitset order.
class WorldRange {
 public:
  WorldRange(std::shared_ptr<const GroundAtomIndex> index, std::uint64_t cap) : index_(std::move(index)) {
    check_enumerable(index_->size(), cap);
    count_ = std::uint64_t{1} << index_->size();
  }

  class iterator {
   public:
    using value_type = GroundWorld;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    iterator(const WorldRange* r, std::uint64_t code) : range_(r), code_(code) {}
    GroundWorld operator*() const { return GroundWorld::from_code(range_->index_, code_); }
    iterator& operator++() {
      ++code_;
      return *this;
    }
    iterator operator++(int) {
      auto t = *this;
      ++code_;
      return t;
    }
    bool operator==(const iterator& o) const { return code_ == o.code_; }

   private:
    const WorldRange* range_ = nullptr;
    std::uint64_t code_ = 0;
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, count_}; }
  std::uint64_t size() const noexcept { return count_; }

 private:
  std::shared_ptr<const GroundAtomIndex> index_;
  std::uint64_t count_ = 0;
};

inline WorldRange enumerate_worlds(const Signature& sig, const Domain& domain, std::uint64_t cap = default_world_cap()) {
  return WorldRange(std::make_shared<const GroundAtomIndex>(sig, domain), cap);
}

}  // namespace cmln
