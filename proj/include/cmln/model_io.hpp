#pragma once

// Model files:
//
//   # comment
//   domain 4                      or   domain Alice, Bob
//   sm/1, fr/2
//   w 0.5 :: sm(x)                classical log-weight (float backend, value e^w)
//   cw [1@0, 1@1/2] :: heads(x)   exact expweights m@c/d = m e^{i 2 pi c/d}
//
// A cw component may be a sum "m@c/d + m@c/d"; a bare rational m means m@0.
// "w 0" is exact-compatible (e^0 = 1).  Target files hold "n1,n2 : p/q" lines.

#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cmln/cyclotomic.hpp"
#include "cmln/error.hpp"
#include "cmln/expressivity.hpp"
#include "cmln/logic.hpp"
#include "cmln/mln.hpp"
#include "cmln/parse.hpp"
#include "cmln/rational.hpp"

namespace cmln {

enum class BackendKind { exact, floating };

inline const char* backend_name(BackendKind b) { return b == BackendKind::exact ? "exact" : "float"; }

struct ModelEntry {
  Formula formula;
  bool exact = false;
  std::vector<Cyclotomic> expweights;  // exact entries
  double logweight = 0;                // float entries
  std::size_t line = 0;
};

struct ModelFile {
  std::optional<Domain> domain;
  Signature signature;
  std::vector<ModelEntry> entries;

  bool has_exact() const {
    for (const auto& e : entries)
      if (e.exact) return true;
    return false;
  }
  bool has_nonzero_float() const {
    for (const auto& e : entries)
      if (!e.exact && e.logweight != 0) return true;
    return false;
  }

  BackendKind inferred_backend() const {
    if (has_exact() && has_nonzero_float())
      throw ParseError("model mixes exact (cw) and real (w) weights", entries.front().line, 1);
    return has_nonzero_float() ? BackendKind::floating : BackendKind::exact;
  }

  std::vector<Formula> formulas() const {
    std::vector<Formula> out;
    for (const auto& e : entries) out.push_back(e.formula);
    return out;
  }

  std::size_t components() const {
    for (const auto& e : entries)
      if (e.exact) return e.expweights.size();
    return 1;
  }

  const Domain& require_domain() const {
    if (!domain) throw ParseError("model has no domain declaration", 1, 1);
    return *domain;
  }

  CMln<Cyclotomic> exact_model() const {
    if (has_nonzero_float()) throw PreconditionError("model has real log-weights; use the float backend");
    CMln<Cyclotomic> m(signature);
    std::size_t d = components();
    for (const auto& e : entries)
      m.add(e.formula, e.exact ? e.expweights : std::vector<Cyclotomic>(d, Cyclotomic(1L)));
    return m;
  }

  CMln<FloatComplex> float_model() const {
    if (has_exact() && has_nonzero_float())
      throw PreconditionError("model mixes exact (cw) and real (w) weights");
    CMln<FloatComplex> m(signature);
    std::size_t d = components();
    for (const auto& e : entries) {
      std::vector<FloatComplex> w;
      if (e.exact)
        for (const auto& c : e.expweights) w.push_back(c.to_complex());
      else
        w.assign(d, FloatComplex(std::exp(e.logweight), 0));
      m.add(e.formula, std::move(w));
    }
    return m;
  }
};

namespace detail {

class LineCursor {
 public:
  LineCursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, pos_ + 1); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t pos) const { throw ParseError(msg, line_, pos + 1); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  bool accept(std::string_view tok) {
    skip_space();
    if (text_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }
  // run of characters accepted by pred
  std::string_view take(auto pred) {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && pred(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }
  std::string_view rest() {
    skip_space();
    auto r = text_.substr(pos_);
    pos_ = text_.size();
    return r;
  }
  std::size_t pos() const { return pos_; }
  std::size_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline bool rational_char(char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-'; }

inline Rational read_rational(LineCursor& cur) {
  std::size_t at = cur.pos();
  auto tok = cur.take(rational_char);
  try {
    return parse_rational(tok);
  } catch (const std::invalid_argument&) {
    cur.fail_at("bad rational literal '" + std::string(tok) + "'", at);
  }
}

// term ('+' term)*, term := rational ('@' rational)?
inline Cyclotomic read_cyclotomic(LineCursor& cur) {
  Cyclotomic sum;
  do {
    Rational m = read_rational(cur);
    if (cur.accept("@")) {
      std::size_t at = cur.pos();
      Rational phase = read_rational(cur);
      if (!phase.get_den().fits_ulong_p()) cur.fail_at("phase denominator too large", at);
      sum += Cyclotomic::from_polar(m, phase);
    } else {
      sum += Cyclotomic(m);
    }
  } while (cur.accept("+"));
  return sum;
}

inline std::string_view strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline Formula read_formula(LineCursor& cur, const Signature& sig) {
  cur.skip_space();
  std::size_t col = cur.pos() + 1;
  auto text = cur.rest();
  if (text.empty()) cur.fail("missing formula after '::'");
  Formula f = parse_formula(text, cur.line(), col);
  for (const auto& p : predicates(f)) {
    if (sig.contains(p)) continue;
    std::string what = sig.contains_name(p.name) ? "arity mismatch for predicate " : "undeclared predicate ";
    auto at = text.find(p.name);
    throw ParseError(what + p.to_string(), cur.line(), col + (at == std::string_view::npos ? 0 : at));
  }
  return f;
}

}  // namespace detail

inline ModelFile parse_model(std::string_view text) {
  ModelFile out;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    auto line = detail::strip_comment(raw);
    detail::LineCursor cur(line, lineno);
    if (cur.at_end()) {
      if (end == text.size()) break;
      continue;
    }
    std::size_t kw_at = cur.pos();
    auto head = cur.take(detail::ident_char);
    if (head == "domain") {
      if (out.domain) cur.fail_at("duplicate domain declaration", kw_at);
      cur.skip_space();
      std::size_t at = cur.pos();
      auto first = cur.take(detail::ident_char);
      if (first.empty()) cur.fail("expected domain size or constant list");
      if (std::isdigit(static_cast<unsigned char>(first[0]))) {
        for (char c : first)
          if (!std::isdigit(static_cast<unsigned char>(c))) cur.fail_at("bad domain size", at);
        auto n = std::stoull(std::string(first));
        if (n == 0) cur.fail_at("domain must be nonempty", at);
        out.domain = Domain::of_size(n);
      } else {
        std::vector<std::string> names{std::string(first)};
        while (cur.accept(",")) {
          auto c = cur.take(detail::ident_char);
          if (c.empty()) cur.fail("expected constant");
          names.emplace_back(c);
        }
        try {
          out.domain = Domain(names);
        } catch (const LogicError& e) {
          cur.fail_at(e.what(), at);
        }
      }
      if (!cur.at_end()) cur.fail("unexpected text after domain");
    } else if (head == "w" || head == "cw") {
      ModelEntry e;
      e.line = lineno;
      if (head == "w") {
        std::size_t at = cur.pos();
        auto tok = cur.take([](char c) {
          return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E';
        });
        try {
          std::size_t used = 0;
          e.logweight = std::stod(std::string(tok), &used);
          if (used != tok.size() || !std::isfinite(e.logweight)) throw std::invalid_argument("bad");
        } catch (const std::exception&) {
          cur.fail_at("bad real weight '" + std::string(tok) + "'", at);
        }
      } else {
        e.exact = true;
        cur.expect("[");
        do e.expweights.push_back(detail::read_cyclotomic(cur));
        while (cur.accept(","));
        cur.expect("]");
        if (!out.entries.empty()) {
          for (const auto& prev : out.entries)
            if (prev.exact && prev.expweights.size() != e.expweights.size())
              cur.fail("weight vector has " + std::to_string(e.expweights.size()) + " components, expected " +
                       std::to_string(prev.expweights.size()));
        }
      }
      cur.expect("::");
      e.formula = detail::read_formula(cur, out.signature);
      out.entries.push_back(std::move(e));
    } else if (!head.empty() && (std::isalpha(static_cast<unsigned char>(head[0])) || head[0] == '_') &&
               cur.accept("/")) {
      std::string name(head);
      for (;;) {
        std::size_t at = cur.pos();
        auto ar = cur.take([](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
        if (ar.empty()) cur.fail("expected arity");
        Predicate p{name, std::stoull(std::string(ar))};
        if (out.signature.contains_name(p.name)) cur.fail_at("predicate " + p.name + " declared twice", at);
        out.signature.add(p);
        if (!cur.accept(",")) break;
        auto next = cur.take(detail::ident_char);
        if (next.empty()) cur.fail("expected predicate name");
        name = std::string(next);
        cur.expect("/");
      }
      if (!cur.at_end()) cur.fail("unexpected text after predicate declarations");
    } else {
      cur.fail_at("expected 'domain', a predicate declaration name/arity, 'w' or 'cw'", kw_at);
    }
  }
  if (out.has_exact() && out.has_nonzero_float()) {
    for (const auto& e : out.entries)
      if (!e.exact && e.logweight != 0)
        throw ParseError("model mixes exact (cw) and real (w) weights", e.line, 1);
  }
  return out;
}

inline std::string write_model(const CMln<Cyclotomic>& m, const Domain& domain) {
  std::ostringstream os;
  bool numbered = true;
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (domain[i] != "A" + std::to_string(i + 1)) numbered = false;
  if (numbered) {
    os << "domain " << domain.size() << "\n";
  } else {
    os << "domain ";
    for (std::size_t i = 0; i < domain.size(); ++i) os << (i ? ", " : "") << domain[i];
    os << "\n";
  }
  const auto& preds = m.signature().predicates();
  for (std::size_t i = 0; i < preds.size(); ++i) os << (i ? ", " : "") << preds[i].to_string();
  if (!preds.empty()) os << "\n";
  for (const auto& e : m.entries()) {
    os << "cw [";
    for (std::size_t i = 0; i < e.expweights.size(); ++i) os << (i ? ", " : "") << e.expweights[i].to_string();
    os << "] :: " << to_string(e.formula) << "\n";
  }
  return os.str();
}

inline TargetDistribution parse_target(std::string_view text) {
  TargetDistribution out;
  std::size_t lineno = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = detail::strip_comment(text.substr(start, end - start));
    start = end + 1;
    ++lineno;
    detail::LineCursor cur(line, lineno);
    if (cur.at_end()) continue;
    CountVector n;
    do {
      std::size_t at = cur.pos();
      auto tok = cur.take([](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
      if (tok.empty()) cur.fail("expected count");
      try {
        n.push_back(std::stoull(std::string(tok)));
      } catch (const std::exception&) {
        cur.fail_at("count out of range", at);
      }
    } while (cur.accept(","));
    cur.expect(":");
    Rational p = detail::read_rational(cur);
    if (!cur.at_end()) cur.fail("unexpected text after probability");
    if (!out.empty() && out.begin()->first.size() != n.size()) cur.fail("count vector has inconsistent dimension");
    out[n] += p;
  }
  return out;
}

inline std::string format_target_line(const CountVector& n, const std::string& value) {
  std::string s;
  for (std::size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
  return s + " : " + value;
}

}  // namespace cmln
