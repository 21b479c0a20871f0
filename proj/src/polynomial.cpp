#include "bergman_lab/polynomial.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace bergman_lab {

Polynomial Polynomial::constant(int nvars, cplx c) {
  Polynomial p(nvars);
  p.add_term(Key(static_cast<std::size_t>(2 * nvars), 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int index, bool conjugated) {
  if (index < 0 || index >= nvars) throw Error(ErrorKind::invalid_argument, "variable index out of range");
  Key key(static_cast<std::size_t>(2 * nvars), 0);
  key[static_cast<std::size_t>(index + (conjugated ? nvars : 0))] = 1;
  Polynomial p(nvars);
  p.add_term(key, 1.0);
  return p;
}

int Polynomial::total_degree() const {
  int deg = 0;
  for (const auto& [key, c] : terms_) {
    int s = 0;
    for (int e : key) s += e;
    deg = std::max(deg, s);
  }
  return deg;
}

void Polynomial::add_term(const Key& key, cplx coeff) {
  if (static_cast<int>(key.size()) != 2 * nvars_)
    throw Error(ErrorKind::invalid_argument, "monomial key has the wrong length");
  if (coeff == cplx(0.0)) return;
  auto [it, inserted] = terms_.emplace(key, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == cplx(0.0)) terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (o.nvars_ != nvars_) throw Error(ErrorKind::invalid_argument, "polynomial variable count mismatch");
  Polynomial r = *this;
  for (const auto& [k, c] : o.terms_) r.add_term(k, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.nvars_ != nvars_) throw Error(ErrorKind::invalid_argument, "polynomial variable count mismatch");
  Polynomial r(nvars_);
  for (const auto& [ka, ca] : terms_) {
    for (const auto& [kb, cb] : o.terms_) {
      Key k(ka.size());
      for (std::size_t j = 0; j < ka.size(); ++j) k[j] = ka[j] + kb[j];
      r.add_term(k, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::operator*(cplx s) const {
  Polynomial r(nvars_);
  for (const auto& [k, c] : terms_) r.add_term(k, c * s);
  return r;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw Error(ErrorKind::invalid_argument, "negative polynomial power");
  Polynomial r = constant(nvars_, 1.0);
  for (int j = 0; j < k; ++j) r = r * *this;
  return r;
}

Polynomial Polynomial::conj() const {
  Polynomial r(nvars_);
  const auto n = static_cast<std::size_t>(nvars_);
  for (const auto& [k, c] : terms_) {
    Key swapped(k.size());
    for (std::size_t j = 0; j < n; ++j) {
      swapped[j] = k[j + n];
      swapped[j + n] = k[j];
    }
    r.add_term(swapped, std::conj(c));
  }
  return r;
}

Polynomial Polynomial::d(int k) const {
  Polynomial r(nvars_);
  const auto slot = static_cast<std::size_t>(k);
  for (const auto& [key, c] : terms_) {
    if (key[slot] == 0) continue;
    Key nk = key;
    nk[slot] -= 1;
    r.add_term(nk, c * static_cast<double>(key[slot]));
  }
  return r;
}

Polynomial Polynomial::dbar(int k) const {
  Polynomial r(nvars_);
  const auto slot = static_cast<std::size_t>(k + nvars_);
  for (const auto& [key, c] : terms_) {
    if (key[slot] == 0) continue;
    Key nk = key;
    nk[slot] -= 1;
    r.add_term(nk, c * static_cast<double>(key[slot]));
  }
  return r;
}

cplx Polynomial::evaluate(const CVector& x) const {
  if (x.size() != nvars_) throw Error(ErrorKind::invalid_argument, "evaluation point has the wrong dimension");
  cplx sum = 0.0;
  const auto n = static_cast<std::size_t>(nvars_);
  for (const auto& [key, c] : terms_) {
    cplx v = c;
    for (std::size_t j = 0; j < n; ++j) {
      const cplx xj = x(static_cast<Index>(j));
      for (int e = 0; e < key[j]; ++e) v *= xj;
      for (int e = 0; e < key[j + n]; ++e) v *= std::conj(xj);
    }
    sum += v;
  }
  return sum;
}

bool Polynomial::is_real(double tol) const {
  const Polynomial diff = *this - conj();
  for (const auto& [k, c] : diff.terms_)
    if (std::abs(c) > tol) return false;
  return true;
}

std::string Polynomial::to_string(int base_dim) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  const auto n = static_cast<std::size_t>(nvars_);
  for (const auto& [key, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
    for (std::size_t j = 0; j < 2 * n; ++j) {
      if (key[j] == 0) continue;
      const std::size_t v = j % n;
      const bool bar = j >= n;
      const bool base = static_cast<int>(v) < base_dim;
      const std::size_t idx = base ? v + 1 : v + 1 - static_cast<std::size_t>(base_dim);
      os << "*" << (bar ? "conj(" : "") << (base ? "t" : "z") << idx << (bar ? ")" : "");
      if (key[j] > 1) os << "^" << key[j];
    }
  }
  return os.str();
}

namespace {

class Parser {
 public:
  Parser(const std::string& text, int base_dim, int fiber_dim)
      : s_(text), n_(base_dim), d_(fiber_dim) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << msg << " at column " << (pos_ + 1) << " in \"" << s_ << "\"";
    throw Error(ErrorKind::parse, os.str());
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int nv() const { return n_ + d_; }

  Polynomial expr() {
    Polynomial acc = term();
    for (;;) {
      if (accept('+')) acc = acc + term();
      else if (accept('-')) acc = acc - term();
      else return acc;
    }
  }

  Polynomial term() {
    Polynomial acc = unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * unary();
      } else if (accept('/')) {
        skip();
        const double v = number();
        if (v == 0.0) fail("division by zero");
        acc = acc * cplx(1.0 / v);
      } else {
        return acc;
      }
    }
  }

  Polynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  int integer_exponent() {
    skip();
    const bool paren = accept('(');
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a non-negative integer exponent");
    const int k = std::stoi(s_.substr(start, pos_ - start));
    if (paren) expect(')');
    return k;
  }

  Polynomial power() {
    skip();
    if (accept('|')) {
      Polynomial inner = expr();
      expect('|');
      if (!accept('^')) fail("|...| must be raised to an even power");
      const int k = integer_exponent();
      if (k % 2 != 0) fail("|...| must be raised to an even power");
      return (inner * inner.conj()).pow(k / 2);
    }
    Polynomial base = atom();
    if (accept('^')) base = base.pow(integer_exponent());
    return base;
  }

  double number() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  Polynomial atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const double v = number();
      // "0.5i" is an imaginary literal.
      if (pos_ < s_.size() && s_[pos_] == 'i' &&
          (pos_ + 1 == s_.size() || !std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])))) {
        ++pos_;
        return Polynomial::constant(nv(), cplx(0.0, v));
      }
      return Polynomial::constant(nv(), v);
    }
    if (accept('(')) {
      Polynomial p = expr();
      expect(')');
      return p;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail(std::string("unexpected '") + c + "'");
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (name == "i") return Polynomial::constant(nv(), cplx(0.0, 1.0));
    if (name == "conj" || name == "re" || name == "im" || name == "abs2") {
      expect('(');
      Polynomial arg = expr();
      expect(')');
      if (name == "conj") return arg.conj();
      if (name == "re") return (arg + arg.conj()) * cplx(0.5);
      if (name == "im") return (arg - arg.conj()) * cplx(0.0, -0.5);
      return arg * arg.conj();
    }
    if (name[0] == 't' || name[0] == 'z') {
      int idx = 1;
      if (name.size() > 1) {
        for (std::size_t j = 1; j < name.size(); ++j)
          if (!std::isdigit(static_cast<unsigned char>(name[j]))) fail("unknown symbol '" + name + "'");
        idx = std::stoi(name.substr(1));
      }
      const int limit = name[0] == 't' ? n_ : d_;
      if (idx < 1 || idx > limit) fail("variable '" + name + "' out of range");
      const int var = name[0] == 't' ? idx - 1 : n_ + idx - 1;
      return Polynomial::variable(nv(), var);
    }
    fail("unknown symbol '" + name + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
  int n_;
  int d_;
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, int base_dim, int fiber_dim) {
  return Parser(text, base_dim, fiber_dim).parse();
}

}  // namespace bergman_lab
