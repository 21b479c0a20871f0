#include "bergman_lab/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace bergman_lab {

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

class PrefixParser {
 public:
  PrefixParser(const std::string& text, int base_dim, int fiber_dim)
      : s_(text), n_(base_dim), d_(fiber_dim) {}

  NodePtr parse() {
    NodePtr root = node();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return root;
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

  std::string token() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')')
      ++pos_;
    return s_.substr(start, pos_ - start);
  }

  NodePtr node() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (s_[pos_] == ')') fail("unexpected ')'");
    if (s_[pos_] != '(') return leaf(token());
    ++pos_;
    const std::string name = token();
    auto out = std::make_shared<Expression::Node>();
    using Op = Expression::Op;
    std::size_t min_args = 1, max_args = 1;
    if (name == "+") out->op = Op::add, min_args = 1, max_args = SIZE_MAX;
    else if (name == "*") out->op = Op::mul, min_args = 1, max_args = SIZE_MAX;
    else if (name == "-") out->op = Op::sub, min_args = 1, max_args = 2;
    else if (name == "conj") out->op = Op::conj;
    else if (name == "exp") out->op = Op::exp;
    else if (name == "log") out->op = Op::log;
    else if (name == "abs2") out->op = Op::abs2;
    else if (name == "re") out->op = Op::re;
    else fail("unknown operator '" + name + "'");
    for (;;) {
      skip();
      if (pos_ >= s_.size()) fail("missing ')'");
      if (s_[pos_] == ')') {
        ++pos_;
        break;
      }
      out->args.push_back(node());
    }
    if (out->args.size() < min_args || out->args.size() > max_args)
      fail("wrong number of arguments for '" + name + "'");
    return out;
  }

  NodePtr leaf(const std::string& tok) {
    if (tok.empty()) fail("expected a token");
    auto out = std::make_shared<Expression::Node>();
    if (tok == "i") {
      out->value = cplx(0.0, 1.0);
      return out;
    }
    if (tok[0] == 't' || tok[0] == 'z') {
      int idx = 1;
      if (tok.size() > 1) {
        for (std::size_t j = 1; j < tok.size(); ++j)
          if (!std::isdigit(static_cast<unsigned char>(tok[j]))) fail("unknown symbol '" + tok + "'");
        idx = std::stoi(tok.substr(1));
      }
      const int limit = tok[0] == 't' ? n_ : d_;
      if (idx < 1 || idx > limit) fail("variable '" + tok + "' out of range");
      out->op = Expression::Op::variable;
      out->var = tok[0] == 't' ? idx - 1 : n_ + idx - 1;
      return out;
    }
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) fail("unknown symbol '" + tok + "'");
    out->value = v;
    return out;
  }

  std::string s_;
  std::size_t pos_ = 0;
  int n_;
  int d_;
};

cplx eval_node(const Expression::Node& nd, const CVector& x) {
  using Op = Expression::Op;
  switch (nd.op) {
    case Op::literal: return nd.value;
    case Op::variable: return x(nd.var);
    case Op::add: {
      cplx s = 0.0;
      for (const auto& a : nd.args) s += eval_node(*a, x);
      return s;
    }
    case Op::mul: {
      cplx p = 1.0;
      for (const auto& a : nd.args) p *= eval_node(*a, x);
      return p;
    }
    case Op::sub:
      if (nd.args.size() == 1) return -eval_node(*nd.args[0], x);
      return eval_node(*nd.args[0], x) - eval_node(*nd.args[1], x);
    case Op::conj: return std::conj(eval_node(*nd.args[0], x));
    case Op::exp: return std::exp(eval_node(*nd.args[0], x));
    case Op::log: return std::log(eval_node(*nd.args[0], x));
    case Op::abs2: return std::norm(eval_node(*nd.args[0], x));
    case Op::re: return eval_node(*nd.args[0], x).real();
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text, int base_dim, int fiber_dim) {
  Expression e;
  e.root_ = PrefixParser(text, base_dim, fiber_dim).parse();
  e.source_ = text;
  return e;
}

cplx Expression::evaluate(const CVector& x) const {
  if (!root_) throw Error(ErrorKind::invalid_argument, "empty expression");
  return eval_node(*root_, x);
}

}  // namespace bergman_lab
