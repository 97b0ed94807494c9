#include <algorithm>
#include <cctype>

#include "rgsym/expr.hpp"

namespace rgsym {

namespace {

class Parser {
 public:
  Parser(std::string_view src, const ParseOptions& opts) : src_(src), opts_(opts) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ < src_.size()) fail(std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = lhs + term();
      else if (accept('-'))
        lhs = lhs - term();
      else
        return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = lhs * unary();
      else if (accept('/'))
        lhs = lhs / unary();
      else
        return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr b = primary();
    if (accept('^')) return pow(b, unary());
    return b;
  }

  Expr number() {
    std::size_t start = pos_;
    mpz_class digits = 0;
    int scale = 0;
    bool seen_digit = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      digits = digits * 10 + (src_[pos_++] - '0');
      seen_digit = true;
    }
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits = digits * 10 + (src_[pos_++] - '0');
        --scale;
        seen_digit = true;
      }
    }
    if (!seen_digit) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      int sign = 1;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) sign = src_[pos_++] == '-' ? -1 : 1;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        int ex = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          ex = ex * 10 + (src_[pos_++] - '0');
        scale += sign * ex;
      } else {
        pos_ = save;
      }
    }
    mpz_class ten_pow;
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(scale)));
    Rational q = scale >= 0 ? Rational(digits * ten_pow) : Rational(digits, ten_pow);
    q.canonicalize();
    return num(q);
  }

  std::string identifier() {
    std::size_t start = pos_;
    if (pos_ >= src_.size() || !std::isalpha(static_cast<unsigned char>(src_[pos_]))) fail("expected identifier");
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  std::vector<std::string> split_suffix(const std::string& s) {
    std::vector<std::string> out;
    if (opts_.independents.empty()) {
      for (char c : s) out.emplace_back(1, c);
      return out;
    }
    std::size_t i = 0;
    while (i < s.size()) {
      std::size_t best = 0;
      for (const auto& v : opts_.independents)
        if (v.size() > best && s.compare(i, v.size(), v) == 0) best = v.size();
      if (best == 0) fail("unknown independent variable in jet suffix '" + s + "'");
      out.push_back(s.substr(i, best));
      i += best;
    }
    return out;
  }

  Expr diff_notation() {
    skip_ws();
    std::string base = identifier();
    std::vector<std::string> ds;
    while (accept(',')) {
      skip_ws();
      std::string v = identifier();
      int count = 1;
      skip_ws();
      std::size_t save = pos_;
      if (accept(',')) {
        skip_ws();
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          count = 0;
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            count = count * 10 + (src_[pos_++] - '0');
        } else {
          pos_ = save;
        }
      }
      for (int k = 0; k < count; ++k) ds.push_back(v);
    }
    expect(')');
    if (ds.empty()) fail("Diff needs at least one variable");
    return jet(base, ds);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (!std::isalpha(static_cast<unsigned char>(c))) fail(std::string("unexpected '") + c + "'");
    std::string id = identifier();
    if (pos_ < src_.size() && src_[pos_] == '_') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      std::string suffix(src_.substr(start, pos_ - start));
      if (suffix.empty()) fail("empty jet suffix");
      return jet(id, split_suffix(suffix));
    }
    if (accept('(')) {
      if (id == "Diff") return diff_notation();
      Expr a = expression();
      expect(')');
      if (id == "sqrt") return sqrt(a);
      static const std::pair<const char*, Fn> table[] = {
          {"exp", Fn::Exp},   {"log", Fn::Log},   {"sin", Fn::Sin},   {"cos", Fn::Cos},
          {"cosh", Fn::Cosh}, {"sinh", Fn::Sinh}, {"tanh", Fn::Tanh}, {"erf", Fn::Erf}};
      for (const auto& [n, f] : table)
        if (id == n) return call(f, a);
      fail("unknown function '" + id + "'");
    }
    return symbol(id);
  }

  std::string_view src_;
  const ParseOptions& opts_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const ParseOptions& opts) { return Parser(text, opts).run(); }

}  // namespace rgsym
