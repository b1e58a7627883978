#include "mvb/rational.hpp"

#include <cctype>

#include "mvb/errors.hpp"

namespace mvb {

Rational::Rational(long num, long den) {
  if (den == 0) throw InvalidArgument("zero denominator");
  v_ = mpq_class(num, den);
  v_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw InvalidArgument("division by zero");
  v_ /= o.v_;
  return *this;
}

void Rational::add_product(const Rational& a, const Rational& b) {
  thread_local mpq_class tmp;
  mpq_mul(tmp.get_mpq_t(), a.v_.get_mpq_t(), b.v_.get_mpq_t());
  mpq_add(v_.get_mpq_t(), v_.get_mpq_t(), tmp.get_mpq_t());
}

static bool is_integer_text(const std::string& s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

Rational Rational::parse(const std::string& text) {
  auto slash = text.find('/');
  std::string num = text.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
  if (!is_integer_text(num) || !is_integer_text(den) || den[0] == '-' || den[0] == '+')
    throw InvalidArgument("malformed rational \"" + text + "\"");
  if (num[0] == '+') num.erase(0, 1);
  mpz_class d(den);
  if (d == 0) throw InvalidArgument("zero denominator in \"" + text + "\"");
  Rational r;
  r.v_ = mpq_class(mpz_class(num), d);
  r.v_.canonicalize();
  return r;
}

std::string Rational::str() const { return v_.get_str(); }

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

}  // namespace mvb
