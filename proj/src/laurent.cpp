#include "nhmetal/laurent.hpp"

#include <fmt/format.h>

namespace nhm {

LaurentPoly LaurentPoly::monomial(long long c, int twiceExponent) {
  LaurentPoly p;
  p.add(twiceExponent, c);
  return p;
}

void LaurentPoly::add(int key, long long c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

long long LaurentPoly::coefficient(int twiceExponent) const {
  const auto it = terms_.find(twiceExponent);
  return it == terms_.end() ? 0 : it->second;
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& o) {
  for (const auto& [k, c] : o.terms_) add(k, c);
  return *this;
}

LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& o) {
  for (const auto& [k, c] : o.terms_) add(k, -c);
  return *this;
}

LaurentPoly& LaurentPoly::operator*=(long long s) {
  if (s == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, c] : terms_) c *= s;
  return *this;
}

LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
  LaurentPoly r;
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_) r.add(ka + kb, ca * cb);
  return r;
}

LaurentPoly LaurentPoly::pow(unsigned n) const {
  LaurentPoly r = constant(1);
  for (unsigned i = 0; i < n; ++i) r = r * *this;
  return r;
}

LaurentPoly LaurentPoly::mirrored() const {
  LaurentPoly r;
  for (const auto& [k, c] : terms_) r.terms_.emplace(-k, c);
  return r;
}

LaurentPoly LaurentPoly::shifted(int twiceShift) const {
  LaurentPoly r;
  for (const auto& [k, c] : terms_) r.terms_.emplace(k + twiceShift, c);
  return r;
}

std::pair<long long, long long> LaurentPoly::evaluateAtSqrtMinusOne() const {
  long long re = 0, im = 0;
  for (const auto& [k, c] : terms_) {
    switch (((k % 4) + 4) % 4) {
      case 0: re += c; break;
      case 1: im += c; break;
      case 2: re -= c; break;
      default: im -= c; break;
    }
  }
  return {re, im};
}

std::string LaurentPoly::toString(std::string_view var) const {
  if (terms_.empty()) return "0";
  std::string out;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto [k, c] = *it;
    const long long mag = c < 0 ? -c : c;
    if (out.empty())
      out += c < 0 ? "-" : "";
    else
      out += c < 0 ? " - " : " + ";
    const std::string e = k % 2 == 0 ? fmt::format("{}", k / 2) : fmt::format("({}/2)", k);
    if (k == 0) {
      out += fmt::format("{}", mag);
    } else {
      if (mag != 1) out += fmt::format("{}*", mag);
      out += k == 2 ? std::string(var) : fmt::format("{}^{}", var, e);
    }
  }
  return out;
}

}  // namespace nhm
