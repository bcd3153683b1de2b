#pragma once

#include <map>
#include <string>
#include <string_view>

namespace nhm {

/// Integer Laurent polynomial in one variable with half-integer exponents.
/// Exponents are stored doubled (key 3 means var^{3/2}); zero coefficients
/// are never stored.
class LaurentPoly {
 public:
  using Terms = std::map<int, long long>;

  LaurentPoly() = default;
  static LaurentPoly constant(long long c) { return monomial(c, 0); }
  static LaurentPoly monomial(long long c, int twiceExponent);

  const Terms& terms() const { return terms_; }
  bool isZero() const { return terms_.empty(); }
  long long coefficient(int twiceExponent) const;

  LaurentPoly& operator+=(const LaurentPoly& o);
  LaurentPoly& operator-=(const LaurentPoly& o);
  LaurentPoly& operator*=(long long s);
  friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
  friend LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) { return a -= b; }
  friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b);
  friend LaurentPoly operator*(LaurentPoly a, long long s) { return a *= s; }
  friend bool operator==(const LaurentPoly&, const LaurentPoly&) = default;

  LaurentPoly pow(unsigned n) const;
  /// var -> 1/var.
  LaurentPoly mirrored() const;
  /// Multiplies by var^{twiceShift/2}.
  LaurentPoly shifted(int twiceShift) const;

  /// Value with var^{1/2} = i, as a Gaussian integer (re, im).
  std::pair<long long, long long> evaluateAtSqrtMinusOne() const;

  std::string toString(std::string_view var = "t") const;

 private:
  void add(int key, long long c);
  Terms terms_;
};

}  // namespace nhm
