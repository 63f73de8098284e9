#pragma once

#include <ostream>
#include <string>

namespace darmon {

/// 2x2 matrix over a commutative ring `T`, laid out as (a b; c d).
template <class T>
struct Mat2 {
  T a, b, c, d;

  static Mat2 identity(const T& one, const T& zero) { return {one, zero, zero, one}; }

  T det() const { return a * d - b * c; }
  T trace() const { return a + d; }
  /// Adjugate (d -b; -c a); equals det * inverse.
  Mat2 adjugate() const { return {d, -b, -c, a}; }
  /// Exact inverse; T must support division by det().
  Mat2 inverse() const {
    T dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
  }

  template <class U>
  Mat2<U> cast() const {
    return {U(a), U(b), U(c), U(d)};
  }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend bool operator==(const Mat2& x, const Mat2& y) {
    return x.a == y.a && x.b == y.b && x.c == y.c && x.d == y.d;
  }
  Mat2 operator-() const { return {-a, -b, -c, -d}; }
};

template <class T>
Mat2<T> mat_pow(Mat2<T> m, unsigned long e, const T& one, const T& zero) {
  Mat2<T> r = Mat2<T>::identity(one, zero);
  while (e > 0) {
    if (e & 1) r = r * m;
    m = m * m;
    e >>= 1;
  }
  return r;
}

template <class T>
std::ostream& operator<<(std::ostream& os, const Mat2<T>& m) {
  return os << "(" << m.a << " " << m.b << "; " << m.c << " " << m.d << ")";
}

}  // namespace darmon
