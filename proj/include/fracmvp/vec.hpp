#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracmvp {

/// Largest supported ambient dimension. The dimension itself is a runtime value.
inline constexpr int kMaxDim = 16;

/// Dense point/vector in R^n with inline storage; n is chosen at runtime.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) : n_(n) {
    if (n < 1 || n > kMaxDim) {
      throw std::invalid_argument("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    }
  }
  Vec(std::initializer_list<double> xs) : Vec(static_cast<int>(xs.size())) {
    std::copy(xs.begin(), xs.end(), data_.begin());
  }
  static Vec from(std::span<const double> xs) {
    Vec v(static_cast<int>(xs.size()));
    std::copy(xs.begin(), xs.end(), v.data_.begin());
    return v;
  }
  static Vec axis(int n, int i, double scale = 1.0) {
    Vec v(n);
    v[i] = scale;
    return v;
  }

  int dim() const { return n_; }
  double& operator[](int i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return data_[static_cast<std::size_t>(i)]; }
  double* begin() { return data_.data(); }
  double* end() { return data_.data() + n_; }
  const double* begin() const { return data_.data(); }
  const double* end() const { return data_.data() + n_; }
  std::span<const double> span() const { return {data_.data(), static_cast<std::size_t>(n_)}; }
  std::vector<double> to_vector() const { return {begin(), end()}; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n_; ++i) data_[i] += o.data_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n_; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Vec& operator*=(double a) {
    for (int i = 0; i < n_; ++i) data_[i] *= a;
    return *this;
  }
  Vec& operator/=(double a) {
    for (int i = 0; i < n_; ++i) data_[i] /= a;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  friend Vec operator*(Vec a, double k) { return a *= k; }
  friend Vec operator*(double k, Vec a) { return a *= k; }
  friend Vec operator/(Vec a, double k) { return a /= k; }
  friend bool operator==(const Vec& a, const Vec& b) {
    return a.n_ == b.n_ && std::equal(a.begin(), a.end(), b.begin());
  }

 private:
  int n_ = 0;
  std::array<double, kMaxDim> data_{};
};

inline double dot(const Vec& a, const Vec& b) {
  assert(a.dim() == b.dim());
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}
inline Vec normalized(const Vec& a) {
  const double l = norm(a);
  if (!(l > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
  return a / l;
}

/// Surface area of the unit sphere S^{n-1} (counting measure 2 for n = 1).
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Volume of the unit ball in R^n.
inline double ball_volume(int n) { return sphere_area(n) / n; }

}  // namespace fracmvp
