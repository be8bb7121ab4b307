#include "mta/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include "mta/errors.hpp"

namespace mta {

Mat::Mat(std::size_t r, std::size_t c, std::vector<double> d)
    : rows(r), cols(c), data(std::move(d)) {
  if (data.size() != rows * cols)
    throw InvalidInput("Mat: entry count does not match rows*cols");
  for (double x : data)
    if (!std::isfinite(x)) throw InvalidInput("Mat: non-finite entry");
}

Vec Mat::row(std::size_t i) const {
  return Vec(data.begin() + static_cast<std::ptrdiff_t>(i * cols),
             data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
}

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

double norm1(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double norm_inf(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

Mat transpose(const Mat& m) {
  Mat t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
  return t;
}

namespace {

// One-sided Jacobi: orthogonalizes the columns of a; the final column norms
// are the singular values.
std::vector<double> jacobi_singular_values(Mat a) {
  const std::size_t n = a.cols;
  const std::size_t m = a.rows;
  const double eps = 1e-15;
  bool converged = false;
  for (int sweep = 0; sweep < 64 && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = a.at(i, p), y = a.at(i, q);
          app += x * x;
          aqq += y * y;
          apq += x * y;
        }
        if (std::fabs(apq) <= eps * std::sqrt(app * aqq)) continue;
        converged = false;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = a.at(i, p), y = a.at(i, q);
          a.at(i, p) = c * x - s * y;
          a.at(i, q) = s * x + c * y;
        }
      }
    }
  }
  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a.at(i, j) * a.at(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

}  // namespace

std::vector<double> singular_values(const Mat& m) {
  if (m.rows == 0 || m.cols == 0)
    throw InvalidInput("singular_values: empty matrix");
  // Work on the orientation with fewer columns.
  if (m.cols > m.rows) return jacobi_singular_values(transpose(m));
  return jacobi_singular_values(m);
}

}  // namespace mta
