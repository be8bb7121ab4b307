#ifndef MTA_NUMERICS_HPP
#define MTA_NUMERICS_HPP

#include <cstddef>
#include <vector>

namespace mta {

using Vec = std::vector<double>;

// Dense row-major matrix. Small by construction: the largest instance in
// the artifact is the stacked-gradient matrix of the linearity probe
// (samples x input dimension).
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major, rows * cols entries

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Mat(std::size_t r, std::size_t c, std::vector<double> d);

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  Vec row(std::size_t i) const;
};

bool all_finite(const Vec& v);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double norm1(const Vec& v);
double norm_inf(const Vec& v);

Mat transpose(const Mat& m);

// Singular values of m, sorted descending. One-sided Jacobi on the thinner
// orientation; adequate up to a couple thousand rows by a few dozen columns.
std::vector<double> singular_values(const Mat& m);

}  // namespace mta

#endif  // MTA_NUMERICS_HPP
