#include <vector>

#include "df/errors.hpp"
#include "df/model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace df::model {

namespace {

constexpr int kBlock = 8;

void check_dims(const ModelSpace& m, const Matrix& gamma, const char* who) {
  if (gamma.rows() != m.dim || gamma.cols() != m.dim)
    throw DimensionMismatch(std::string(who) + ": density has wrong shape");
}

} // namespace

// The factor terms are computed independently (possibly in parallel) and
// accumulated in fixed factor order, so the floating-point result is
// identical for any thread count.

Matrix contract_direct(const ModelSpace& m, const Matrix& gamma) {
  check_dims(m, gamma, "contract_direct");
  const int rank = static_cast<int>(m.factors.size());
  Matrix acc = Matrix::Zero(m.dim, m.dim);
  std::vector<double> coeff(kBlock);
  for (int base = 0; base < rank; base += kBlock) {
    const int nb = std::min(kBlock, rank - base);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int t = 0; t < nb; ++t)
      coeff[t] = (m.factors[base + t] * gamma).trace().real();
    for (int t = 0; t < nb; ++t) acc += coeff[t] * m.factors[base + t];
  }
  return acc;
}

Matrix contract_exchange(const ModelSpace& m, const Matrix& gamma) {
  check_dims(m, gamma, "contract_exchange");
  const int rank = static_cast<int>(m.factors.size());
  Matrix acc = Matrix::Zero(m.dim, m.dim);
  std::vector<Matrix> term(kBlock);
  for (int base = 0; base < rank; base += kBlock) {
    const int nb = std::min(kBlock, rank - base);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int t = 0; t < nb; ++t)
      term[t] = m.factors[base + t] * gamma * m.factors[base + t];
    for (int t = 0; t < nb; ++t) acc += term[t];
  }
  return acc;
}

Matrix contract_direct_serial(const ModelSpace& m, const Matrix& gamma) {
  check_dims(m, gamma, "contract_direct_serial");
  Matrix acc = Matrix::Zero(m.dim, m.dim);
  for (const Matrix& l : m.factors) acc += (l * gamma).trace().real() * l;
  return acc;
}

Matrix contract_exchange_serial(const ModelSpace& m, const Matrix& gamma) {
  check_dims(m, gamma, "contract_exchange_serial");
  Matrix acc = Matrix::Zero(m.dim, m.dim);
  for (const Matrix& l : m.factors) acc += l * gamma * l;
  return acc;
}

} // namespace df::model
