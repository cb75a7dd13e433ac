#include "df/sampling.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "df/dfcore.hpp"

namespace df::sampling {

Matrix random_hermitian(Rng& rng, int n) {
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.cnormal();
  return 0.5 * (g + g.adjoint());
}

Matrix random_density(Rng& rng, int dim, double q) {
  const int kmax = std::max(1, std::min(dim, static_cast<int>(std::ceil(2.0 * q)) + 1));
  const int k = 1 + static_cast<int>(rng.uniform() * kmax) % kmax;
  Matrix g(dim, k);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = rng.cnormal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix frame = qr.householderQ() * Matrix::Identity(dim, k);
  RealVector occ(k);
  for (int j = 0; j < k; ++j) occ[j] = rng.uniform();
  const double total = occ.sum();
  if (total > q) occ *= q / total;
  Matrix out = Matrix::Zero(dim, dim);
  for (int j = 0; j < k; ++j)
    out += occ[j] * frame.col(j) * frame.col(j).adjoint();
  return 0.5 * (out + out.adjoint());
}

Matrix random_direction(Rng& rng, const model::ModelSpace& m) {
  Matrix h = random_hermitian(rng, m.dim);
  const double norm = core::x_norm(m, h);
  if (norm > 0.0) h /= norm;
  return h;
}

} // namespace df::sampling
