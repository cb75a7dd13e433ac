#include <cstdio>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "df/errors.hpp"
#include "df/linalg.hpp"
#include "df/model.hpp"
#include "df/sampling.hpp"

using df::Complex;
using df::Matrix;
namespace mod = df::model;
namespace la = df::linalg;

namespace {

// Brute-force four-index contraction, the oracle for the factored kernels:
//   T(i,j,k,l) = sum_a L_a(i,j) L_a(k,l),
//   direct(g)_ij = sum_kl T(i,j,k,l) g(l,k),
//   exchange(g)_ij = sum_kl T(i,k,l,j) g(k,l).
struct DenseTensor {
  int n;
  std::vector<Complex> t;
  explicit DenseTensor(const mod::ModelSpace& m) : n(m.dim) {
    t.assign(size_t(n) * n * n * n, Complex(0.0, 0.0));
    for (const Matrix& f : m.factors)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              at(i, j, k, l) += f(i, j) * f(k, l);
  }
  Complex& at(int i, int j, int k, int l) {
    return t[size_t(((i * n + j) * n + k)) * n + l];
  }
  Complex at(int i, int j, int k, int l) const {
    return t[size_t(((i * n + j) * n + k)) * n + l];
  }
  Matrix direct(const Matrix& g) const {
    Matrix out = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) out(i, j) += at(i, j, k, l) * g(l, k);
    return out;
  }
  Matrix exchange(const Matrix& g) const {
    Matrix out = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) out(i, j) += at(i, k, l, j) * g(k, l);
    return out;
  }
};

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()),
            std::streamsize(b.size()));
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("factored contractions match the dense four-index oracle") {
  auto m = mod::build_synthetic(101, 6, 5, 0.2, 1.5);
  DenseTensor oracle(m);
  df::sampling::Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix g = df::sampling::random_density(rng, m.dim, m.q);
    Matrix jd = mod::contract_direct(m, g);
    Matrix kd = mod::contract_exchange(m, g);
    Matrix jo = oracle.direct(g);
    Matrix ko = oracle.exchange(g);
    double scale = std::max(1.0, jo.cwiseAbs().maxCoeff());
    CHECK((jd - jo).cwiseAbs().maxCoeff() / scale < 1e-12);
    scale = std::max(1.0, ko.cwiseAbs().maxCoeff());
    CHECK((kd - ko).cwiseAbs().maxCoeff() / scale < 1e-12);
  }
}

TEST_CASE("parallel and serial contractions agree bitwise") {
  auto m = mod::build_synthetic(7, 32, 40, 0.3, 2.0);
  df::sampling::Rng rng(9);
  Matrix g = df::sampling::random_density(rng, m.dim, m.q);
  CHECK((mod::contract_direct(m, g) - mod::contract_direct_serial(m, g))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((mod::contract_exchange(m, g) - mod::contract_exchange_serial(m, g))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("direct and exchange preserve Hermiticity") {
  auto m = mod::build_synthetic(15, 10, 8, 0.25, 1.0);
  df::sampling::Rng rng(4);
  Matrix g = df::sampling::random_density(rng, m.dim, m.q);
  CHECK(la::is_hermitian(mod::contract_direct(m, g), 1e-12));
  CHECK(la::is_hermitian(mod::contract_exchange(m, g), 1e-12));
}

TEST_CASE("direct dominates exchange on positive states") {
  auto synthetic = mod::build_synthetic(16, 12, 9, 0.25, 1.5);
  mod::RadialConfig rc;
  rc.z = 5.0;
  rc.n_per_channel = 12;
  auto radial = mod::build_radial_hydrogenic(rc);
  for (const auto& m : {synthetic, radial}) {
    df::sampling::Rng rng(8);
    for (int t = 0; t < 1000; ++t) {
      Matrix a = df::sampling::random_hermitian(rng, m.dim);
      Matrix g = a * a.adjoint(); // PSD, arbitrary scale
      double jj = std::real((mod::contract_direct(m, g) * g).trace());
      double kk = std::real((mod::contract_exchange(m, g) * g).trace());
      double scale = std::max({jj, kk, 1.0});
      CHECK(kk >= -1e-12 * scale);
      CHECK(jj >= kk - 1e-10 * scale);
    }
  }
}

TEST_CASE("synthetic builder meets its normalizations exactly") {
  const double pscale = 0.31, q = 2.5, alpha = 0.01;
  auto m = mod::build_synthetic(2024, 16, 12, pscale, q, alpha);
  CHECK_NOTHROW(mod::validate_model(m));

  // ||v d^-1|| equals the requested potential scale.
  Matrix dinv = la::spectral_apply(m.d, [](double x) { return 1.0 / x; });
  CHECK(la::opnorm(m.v * dinv) == doctest::Approx(pscale).epsilon(1e-12));

  // Interaction factors are scaled so sum_a ||L_a||^2 = pi/4.
  double sum = 0.0;
  for (const Matrix& f : m.factors) {
    double s = la::opnorm_hermitian(f);
    sum += s * s;
  }
  CHECK(sum == doctest::Approx(df::kPi / 4.0).epsilon(1e-12));

  // Recorded charge makes 1 - alpha*max(q, z) match 1 - kappa exactly.
  CHECK(m.z == doctest::Approx(pscale / alpha + 2.0 * q).epsilon(1e-13));

  // Free operator has no spectrum inside (-1, 1).
  auto e = la::herm_eig(m.d);
  for (int i = 0; i < m.dim; ++i) CHECK(std::abs(e.evals[i]) >= 1.0 - 1e-12);

  // Weight really is |d|^{1/2}.
  Matrix w2 = m.weight_half * m.weight_half;
  Matrix dabs = la::spectral_apply(m.d, [](double x) { return std::abs(x); });
  CHECK((w2 - dabs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("synthetic builder is deterministic in the seed") {
  auto a = mod::build_synthetic(5, 12, 6, 0.2, 1.0);
  auto b = mod::build_synthetic(5, 12, 6, 0.2, 1.0);
  CHECK(mod::serialize_model(a) == mod::serialize_model(b));
  auto c = mod::build_synthetic(6, 12, 6, 0.2, 1.0);
  CHECK(mod::model_checksum(a) != mod::model_checksum(c));
}

TEST_CASE("synthetic builder rejects bad shapes") {
  CHECK_THROWS_AS(mod::build_synthetic(1, 3, 2, 0.2, 1.0), df::DomainError);
  CHECK_THROWS_AS(mod::build_synthetic(1, 7, 2, 0.2, 1.0), df::DomainError);
  CHECK_THROWS_AS(mod::build_synthetic(1, 8, 0, 0.2, 1.0), df::DomainError);
  CHECK_THROWS_AS(mod::build_synthetic(1, 8, 2, -0.1, 1.0), df::DomainError);
  CHECK_THROWS_AS(mod::build_synthetic(1, 8, 2, 0.2, -1.0), df::DomainError);
}

TEST_CASE("model file round-trips bit-exactly") {
  auto m = mod::build_synthetic(77, 10, 7, 0.22, 1.25);
  const std::string path = "io_roundtrip.dfm";
  mod::save_model(m, path);
  auto loaded = mod::load_model(path);
  CHECK(mod::serialize_model(loaded) == mod::serialize_model(m));
  CHECK(loaded.basis_meta == m.basis_meta);
  std::remove(path.c_str());
}

TEST_CASE("loader rejects tampered containers") {
  auto m = mod::build_synthetic(88, 8, 5, 0.2, 1.0);
  auto bytes = mod::serialize_model(m);
  const std::string path = "io_tampered.dfm";

  SUBCASE("missing file") {
    CHECK_THROWS_AS(mod::load_model("no_such_file.dfm"), df::IoError);
  }
  SUBCASE("truncated") {
    auto cut = bytes;
    cut.resize(cut.size() - 9);
    write_bytes(path, cut);
    CHECK_THROWS_AS(mod::load_model(path), df::ChecksumMismatch);
  }
  SUBCASE("flipped payload byte") {
    auto bad = bytes;
    bad[bytes.size() / 2] ^= 0x40;
    write_bytes(path, bad);
    CHECK_THROWS_AS(mod::load_model(path), df::ChecksumMismatch);
  }
  SUBCASE("wrong magic") {
    auto bad = bytes;
    bad[0] ^= 0xFF;
    write_bytes(path, bad);
    CHECK_THROWS_AS(mod::load_model(path), df::IoError);
  }
  SUBCASE("unknown schema version") {
    auto bad = bytes;
    bad[8] = 0x7F; // version field sits right after the 8-byte magic
    write_bytes(path, bad);
    CHECK_THROWS_AS(mod::load_model(path), df::SchemaMismatch);
  }
  SUBCASE("trailing garbage") {
    auto bad = bytes;
    bad.push_back(0);
    write_bytes(path, bad);
    CHECK_THROWS_AS(mod::load_model(path), df::ChecksumMismatch);
  }
  std::remove(path.c_str());
}

TEST_CASE("random densities respect the constraint set") {
  df::sampling::Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    double q = 0.5 + 3.0 * rng.uniform();
    Matrix g = df::sampling::random_density(rng, 12, q);
    CHECK(la::is_hermitian(g, 1e-12));
    auto e = la::herm_eig(g);
    CHECK(e.evals[0] >= -1e-12);
    CHECK(e.evals[11] <= 1.0 + 1e-12);
    CHECK(std::real(g.trace()) <= q + 1e-10);
  }
}

} // TEST_SUITE
