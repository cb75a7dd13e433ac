#include <cmath>
#include <complex>

#include <doctest.h>

#include "df/linalg.hpp"
#include "df/sampling.hpp"

using df::Complex;
using df::Matrix;
using df::RealVector;
namespace la = df::linalg;

TEST_SUITE("linalg") {

TEST_CASE("herm_eig reproduces a known diagonalization") {
  Matrix a(2, 2);
  a << Complex(1.0, 0.0), Complex(0.0, -1.0), Complex(0.0, 1.0),
      Complex(1.0, 0.0);
  auto e = la::herm_eig(a);
  CHECK(std::abs(e.evals[0]) < 1e-14);
  CHECK(e.evals[1] == doctest::Approx(2.0));
  Matrix rec = e.vecs * e.evals.cast<Complex>().asDiagonal() * e.vecs.adjoint();
  CHECK((rec - a).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("eigenvector canonicalization is basis-rotation independent") {
  // A degenerate cluster: the projector onto the cluster subspace is the
  // invariant object, so canonicalized columns must agree no matter how the
  // degenerate block was presented.
  df::sampling::Rng rng(11);
  Matrix u = df::sampling::random_hermitian(rng, 4);
  auto eu = la::herm_eig(u);
  Matrix q = eu.vecs; // unitary
  RealVector lam(4);
  lam << -1.0, 2.0, 2.0, 5.0;
  Matrix a = q * lam.cast<Complex>().asDiagonal() * q.adjoint();
  a = la::hermitize(a);

  // Conjugate by a unitary that only mixes the degenerate pair: the operator
  // is unchanged up to roundoff, but a plain eigensolver would be free to
  // return a different basis for the cluster.  Canonicalization must not.
  Matrix mix = Matrix::Identity(4, 4);
  double c = std::cos(0.7), s = std::sin(0.7);
  mix(1, 1) = Complex(c, 0.0);
  mix(1, 2) = Complex(0.0, s);
  mix(2, 1) = Complex(0.0, s);
  mix(2, 2) = Complex(c, 0.0);
  Matrix w = q * mix * q.adjoint();
  Matrix a2 = la::hermitize(w * a * w.adjoint());
  CHECK((a2 - a).cwiseAbs().maxCoeff() < 1e-13);

  auto e1 = la::herm_eig(a);
  auto e2 = la::herm_eig(a2);
  CHECK((e1.vecs - e2.vecs).cwiseAbs().maxCoeff() < 1e-8);

  // Columns stay orthonormal and reproduce the matrix.
  Matrix gram = e1.vecs.adjoint() * e1.vecs;
  CHECK((gram - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  Matrix rec =
      e1.vecs * e1.evals.cast<Complex>().asDiagonal() * e1.vecs.adjoint();
  CHECK((rec - a).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("phase convention makes the largest entry real positive") {
  df::sampling::Rng rng(5);
  Matrix a = df::sampling::random_hermitian(rng, 6);
  auto e = la::herm_eig(a);
  for (int j = 0; j < 6; ++j) {
    int imax = 0;
    double best = -1.0;
    for (int i = 0; i < 6; ++i) {
      double m = std::abs(e.vecs(i, j));
      if (m > best * (1.0 + 1e-12)) {
        best = m;
        imax = i;
      }
    }
    Complex pivot = e.vecs(imax, j);
    CHECK(std::abs(std::imag(pivot)) < 1e-12 * best);
    CHECK(std::real(pivot) > 0.0);
  }
}

TEST_CASE("spectral_apply computes matrix functions") {
  Matrix a(2, 2);
  a << 4.0, 0.0, 0.0, 9.0;
  Matrix s = la::spectral_apply(a, [](double x) { return std::sqrt(x); });
  CHECK(std::real(s(0, 0)) == doctest::Approx(2.0));
  CHECK(std::real(s(1, 1)) == doctest::Approx(3.0));

  // Square root squared returns the operator, on a non-diagonal instance.
  df::sampling::Rng rng(17);
  Matrix h = df::sampling::random_hermitian(rng, 5);
  Matrix habs = la::spectral_apply(h, [](double x) { return std::abs(x); });
  Matrix root = la::spectral_apply(habs, [](double x) { return std::sqrt(x); });
  CHECK((root * root - habs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("norms agree with singular value oracles") {
  // 2x2 with known singular values: diag(3, -5) times a unitary.
  Matrix a(2, 2);
  a << 0.0, 3.0, -5.0, 0.0;
  CHECK(la::opnorm(a) == doctest::Approx(5.0));
  CHECK(la::trace_norm(a) == doctest::Approx(8.0));

  df::sampling::Rng rng(23);
  Matrix h = df::sampling::random_hermitian(rng, 7);
  auto e = la::herm_eig(h);
  double sum = 0.0, top = 0.0;
  for (int i = 0; i < 7; ++i) {
    sum += std::abs(e.evals[i]);
    top = std::max(top, std::abs(e.evals[i]));
  }
  CHECK(la::trace_norm_hermitian(h) == doctest::Approx(sum).epsilon(1e-11));
  CHECK(la::opnorm_hermitian(h) == doctest::Approx(top).epsilon(1e-11));
  // The generic entry points detect Hermitian input and agree.
  CHECK(la::trace_norm(h) == doctest::Approx(sum).epsilon(1e-10));
  CHECK(la::opnorm(h) == doctest::Approx(top).epsilon(1e-10));
}

TEST_CASE("triangle inequality and unitary invariance of the trace norm") {
  df::sampling::Rng rng(31);
  Matrix a = df::sampling::random_hermitian(rng, 6);
  Matrix b = df::sampling::random_hermitian(rng, 6);
  CHECK(la::trace_norm(a + b) <=
        la::trace_norm(a) + la::trace_norm(b) + 1e-10);
  auto e = la::herm_eig(b);
  Matrix u = e.vecs;
  CHECK(la::trace_norm(u * a * u.adjoint()) ==
        doctest::Approx(la::trace_norm(a)).epsilon(1e-10));
}

TEST_CASE("is_hermitian and hermitize") {
  Matrix a(2, 2);
  a << 1.0, Complex(0.0, 1e-3), Complex(0.0, 1e-3), 2.0;
  CHECK_FALSE(la::is_hermitian(a, 1e-6));
  CHECK(la::is_hermitian(la::hermitize(a), 1e-15));
}

} // TEST_SUITE
