// Timing comparison of the serial and parallel interaction contractions.
// Usage: bench_contract [dim] [rank] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "df/model.hpp"
#include "df/sampling.hpp"

namespace {

template <typename F>
double time_call(F&& f, int reps, df::Matrix& sink) {
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) sink += f();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

} // namespace

int main(int argc, char** argv) {
  int dim = argc > 1 ? std::atoi(argv[1]) : 128;
  int rank = argc > 2 ? std::atoi(argv[2]) : 96;
  int reps = argc > 3 ? std::atoi(argv[3]) : 10;
  if (dim < 4 || rank < 1 || reps < 1) {
    std::fprintf(stderr, "usage: bench_contract [dim>=4] [rank>=1] [reps>=1]\n");
    return 1;
  }
  dim += dim % 2;

  auto m = df::model::build_synthetic(42, dim, rank, 0.25, 2.0);
  df::sampling::Rng rng(7);
  df::Matrix gamma = df::sampling::random_density(rng, m.dim, m.q);
  df::Matrix sink = df::Matrix::Zero(m.dim, m.dim);

  double tds = time_call([&] { return df::model::contract_direct_serial(m, gamma); },
                         reps, sink);
  double tdp = time_call([&] { return df::model::contract_direct(m, gamma); },
                         reps, sink);
  double tes = time_call([&] { return df::model::contract_exchange_serial(m, gamma); },
                         reps, sink);
  double tep = time_call([&] { return df::model::contract_exchange(m, gamma); },
                         reps, sink);

  double dd = (df::model::contract_direct(m, gamma) -
               df::model::contract_direct_serial(m, gamma))
                  .cwiseAbs()
                  .maxCoeff();
  double de = (df::model::contract_exchange(m, gamma) -
               df::model::contract_exchange_serial(m, gamma))
                  .cwiseAbs()
                  .maxCoeff();

  std::printf("dim=%d rank=%d reps=%d\n", dim, rank, reps);
  std::printf("%-10s %12s %12s %8s\n", "kernel", "serial [s]", "parallel [s]",
              "speedup");
  std::printf("%-10s %12.6f %12.6f %8.2f\n", "direct", tds, tdp, tds / tdp);
  std::printf("%-10s %12.6f %12.6f %8.2f\n", "exchange", tes, tep, tes / tep);
  std::printf("max |parallel - serial|: direct %.3e, exchange %.3e\n", dd, de);
  return (dd == 0.0 && de == 0.0) ? 0 : 1;
}
