// Serial reference kernels against their OpenMP versions, plus whole steps at
// one thread and at the default thread count.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>
#include <numbers>

#include "xdiff/entropy.hpp"
#include "xdiff/fokker_planck.hpp"
#include "xdiff/grid.hpp"
#include "xdiff/random.hpp"
#include "xdiff/stepper.hpp"

using namespace xdiff;

namespace {

Field random_field(const PeriodicGrid& g, std::uint64_t seed) {
  Rng rng(seed);
  Field f(g.size());
  for (double& v : f) v = rng.uniform(0.5, 1.5);
  return f;
}

StateField random_state(const PeriodicGrid& g) { return {g, random_field(g, 1), random_field(g, 2)}; }

// Thread count for the "parallel" variants: 0 keeps the OpenMP default.
class Threads {
 public:
  explicit Threads(int n) : saved_(omp_get_max_threads()) {
    if (n > 0) omp_set_num_threads(n);
  }
  ~Threads() { omp_set_num_threads(saved_); }

 private:
  int saved_;
};

void BM_LaplacianSerial(benchmark::State& st) {
  const PeriodicGrid g(2, static_cast<int>(st.range(0)));
  const Field f = random_field(g, 3);
  for (auto _ : st) benchmark::DoNotOptimize(serial::laplacian(f, g));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.size()));
}

void BM_LaplacianParallel(benchmark::State& st) {
  const PeriodicGrid g(2, static_cast<int>(st.range(0)));
  const Field f = random_field(g, 3);
  for (auto _ : st) benchmark::DoNotOptimize(laplacian(f, g));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.size()));
  st.counters["threads"] = omp_get_max_threads();
}

void BM_EntropySerial(benchmark::State& st) {
  const PeriodicGrid g(2, static_cast<int>(st.range(0)));
  const StateField s = random_state(g);
  const auto p = make_entropy_params(4.5, CoefficientSpec::power(0.5));
  for (auto _ : st) benchmark::DoNotOptimize(serial::entropy_functional(s, p));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.size()));
}

void BM_EntropyParallel(benchmark::State& st) {
  const PeriodicGrid g(2, static_cast<int>(st.range(0)));
  const StateField s = random_state(g);
  const auto p = make_entropy_params(4.5, CoefficientSpec::power(0.5));
  for (auto _ : st) benchmark::DoNotOptimize(entropy_functional(s, p));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.size()));
  st.counters["threads"] = omp_get_max_threads();
}

// range(1): 1 = single thread, 0 = OpenMP default.
void BM_EntropyStep2D(benchmark::State& st) {
  const Threads t(static_cast<int>(st.range(1)));
  const PeriodicGrid g(2, static_cast<int>(st.range(0)));
  const StateField s = random_state(g);
  const auto spec = CoefficientSpec::power(0.5);
  const auto p = make_entropy_params(4.5, spec);
  SchemeConfig cfg;
  cfg.tau = 1e-4;
  cfg.m = default_regularization_order(2);
  for (auto _ : st) benchmark::DoNotOptimize(step_entropy_implicit(s, spec, p, cfg));
  st.counters["threads"] = omp_get_max_threads();
}

void BM_FPStep(benchmark::State& st) {
  const Threads t(static_cast<int>(st.range(1)));
  const auto spec = CoefficientSpec::power(0.5);
  FPField fp(FPGrid(static_cast<int>(st.range(0)), 2 * static_cast<int>(st.range(0)) + 1, 8.0),
             gaussian_density(0.5, 1.0, 0.5), {0.5, -0.5}, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(fp_step(fp, spec, 1e-5));
  st.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_LaplacianSerial)->Arg(128)->Arg(512);
BENCHMARK(BM_LaplacianParallel)->Arg(128)->Arg(512);
BENCHMARK(BM_EntropySerial)->Arg(128)->Arg(512);
BENCHMARK(BM_EntropyParallel)->Arg(128)->Arg(512);
BENCHMARK(BM_EntropyStep2D)->Args({32, 1})->Args({32, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FPStep)->Args({128, 1})->Args({128, 0})->Args({256, 1})->Args({256, 0})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
