// Serial reference against OpenMP for each data-parallel kernel.

#include <benchmark/benchmark.h>

#include "bfssd/kernels.hpp"

using namespace bfssd;

namespace {

Matrix random_points(int n, int d) {
  RngStream rng(1);
  Matrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

template <bool Parallel>
void BM_QuadraticForm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const kernels::PackedSymmetric k(kernels::rbf_gram(random_points(n, 8), 1.0));
  const Vector a = random_points(n, 1).col(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? kernels::quadratic_form(k, a) : kernels::quadratic_form_serial(k, a));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * (n + 1) / 2);
}

template <bool Parallel>
void BM_RbfGram(benchmark::State& state) {
  const Matrix pts = random_points(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) {
    Matrix k = Parallel ? kernels::rbf_gram(pts, 1.0) : kernels::rbf_gram_serial(pts, 1.0);
    benchmark::DoNotOptimize(k.data());
  }
}

template <bool Parallel>
void BM_ComponentMean(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix z = random_points(n, 50);
  std::vector<std::function<double(const Vector&)>> comps;
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) {
    comps.push_back([row = Vector(z.row(i).transpose())](const Vector& x) {
      const double r = row.dot(x) - 1.0;
      return 0.5 * r * r;
    });
    all[i] = i;
  }
  const Vector x = Vector::Constant(50, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? kernels::component_mean(comps, all, x)
                                      : kernels::component_mean_serial(comps, all, x));
  }
}

}  // namespace

BENCHMARK(BM_QuadraticForm<false>)->Name("quadratic_form/serial")->Arg(500)->Arg(1000)->Arg(4000);
BENCHMARK(BM_QuadraticForm<true>)->Name("quadratic_form/openmp")->Arg(500)->Arg(1000)->Arg(4000);
BENCHMARK(BM_RbfGram<false>)->Name("rbf_gram/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_RbfGram<true>)->Name("rbf_gram/openmp")->Arg(500)->Arg(2000);
BENCHMARK(BM_ComponentMean<false>)->Name("component_mean/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_ComponentMean<true>)->Name("component_mean/openmp")->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
