// Serial reference vs OpenMP kernels on the Laplace-Beltrami operator of a Schwarzschild member.
// Grid half-extent is the reference box; the benchmark argument is 1/h.
#include <benchmark/benchmark.h>

#include <array>

#include "pmt/elliptic.hpp"
#include "pmt/kernels.hpp"
#include "pmt/metric_family.hpp"
#include "pmt/parallel.hpp"

using namespace pmt;

namespace {

struct Setup {
  LaplaceBeltrami op;
  Field u, out;
};

Setup make_setup(int inv_h) {
  const MetricGrid grid = build_metric_grid(build_conformal_factor(0.2, 0.5, {}), GridSpec(1.0 / inv_h, 12.0));
  Setup s{assemble_laplace_beltrami(grid), {}, {}};
  s.u.resize(grid.spec.size());
  for (std::size_t i = 0; i < s.u.size(); ++i) s.u[i] = grid.spec.position(i)[0] + 0.1 * grid.phi[i];
  s.out.assign(s.u.size(), 0.0);
  return s;
}

template <bool Omp>
void BM_apply_stencil(benchmark::State& state) {
  Setup s = make_setup(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Omp)
      kernels::omp::apply_stencil(s.op.spec, s.op.weights, s.u, s.out);
    else
      kernels::serial::apply_stencil(s.op.spec, s.op.weights, s.u, s.out);
    benchmark::DoNotOptimize(s.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.u.size()));
  state.counters["threads"] = Omp ? max_threads() : 1;
}

template <bool Omp>
void BM_gradient_hessian(benchmark::State& state) {
  Setup s = make_setup(static_cast<int>(state.range(0)));
  std::array<Field, 3> grad;
  std::array<Field, 6> hess;
  for (auto _ : state) {
    if constexpr (Omp) {
      kernels::omp::gradient(s.op.spec, s.u, grad);
      kernels::omp::hessian(s.op.spec, s.u, grad, hess);
    } else {
      kernels::serial::gradient(s.op.spec, s.u, grad);
      kernels::serial::hessian(s.op.spec, s.u, grad, hess);
    }
    benchmark::DoNotOptimize(hess[0].data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.u.size()));
  state.counters["threads"] = Omp ? max_threads() : 1;
}

template <bool Omp>
void BM_dot(benchmark::State& state) {
  Setup s = make_setup(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const double d = Omp ? kernels::omp::dot(s.u, s.u) : kernels::serial::dot(s.u, s.u);
    benchmark::DoNotOptimize(d);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.u.size()));
  state.counters["threads"] = Omp ? max_threads() : 1;
}

}  // namespace

BENCHMARK(BM_apply_stencil<false>)->Name("apply_stencil/serial")->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_stencil<true>)->Name("apply_stencil/omp")->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gradient_hessian<false>)->Name("gradient_hessian/serial")->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gradient_hessian<true>)->Name("gradient_hessian/omp")->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dot<false>)->Name("dot/serial")->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dot<true>)->Name("dot/omp")->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
