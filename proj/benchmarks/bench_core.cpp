#include <random>

#include <benchmark/benchmark.h>

#include "bwshare/alloc.hpp"
#include "bwshare/cone.hpp"
#include "bwshare/ctmc.hpp"
#include "bwshare/fluid.hpp"
#include "bwshare/model.hpp"
#include "bwshare/multipath.hpp"
#include "bwshare/srbm.hpp"

namespace {

using namespace bwshare;

NetworkSpec Linear(std::size_t J, double alpha, double load) {
  const auto I = static_cast<Eigen::Index>(J) + 1;
  return LinearNetwork(J, Vec::Constant(I, load), Vec::Ones(I), Vec::Ones(I), alpha,
                       Vec::Ones(static_cast<Eigen::Index>(J)));
}

void BM_Allocate(benchmark::State& state) {
  const auto J = static_cast<std::size_t>(state.range(0));
  const NetworkSpec spec = Linear(J, static_cast<double>(state.range(1)), 0.4);
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> count(0, 20);
  std::vector<Vec> states(64, Vec(spec.A.cols()));
  for (auto& n : states) {
    for (Eigen::Index i = 0; i < n.size(); ++i) n[i] = count(gen);
    n[0] += 1;
  }
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Allocate(spec, states[k++ % states.size()]).lambda);
  }
}
BENCHMARK(BM_Allocate)->ArgsProduct({{2, 4, 8}, {1, 2}});

void BM_LiftSolve(benchmark::State& state) {
  const NetworkSpec spec = Linear(static_cast<std::size_t>(state.range(0)), 2.0, 0.5);
  const Vec w = Vec::LinSpaced(spec.A.rows(), 1.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(LiftDelta(spec, w));
}
BENCHMARK(BM_LiftSolve)->Arg(2)->Arg(4)->Arg(8);

void BM_SimulateEvents(benchmark::State& state) {
  const NetworkSpec spec = Linear(2, 1.0, 0.4);
  SimulateOptions o;
  o.record = false;
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  for (auto _ : state) {
    events += Simulate(spec, Counts::Zero(3), 1e4, ++seed, o).events;
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events),
                                                  benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateEvents)->Unit(benchmark::kMillisecond);

void BM_SrbmSteps(benchmark::State& state) {
  const ConeGeometry g = BuildGeometry(Linear(2, 1.0, 0.5), Vec::Constant(2, -1.0));
  SrbmOptions o;
  o.record = false;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SimulateSrbm(g, Vec::Zero(2), 10.0, 1e-3, ++seed, o).final_Q);
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_SrbmSteps)->Unit(benchmark::kMillisecond);

void BM_ProjectMultipath(benchmark::State& state) {
  MultipathSpec s;
  s.H = Mat::Zero(3, 5);
  s.H(0, 0) = s.H(0, 1) = s.H(1, 2) = s.H(1, 3) = s.H(2, 4) = 1;
  s.Abar = Mat::Zero(4, 5);
  s.Abar(0, 0) = s.Abar(0, 2) = s.Abar(1, 1) = s.Abar(1, 3) = 1;
  s.Abar(2, 0) = s.Abar(2, 4) = s.Abar(3, 1) = s.Abar(3, 4) = 1;
  s.Cbar = (Vec(4) << 3, 4, 1, 1).finished();
  for (auto _ : state) benchmark::DoNotOptimize(Project(s).A);
}
BENCHMARK(BM_ProjectMultipath);

}  // namespace

BENCHMARK_MAIN();
