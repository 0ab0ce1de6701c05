#include <benchmark/benchmark.h>

#include <numeric>

#include "schurpd/dense_spd.hpp"
#include "schurpd/solver.hpp"

using namespace schurpd;

namespace {

// Beam with a 10 x 10 cell cross-section and a fixed patch of proxies on top
// near the left end, attached at both ends.
Simulator make_beam(int cells_x, SolverKind kind) {
  constexpr double h = 0.1;
  TetMesh mesh = build_box_lattice(Vec3(cells_x * h, 1.0, 1.0), {cells_x, 10, 10});
  std::vector<Attachment> att;
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    const Vec3& p = mesh.rest_positions[i];
    if (p.x() < 1e-9 || p.x() > cells_x * h - 1e-9) att.push_back({i, p, 1e5});
  }
  const auto region = select_nodes(mesh, [](const Vec3& p) { return p.z() > 1.0 - 1e-9 && p.x() >= 0.2 && p.x() <= 2.5; });
  auto proxies = scatter_proxies(mesh, region, 1, 1e4);
  MaterialParams params;
  params.mu = 1e4;
  SolverConfig config;
  config.kind = kind;
  return Simulator(std::move(mesh), params, std::move(att), std::move(proxies), config);
}

ActiveSet half_active(const Simulator& sim) {
  const Positions x = rest_positions(sim.mesh());
  ActiveSet a = ActiveSet::empty(static_cast<Index>(sim.proxies().size()));
  for (Index j = 0; j < a.size(); j += 2) {
    a.active[j] = 1;
    a.target[j] = proxy_position(sim.mesh(), sim.proxies()[j], x) - Vec3(0, 0, 0.01);
  }
  return a;
}

void BM_PartialFactor(benchmark::State& state) {
  const Simulator sim = make_beam(static_cast<int>(state.range(0)), SolverKind::kSchur);
  const SymmetricSparse a = permute_matrix(sim.system_matrix(), sim.partition());
  for (auto _ : state) {
    benchmark::DoNotOptimize(PartialFactor::compute(a, sim.partition().n1));
  }
  state.counters["nodes"] = sim.mesh().num_nodes();
  state.counters["m"] = sim.partition().n2;
}

void BM_FullFactor(benchmark::State& state) {
  const Simulator sim = make_beam(static_cast<int>(state.range(0)), SolverKind::kFullRefactor);
  const SymmetricSparse a = sim.collision_system(half_active(sim));
  for (auto _ : state) {
    benchmark::DoNotOptimize(PartialFactor::compute(a, a.size()));
  }
  state.counters["nodes"] = sim.mesh().num_nodes();
}

void BM_ForwardBackward(benchmark::State& state) {
  const Simulator sim = make_beam(static_cast<int>(state.range(0)), SolverKind::kSchur);
  const PartialFactor& f = sim.factor();
  const Eigen::MatrixXd b1 = Eigen::MatrixXd::Random(f.n1(), 3);
  const Eigen::MatrixXd b2 = Eigen::MatrixXd::Random(f.n2(), 3);
  for (auto _ : state) {
    const auto fw = f.forward_sub(b1, b2);
    benchmark::DoNotOptimize(f.backward_sub(fw.y1, fw.y2));
  }
}

void BM_DenseUpdate(benchmark::State& state) {
  const Simulator sim = make_beam(static_cast<int>(state.range(0)), SolverKind::kSchur);
  const ActiveSet a = half_active(sim);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(sim.partition().n2, 3);
  for (auto _ : state) {
    const SymmetricSparse c22 = assemble_c22(sim.mesh(), sim.proxies(), a, sim.partition());
    benchmark::DoNotOptimize(DenseSpd::assemble(sim.factor().sigma0(), c22).solve(g));
  }
  state.counters["m"] = sim.partition().n2;
}

void BM_LocalStep(benchmark::State& state) {
  const Simulator sim = make_beam(static_cast<int>(state.range(0)), SolverKind::kSchur);
  Positions x = rest_positions(sim.mesh());
  x += 0.01 * Positions::Random(x.rows(), 3);
  std::vector<Index> all(sim.mesh().num_elements());
  std::iota(all.begin(), all.end(), 0);
  RotationCache rot = RotationCache::identity(sim.mesh().num_elements(), false);
  for (auto _ : state) {
    sim.local_step(x, all, rot);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(all.size()));
}

}  // namespace

BENCHMARK(BM_PartialFactor)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FullFactor)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardBackward)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseUpdate)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalStep)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
