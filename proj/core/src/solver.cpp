#include "schurpd/solver.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>

#include "schurpd/dense_spd.hpp"
#include "schurpd/pcg.hpp"

namespace schurpd {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string context(int inner) { return " in inner iteration " + std::to_string(inner); }

}  // namespace

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kSchur: return "schur";
    case SolverKind::kFullRefactor: return "full";
    case SolverKind::kPcg: return "pcg";
  }
  return "schur";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "schur") return SolverKind::kSchur;
  if (name == "full" || name == "full_refactor") return SolverKind::kFullRefactor;
  if (name == "pcg") return SolverKind::kPcg;
  throw ConfigError("unknown solver '" + std::string(name) + "' (expected schur, full or pcg)");
}

void SolverConfig::validate() const {
  if (outer_iters < 1) throw ConfigError("solver.outer_iters must be at least 1");
  if (inner_iters < 1) throw ConfigError("solver.inner_iters must be at least 1");
  if (!(pcg_tol >= 0.0)) throw ConfigError("solver.pcg_tol must be non-negative");
  if (pcg_max_iters < 1) throw ConfigError("solver.pcg_max_iters must be at least 1");
}

Simulator::Simulator(TetMesh mesh, MaterialParams params, std::vector<Attachment> attachments,
                     std::vector<CollisionProxy> proxies, SolverConfig config)
    : mesh_(std::move(mesh)),
      params_(params),
      attachments_(std::move(attachments)),
      proxies_(std::move(proxies)),
      config_(config) {
  params_.validate();
  config_.validate();
  for (const auto& a : attachments_) {
    if (a.node < 0 || a.node >= mesh_.num_nodes()) {
      throw InvalidArgument("attachment node " + std::to_string(a.node) + " outside the mesh");
    }
    if (!(a.stiffness > 0.0)) throw InvalidArgument("attachment stiffness must be positive");
  }
  rest_ = compute_rest_data(mesh_);
  all_elements_.resize(static_cast<std::size_t>(mesh_.num_elements()));
  std::iota(all_elements_.begin(), all_elements_.end(), 0);
  build_system();
}

void Simulator::build_system() {
  const Index n = mesh_.num_nodes();
  stiffness_ = assemble_stiffness(mesh_, rest_, params_);
  Eigen::VectorXd att = Eigen::VectorXd::Zero(n);
  for (const auto& a : attachments_) att[a.node] += a.stiffness;
  system_ = stiffness_ + SymmetricSparse::diagonal(att);

  partition_ = classify(mesh_, proxies_);
  const SymmetricSparse permuted = permute_matrix(system_, partition_);
  validate(mesh_, permuted, partition_, proxies_, false);

  if (config_.kind == SolverKind::kSchur) {
    try {
      factor_ = PartialFactor::compute(permuted, partition_.n1);
    } catch (const IndefiniteMatrix& e) {
      throw ConfigError(std::string("collision-safe block is not positive definite: ") + e.what() +
                        "; attach the mesh with springs so that it cannot float freely");
    }
  }

  Eigen::VectorXd att2 = Eigen::VectorXd::Zero(n);
  for (const auto& a : attachments_) {
    if (partition_.prone(a.node)) att2[a.node] += a.stiffness;
  }
  const SymmetricSparse beta =
      assemble_stiffness(mesh_, rest_, params_, std::span<const Index>(partition_.e_beta)) +
      SymmetricSparse::diagonal(att2);
  beta_block_ = permute_matrix(beta, partition_).block(partition_.n1, n);
}

void Simulator::set_config(const SolverConfig& config) {
  config.validate();
  const bool need_factor = config.kind == SolverKind::kSchur && factor_.n() != mesh_.num_nodes();
  config_ = config;
  if (need_factor) build_system();
}

void Simulator::set_attachment_targets(std::span<const Vec3> targets) {
  if (targets.size() != attachments_.size()) throw InvalidArgument("attachment target count mismatch");
  for (std::size_t i = 0; i < targets.size(); ++i) attachments_[i].target = targets[i];
}

SolverState Simulator::initial_state() const {
  SolverState s;
  s.x = rest_positions(mesh_);
  s.rotations = RotationCache::identity(mesh_.num_elements(), params_.biphasic());
  s.active = ActiveSet::empty(static_cast<Index>(proxies_.size()));
  s.f_tilde2 = Eigen::MatrixX3d::Zero(partition_.n2, 3);
  s.u2_accum = Eigen::MatrixX3d::Zero(partition_.n2, 3);
  return s;
}

void Simulator::local_step(const Positions& x, std::span<const Index> elements,
                           RotationCache& rotations) const {
  const bool biphasic = params_.biphasic();
  for (Index e : elements) {
    const Mat3 f = deformation_gradient(mesh_, rest_, x, e);
    rotations.r[static_cast<std::size_t>(e)] = polar_rotation(f);
    if (biphasic) rotations.q[static_cast<std::size_t>(e)] = biphasic_projection(f, params_);
  }
}

Positions Simulator::compute_forces(const Positions& x, const RotationCache& rotations,
                                    std::span<const Index> elements, std::optional<bool> prone) const {
  Positions f = Positions::Zero(mesh_.num_nodes(), 3);
  accumulate_elastic_forces(mesh_, rest_, x, rotations, params_, elements, f);
  for (const auto& a : attachments_) {
    if (prone && partition_.prone(a.node) != *prone) continue;
    f.row(a.node) -= a.stiffness * (x.row(a.node) - a.target.transpose());
  }
  return f;
}

double Simulator::attachment_energy(const Positions& x) const {
  double e = 0.0;
  for (const auto& a : attachments_) {
    e += 0.5 * a.stiffness * (x.row(a.node).transpose() - a.target).squaredNorm();
  }
  return e;
}

double Simulator::total_energy(const Positions& x, const ActiveSet& active) const {
  return corotated_energy(mesh_, rest_, x, params_) + attachment_energy(x) +
         collision_energy(mesh_, proxies_, active, x);
}

double Simulator::residual(const Positions& x, const ActiveSet& active) const {
  RotationCache fresh = RotationCache::identity(mesh_.num_elements(), params_.biphasic());
  local_step(x, all_elements_, fresh);
  Positions f = compute_forces(x, fresh, all_elements_, std::nullopt);
  accumulate_collision_forces(mesh_, proxies_, active, x, f);
  return f.norm();
}

SymmetricSparse Simulator::collision_system(const ActiveSet& active) const {
  return system_ + assemble_collision_matrix(mesh_, proxies_, active);
}

Eigen::MatrixX3d Simulator::gather2(const Positions& full) const {
  Eigen::MatrixX3d out(partition_.n2, 3);
  for (Index i = 0; i < partition_.n2; ++i) out.row(i) = full.row(partition_.node2(i));
  return out;
}

Eigen::MatrixX3d Simulator::gather1(const Positions& full) const {
  Eigen::MatrixX3d out(partition_.n1, 3);
  for (Index i = 0; i < partition_.n1; ++i) out.row(i) = full.row(partition_.order[static_cast<std::size_t>(i)]);
  return out;
}

void Simulator::outer_iteration(SolverState& state, std::span<const Collider> colliders,
                                const ActiveSet* frozen) const {
  if (config_.kind == SolverKind::kSchur) {
    outer_iteration_schur(state, colliders, frozen);
  } else {
    outer_iteration_direct(state, colliders, frozen, config_.kind == SolverKind::kPcg);
  }
}

void Simulator::outer_iteration_schur(SolverState& state, std::span<const Collider> colliders,
                                      const ActiveSet* frozen) const {
  Positions& x = state.x;
  FrameMetrics& m = state.metrics;
  const Index n1 = partition_.n1;
  const Index n2 = partition_.n2;

  // R_alpha only; R_beta is refreshed inside the inner loop.
  auto t = Clock::now();
  local_step(x, partition_.e_alpha, state.rotations);
  m.t_local_ms += elapsed_ms(t);

  t = Clock::now();
  const Positions f_alpha = compute_forces(x, state.rotations, partition_.e_alpha, false);
  const PartialFactor::Forward fw = factor_.forward_sub(gather1(f_alpha), gather2(f_alpha));
  state.f_tilde2 = fw.y2;
  state.u2_accum = Eigen::MatrixX3d::Zero(n2, 3);
  m.t_forward_ms += elapsed_ms(t);

  for (int inner = 0; inner < config_.inner_iters; ++inner) {
    t = Clock::now();
    state.active = frozen ? *frozen : detect(mesh_, proxies_, x, colliders);
    m.t_detect_ms += elapsed_ms(t);

    t = Clock::now();
    local_step(x, partition_.e_beta, state.rotations);
    m.t_local_ms += elapsed_ms(t);

    t = Clock::now();
    // g = f~2 + f2(beta) + f2(col), all in x2 numbering.
    Eigen::MatrixX3d g = state.f_tilde2;
    for (Index e : partition_.e_beta) {
      const Mat3 f = deformation_gradient(mesh_, rest_, x, e);
      const Mat3 p = piola_stress(f, state.rotations.r[static_cast<std::size_t>(e)],
                                  state.rotations.q_of(e), params_);
      const auto fe = element_forces(mesh_, rest_, e, p);
      const auto& tet = mesh_.tets[static_cast<std::size_t>(e)];
      for (int a = 0; a < 4; ++a) g.row(partition_.local2(tet[a])) += fe[static_cast<std::size_t>(a)].transpose();
    }
    for (const auto& a : attachments_) {
      const Index local = partition_.local2(a.node);
      if (local >= 0) g.row(local) -= a.stiffness * (x.row(a.node) - a.target.transpose());
    }
    for (std::size_t j = 0; j < proxies_.size(); ++j) {
      if (!state.active.active[j]) continue;
      const auto& proxy = proxies_[j];
      const Vec3 spring = -proxy.stiffness * (proxy_position(mesh_, proxy, x) - state.active.target[j]);
      const auto& tet = mesh_.tets[static_cast<std::size_t>(proxy.element)];
      for (int a = 0; a < 4; ++a) {
        const double w = proxy.weights[static_cast<std::size_t>(a)];
        if (w != 0.0) g.row(partition_.local2(tet[a])) += w * spring.transpose();
      }
    }
    const SymmetricSparse c22 = assemble_c22(mesh_, proxies_, state.active, partition_);

    Eigen::MatrixX3d u2;
    const auto t_dense = Clock::now();
    try {
      const DenseSpd h = DenseSpd::assemble(factor_.sigma0(), c22);
      u2 = h.solve(g);
    } catch (const IndefiniteMatrix& e) {
      throw IndefiniteMatrix(e.what() + context(inner), e.column());
    }
    m.t_dense_ms += elapsed_ms(t_dense);
    ++m.linear_solves;

    for (Index i = 0; i < n2; ++i) x.row(partition_.node2(i)) += u2.row(i);
    // Only the alpha part of the reduced operator acts on f~2.
    state.f_tilde2 -= factor_.sigma0() * u2 - beta_block_.multiply(u2);
    state.u2_accum += u2;
  }

  t = Clock::now();
  const Eigen::MatrixXd u1 = factor_.backward_sub(fw.y1, state.u2_accum);
  for (Index i = 0; i < n1; ++i) x.row(partition_.order[static_cast<std::size_t>(i)]) += u1.row(i);
  m.t_backward_ms += elapsed_ms(t);
}

void Simulator::outer_iteration_direct(SolverState& state, std::span<const Collider> colliders,
                                       const ActiveSet* frozen, bool use_pcg) const {
  Positions& x = state.x;
  FrameMetrics& m = state.metrics;
  const Index n = mesh_.num_nodes();

  auto t = Clock::now();
  local_step(x, partition_.e_alpha, state.rotations);
  m.t_local_ms += elapsed_ms(t);

  for (int inner = 0; inner < config_.inner_iters; ++inner) {
    t = Clock::now();
    state.active = frozen ? *frozen : detect(mesh_, proxies_, x, colliders);
    m.t_detect_ms += elapsed_ms(t);

    t = Clock::now();
    local_step(x, partition_.e_beta, state.rotations);
    m.t_local_ms += elapsed_ms(t);

    Positions f = compute_forces(x, state.rotations, all_elements_, std::nullopt);
    accumulate_collision_forces(mesh_, proxies_, state.active, x, f);
    const SymmetricSparse a = collision_system(state.active);

    t = Clock::now();
    Eigen::MatrixXd dx(n, 3);
    if (use_pcg) {
      const Eigen::VectorXd diag = a.diagonal_values();
      const LinearOperator apply = [&a](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        a.multiply_add(in, out);
      };
      for (int c = 0; c < 3; ++c) {
        PcgResult r;
        try {
          r = pcg(apply, f.col(c), diag, config_.pcg_tol, config_.pcg_max_iters);
        } catch (const IndefiniteMatrix& e) {
          throw IndefiniteMatrix(e.what() + context(inner), e.column());
        }
        dx.col(c) = r.x;
        m.pcg_iterations += r.iterations;
        const int to_1e3 = r.iterations_to_1e3 < 0 ? r.iterations : r.iterations_to_1e3;
        m.pcg_iterations_to_1e3 = std::max(m.pcg_iterations_to_1e3, to_1e3);
      }
    } else {
      try {
        const PartialFactor full = PartialFactor::compute(a, n);
        const PartialFactor::Forward fw = full.forward_sub(f, Eigen::MatrixXd(0, 3));
        dx = full.backward_sub(fw.y1, Eigen::MatrixXd(0, 3));
      } catch (const IndefiniteMatrix& e) {
        throw IndefiniteMatrix(e.what() + context(inner), e.column());
      }
    }
    m.t_dense_ms += elapsed_ms(t);
    ++m.linear_solves;
    x += dx;
  }
}

void Simulator::solve_frame(SolverState& state, std::span<const Collider> colliders) const {
  state.metrics = FrameMetrics{};
  const auto start = Clock::now();
  ActiveSet frozen;
  if (config_.freeze_detection) {
    const auto t = Clock::now();
    frozen = detect(mesh_, proxies_, state.x, colliders);
    state.metrics.t_detect_ms += elapsed_ms(t);
  }
  for (int outer = 0; outer < config_.outer_iters; ++outer) {
    std::optional<SolverState> before;
    if (hook_) before = state;
    try {
      outer_iteration(state, colliders, config_.freeze_detection ? &frozen : nullptr);
    } catch (const IndefiniteMatrix& e) {
      throw IndefiniteMatrix(std::string(e.what()) + " at outer iteration " + std::to_string(outer),
                             e.column());
    }
    if (hook_) hook_(outer, *before, state);
  }
  state.metrics.t_total_ms = elapsed_ms(start);
  state.metrics.active_proxies = state.active.count();
  state.metrics.max_penetration = max_penetration(mesh_, proxies_, state.x, colliders);
  state.metrics.energy = total_energy(state.x, state.active);
  state.metrics.residual = residual(state.x, state.active);
}

}  // namespace schurpd
