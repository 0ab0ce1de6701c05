#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schurpd/collision.hpp"
#include "schurpd/common.hpp"
#include "schurpd/material.hpp"
#include "schurpd/mesh.hpp"
#include "schurpd/partial_cholesky.hpp"
#include "schurpd/partition.hpp"
#include "schurpd/sparse_matrix.hpp"

namespace schurpd {

/// Zero-rest-length spring pulling `node` towards `target`.
struct Attachment {
  Index node = 0;
  Vec3 target = Vec3::Zero();
  double stiffness = 1.0;
};

enum class SolverKind { kSchur, kFullRefactor, kPcg };

std::string_view to_string(SolverKind kind);
SolverKind parse_solver_kind(std::string_view name);

struct SolverConfig {
  int outer_iters = 1;
  int inner_iters = 1;
  SolverKind kind = SolverKind::kSchur;
  double pcg_tol = 1e-10;
  int pcg_max_iters = 10000;
  // Detect once at the start of each frame instead of every inner iteration.
  bool freeze_detection = false;

  void validate() const;
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct FrameMetrics {
  double t_local_ms = 0.0;
  double t_forward_ms = 0.0;
  double t_detect_ms = 0.0;
  double t_dense_ms = 0.0;  // dense Schur solve, or the whole global solve for the baselines
  double t_backward_ms = 0.0;
  double t_total_ms = 0.0;
  double energy = 0.0;
  Index active_proxies = 0;
  double max_penetration = 0.0;
  double residual = 0.0;
  int linear_solves = 0;
  int pcg_iterations = 0;        // summed over the frame
  int pcg_iterations_to_1e3 = 0; // worst solve of the frame
};

struct SolverState {
  Positions x;
  RotationCache rotations;
  ActiveSet active;
  Eigen::MatrixX3d f_tilde2;  // reduced x2 right-hand side, m x 3
  Eigen::MatrixX3d u2_accum;  // x2 correction accumulated over the current outer pass
  FrameMetrics metrics;
};

/// Projective Dynamics quasistatic solver. The system matrix K + attachments
/// is built and partially factored once; per frame only attachment targets and
/// collider poses change.
class Simulator {
 public:
  /// Called after every outer iteration with the states before and after it.
  using OuterHook = std::function<void(int outer, const SolverState& before, const SolverState& after)>;

  Simulator(TetMesh mesh, MaterialParams params, std::vector<Attachment> attachments,
            std::vector<CollisionProxy> proxies, SolverConfig config);

  const TetMesh& mesh() const { return mesh_; }
  const RestData& rest() const { return rest_; }
  const MaterialParams& params() const { return params_; }
  const SolverConfig& config() const { return config_; }
  const Partition& partition() const { return partition_; }
  const PartialFactor& factor() const { return factor_; }
  const std::vector<Attachment>& attachments() const { return attachments_; }
  std::span<const CollisionProxy> proxies() const { return proxies_; }
  /// K + attachment diagonal, original node order.
  const SymmetricSparse& system_matrix() const { return system_; }
  const SymmetricSparse& stiffness() const { return stiffness_; }

  void set_config(const SolverConfig& config);
  void set_attachment_targets(std::span<const Vec3> targets);
  void set_outer_hook(OuterHook hook) { hook_ = std::move(hook); }

  SolverState initial_state() const;

  /// Runs `outer_iters` outer iterations and fills the frame metrics.
  void solve_frame(SolverState& state, std::span<const Collider> colliders) const;

  /// One outer iteration with the configured solver. With `frozen` set, that
  /// active set replaces detection.
  void outer_iteration(SolverState& state, std::span<const Collider> colliders,
                       const ActiveSet* frozen = nullptr) const;
  void outer_iteration_schur(SolverState& state, std::span<const Collider> colliders,
                             const ActiveSet* frozen) const;
  void outer_iteration_direct(SolverState& state, std::span<const Collider> colliders,
                              const ActiveSet* frozen, bool use_pcg) const;

  void local_step(const Positions& x, std::span<const Index> elements, RotationCache& rotations) const;

  /// Elastic forces of `elements` plus attachment forces on nodes of the
  /// requested class (collision-prone when `prone` is true; all when empty).
  Positions compute_forces(const Positions& x, const RotationCache& rotations,
                           std::span<const Index> elements, std::optional<bool> prone) const;

  double attachment_energy(const Positions& x) const;
  /// Corotated elastic energy with fresh projections, plus attachments and
  /// collisions against the given (frozen) active set.
  double total_energy(const Positions& x, const ActiveSet& active) const;
  /// Norm of the total force with fresh projections and the given active set.
  double residual(const Positions& x, const ActiveSet& active) const;

  /// K + attachments + W^T C W for the given active set, original order.
  SymmetricSparse collision_system(const ActiveSet& active) const;

 private:
  void build_system();
  Eigen::MatrixX3d gather2(const Positions& full) const;
  Eigen::MatrixX3d gather1(const Positions& full) const;

  TetMesh mesh_;
  RestData rest_;
  MaterialParams params_;
  std::vector<Attachment> attachments_;
  std::vector<CollisionProxy> proxies_;
  SolverConfig config_;
  Partition partition_;
  std::vector<Index> all_elements_;
  SymmetricSparse stiffness_;
  SymmetricSparse system_;
  PartialFactor factor_;
  SymmetricSparse beta_block_;  // beta stiffness + x2 attachments in x2 numbering
  OuterHook hook_;
};

}  // namespace schurpd
