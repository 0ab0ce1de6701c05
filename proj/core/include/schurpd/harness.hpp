#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "schurpd/scenario.hpp"
#include "schurpd/solver.hpp"

namespace schurpd {

struct RunOptions {
  std::optional<int> frames;
  std::optional<SolverKind> solver;
  std::optional<int> outer_iters;
  std::optional<int> inner_iters;
  std::optional<std::uint64_t> seed;
  // When false the timing columns are written as 0 so that files can be
  // compared byte for byte.
  bool timing = true;
  bool write_obj = true;
};

/// Scenario with command-line overrides applied.
Scenario apply_overrides(Scenario s, const RunOptions& options);

/// A scenario instantiated: mesh, proxies, attachments bound to nodes and a
/// ready simulator. Poses for frame f (1-based) come from the motion scripts.
class Scene {
 public:
  explicit Scene(const Scenario& scenario);

  const Scenario& scenario() const { return scenario_; }
  Simulator& simulator() { return *sim_; }
  const Simulator& simulator() const { return *sim_; }

  /// Sets the attachment targets for `frame` and returns the posed colliders.
  std::vector<Collider> pose(int frame);
  std::vector<Collider> colliders_at(int frame) const;
  std::vector<Vec3> attachment_targets(int frame) const;

  /// Builds another simulator over the same mesh with a different solver.
  std::unique_ptr<Simulator> make_simulator(const SolverConfig& config) const;

 private:
  Scenario scenario_;
  std::vector<int> attachment_group_;  // group of every attachment
  std::vector<Vec3> attachment_rest_;
  std::vector<Shape> shapes_;
  std::unique_ptr<Simulator> sim_;
};

TetMesh build_mesh(const Scenario& s);
std::vector<CollisionProxy> build_proxies(const Scenario& s, const TetMesh& mesh);

struct RunReport {
  std::string scene;
  SolverKind solver = SolverKind::kSchur;
  std::vector<FrameMetrics> frames;
  std::string config_echo;

  double total_ms() const;
  double max_penetration() const;
  double final_energy() const { return frames.empty() ? 0.0 : frames.back().energy; }
};

void write_metrics_csv(std::ostream& out, const std::vector<FrameMetrics>& frames, bool timing);
void write_summary(std::ostream& out, const RunReport& report);

/// Simulates every frame, writing frame_NNNN.obj, metrics.csv, summary.txt
/// and config.yaml into `out_dir`.
RunReport run(const Scenario& scenario, const std::filesystem::path& out_dir, const RunOptions& options = {});

struct ComparisonRow {
  int frame = 0;
  std::string solver;
  double max_rel_diff = 0.0;   // worst outer iteration, against the reference
  double solve_ms = 0.0;       // solver stage only (no assembly or detection)
  int pcg_iterations = 0;
  int pcg_iterations_to_1e3 = 0;
};

struct ComparisonReport {
  std::string scene;
  std::vector<std::string> solvers;  // solvers[0] is the reference trajectory
  std::vector<ComparisonRow> rows;

  double max_rel_diff(const std::string& solver) const;
};

/// Drives solvers[0] through the scenario and, after each of its outer
/// iterations, runs every other solver for one outer iteration from the same
/// state, comparing the updates. Writes comparison.csv and summary.txt.
ComparisonReport compare(const Scenario& scenario, const std::vector<SolverKind>& solvers,
                         const std::filesystem::path& out_dir, const RunOptions& options = {});

}  // namespace schurpd
