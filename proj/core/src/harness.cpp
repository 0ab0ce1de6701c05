#include "schurpd/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>

namespace schurpd {

namespace {

std::string format(const char* fmt, double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), fmt, v);
  return buffer;
}

std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

std::string frame_file(int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%04d.obj", frame);
  return name;
}

}  // namespace

Scenario apply_overrides(Scenario s, const RunOptions& options) {
  if (options.frames) s.frames = *options.frames;
  if (options.solver) s.solver.kind = *options.solver;
  if (options.outer_iters) s.solver.outer_iters = *options.outer_iters;
  if (options.inner_iters) s.solver.inner_iters = *options.inner_iters;
  if (options.seed) s.seed = *options.seed;
  s.validate();
  return s;
}

TetMesh build_mesh(const Scenario& s) {
  if (const auto* tg = std::get_if<TetgenSpec>(&s.mesh)) {
    return load_tetgen_files(s.base_dir / tg->node_file, s.base_dir / tg->ele_file);
  }
  const auto& spec = std::get<LatticeSpec>(s.mesh);
  TetMesh mesh = build_box_lattice(spec.extent, spec.cells);
  if (spec.jitter > 0.0) {
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const Vec3 cell = spec.extent.cwiseQuotient(Vec3(spec.cells[0], spec.cells[1], spec.cells[2]));
    for (auto& p : mesh.rest_positions) {
      bool interior = true;
      for (int a = 0; a < 3; ++a) {
        const double tol = 1e-9 * spec.extent[a];
        if (p[a] < tol || p[a] > spec.extent[a] - tol) interior = false;
      }
      // Draw for every node so the sequence does not depend on the boundary test.
      const Vec3 offset(unit(rng), unit(rng), unit(rng));
      if (interior) p += spec.jitter * offset.cwiseProduct(cell);
    }
  }
  return mesh;
}

std::vector<CollisionProxy> build_proxies(const Scenario& s, const TetMesh& mesh) {
  if (!s.proxies) return {};
  const double stiffness = s.proxies->stiffness.value_or(10.0 * s.material.mu * mean_edge_length(mesh));
  const Region region = s.proxies->region;
  try {
    return scatter_proxies(mesh, select_nodes(mesh, [&](const Vec3& p) { return region.contains(p); }),
                           s.proxies->per_element, stiffness);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("proxies.region: ") + e.what());
  }
}

Scene::Scene(const Scenario& scenario) : scenario_(scenario) {
  TetMesh mesh = build_mesh(scenario_);
  std::vector<Attachment> attachments;
  for (std::size_t g = 0; g < scenario_.attachments.size(); ++g) {
    const auto& group = scenario_.attachments[g];
    const std::size_t before = attachments.size();
    for (Index v = 0; v < mesh.num_nodes(); ++v) {
      const Vec3& p = mesh.rest_positions[static_cast<std::size_t>(v)];
      if (!group.region.contains(p)) continue;
      attachments.push_back({v, p, group.stiffness});
      attachment_group_.push_back(static_cast<int>(g));
      attachment_rest_.push_back(p);
    }
    if (attachments.size() == before) {
      throw ConfigError("attachments." + group.name + ".region selects no nodes");
    }
  }
  for (const auto& c : scenario_.colliders) {
    shapes_.push_back(std::visit(
        [&](const auto& spec) -> Shape {
          using T = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<T, LevelsetFileSpec>) {
            return std::make_shared<const GridLevelset>(GridLevelset::load(scenario_.base_dir / spec.file));
          } else if constexpr (std::is_same_v<T, BoxSdfSpec>) {
            return std::make_shared<const GridLevelset>(
                GridLevelset::sample_box(spec.min, spec.max, spec.spacing, spec.padding));
          } else {
            return spec;
          }
        },
        c.shape));
  }
  std::vector<CollisionProxy> proxies = build_proxies(scenario_, mesh);
  sim_ = std::make_unique<Simulator>(std::move(mesh), scenario_.material, std::move(attachments),
                                     std::move(proxies), scenario_.solver);
}

std::unique_ptr<Simulator> Scene::make_simulator(const SolverConfig& config) const {
  return std::make_unique<Simulator>(sim_->mesh(), sim_->params(), sim_->attachments(),
                                     std::vector<CollisionProxy>(sim_->proxies().begin(), sim_->proxies().end()),
                                     config);
}

std::vector<Vec3> Scene::attachment_targets(int frame) const {
  std::vector<RigidTransform> poses;
  for (const auto& g : scenario_.attachments) poses.push_back(g.motion.at(frame));
  std::vector<Vec3> targets(attachment_rest_.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    targets[i] = poses[static_cast<std::size_t>(attachment_group_[i])].apply(attachment_rest_[i]);
  }
  return targets;
}

std::vector<Collider> Scene::colliders_at(int frame) const {
  std::vector<Collider> out;
  for (std::size_t i = 0; i < scenario_.colliders.size(); ++i) {
    const auto& spec = scenario_.colliders[i];
    Collider c;
    c.shape = shapes_[i];
    c.transform = spec.motion.at(frame);
    if (!spec.follow.empty()) {
      for (const auto& g : scenario_.attachments) {
        if (g.name == spec.follow) c.transform = g.motion.at(frame) * c.transform;
      }
    }
    c.enabled = frame >= spec.enable_frame && frame < spec.disable_frame;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Collider> Scene::pose(int frame) {
  const auto targets = attachment_targets(frame);
  sim_->set_attachment_targets(targets);
  return colliders_at(frame);
}

// ---------------------------------------------------------------------------
// Reports

double RunReport::total_ms() const {
  double t = 0.0;
  for (const auto& f : frames) t += f.t_total_ms;
  return t;
}

double RunReport::max_penetration() const {
  double d = 0.0;
  for (const auto& f : frames) d = std::max(d, f.max_penetration);
  return d;
}

void write_metrics_csv(std::ostream& out, const std::vector<FrameMetrics>& frames, bool timing) {
  out << "frame,t_local_ms,t_forward_ms,t_detect_ms,t_dense_ms,t_backward_ms,t_total_ms,energy,"
         "active_proxies,max_penetration,residual\r\n";
  auto t = [&](double ms) { return timing ? format("%.3f", ms) : std::string("0"); };
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    out << i + 1 << ',' << t(f.t_local_ms) << ',' << t(f.t_forward_ms) << ',' << t(f.t_detect_ms) << ','
        << t(f.t_dense_ms) << ',' << t(f.t_backward_ms) << ',' << t(f.t_total_ms) << ','
        << format("%.17g", f.energy) << ',' << f.active_proxies << ',' << format("%.17g", f.max_penetration)
        << ',' << format("%.17g", f.residual) << "\r\n";
  }
}

void write_summary(std::ostream& out, const RunReport& report) {
  out << "scene " << report.scene << '\n';
  out << "solver " << to_string(report.solver) << '\n';
  out << "frames " << report.frames.size() << '\n';
  out << "final_energy " << format("%.17g", report.final_energy()) << '\n';
  out << "max_penetration " << format("%.17g", report.max_penetration()) << '\n';
}

RunReport run(const Scenario& input, const std::filesystem::path& out_dir, const RunOptions& options) {
  const Scenario scenario = apply_overrides(input, options);
  std::filesystem::create_directories(out_dir);
  Scene scene(scenario);
  Simulator& sim = scene.simulator();
  SolverState state = sim.initial_state();

  RunReport report;
  report.scene = scenario.name;
  report.solver = scenario.solver.kind;
  report.config_echo = scenario_to_yaml(scenario);

  for (int frame = 1; frame <= scenario.frames; ++frame) {
    const auto colliders = scene.pose(frame);
    try {
      sim.solve_frame(state, colliders);
    } catch (const Error& e) {
      throw Error("frame " + std::to_string(frame) + ": " + e.what());
    }
    report.frames.push_back(state.metrics);
    if (options.write_obj) {
      auto obj = open_output(out_dir / frame_file(frame));
      write_obj(obj, sim.mesh(), state.x);
    }
  }

  {
    auto csv = open_output(out_dir / "metrics.csv");
    write_metrics_csv(csv, report.frames, options.timing);
  }
  {
    auto summary = open_output(out_dir / "summary.txt");
    write_summary(summary, report);
    if (options.timing) summary << "total_ms " << format("%.3f", report.total_ms()) << '\n';
  }
  {
    auto echo = open_output(out_dir / "config.yaml");
    echo << report.config_echo;
  }
  return report;
}

double ComparisonReport::max_rel_diff(const std::string& solver) const {
  double d = 0.0;
  for (const auto& r : rows) {
    if (r.solver == solver) d = std::max(d, r.max_rel_diff);
  }
  return d;
}

ComparisonReport compare(const Scenario& input, const std::vector<SolverKind>& solvers,
                         const std::filesystem::path& out_dir, const RunOptions& options) {
  if (solvers.size() < 2) throw ConfigError("compare needs at least two solvers");
  RunOptions ref_options = options;
  ref_options.solver = solvers.front();
  const Scenario scenario = apply_overrides(input, ref_options);
  std::filesystem::create_directories(out_dir);

  Scene scene(scenario);
  Simulator& ref = scene.simulator();
  std::vector<std::unique_ptr<Simulator>> others;
  for (std::size_t k = 1; k < solvers.size(); ++k) {
    SolverConfig config = scenario.solver;
    config.kind = solvers[k];
    others.push_back(scene.make_simulator(config));
  }

  ComparisonReport report;
  report.scene = scenario.name;
  for (SolverKind k : solvers) report.solvers.emplace_back(to_string(k));

  std::vector<Collider> colliders;
  ActiveSet frozen;
  std::vector<ComparisonRow> pending(others.size());
  ref.set_outer_hook([&](int, const SolverState& before, const SolverState& after) {
    const Positions delta_ref = after.x - before.x;
    // Updates at round-off level are measured against the configuration size.
    const double scale = std::max(delta_ref.norm(), 1e-9 * before.x.norm());
    for (std::size_t k = 0; k < others.size(); ++k) {
      SolverState s = before;
      s.metrics = FrameMetrics{};
      others[k]->outer_iteration(s, colliders, scenario.solver.freeze_detection ? &frozen : nullptr);
      const double diff = (s.x - after.x).norm();
      const double rel = scale > 0.0 ? diff / scale : diff;
      auto& row = pending[k];
      row.max_rel_diff = std::max(row.max_rel_diff, rel);
      row.solve_ms += s.metrics.t_forward_ms + s.metrics.t_dense_ms + s.metrics.t_backward_ms;
      row.pcg_iterations += s.metrics.pcg_iterations;
      row.pcg_iterations_to_1e3 = std::max(row.pcg_iterations_to_1e3, s.metrics.pcg_iterations_to_1e3);
    }
  });

  SolverState state = ref.initial_state();
  for (int frame = 1; frame <= scenario.frames; ++frame) {
    colliders = scene.pose(frame);
    const auto targets = scene.attachment_targets(frame);
    for (auto& o : others) o->set_attachment_targets(targets);
    if (scenario.solver.freeze_detection) frozen = detect(ref.mesh(), ref.proxies(), state.x, colliders);
    for (std::size_t k = 0; k < others.size(); ++k) {
      pending[k] = ComparisonRow{};
      pending[k].frame = frame;
      pending[k].solver = report.solvers[k + 1];
    }
    try {
      ref.solve_frame(state, colliders);
    } catch (const Error& e) {
      throw Error("frame " + std::to_string(frame) + ": " + e.what());
    }
    ComparisonRow row;
    row.frame = frame;
    row.solver = report.solvers.front();
    row.solve_ms = state.metrics.t_forward_ms + state.metrics.t_dense_ms + state.metrics.t_backward_ms;
    row.pcg_iterations = state.metrics.pcg_iterations;
    row.pcg_iterations_to_1e3 = state.metrics.pcg_iterations_to_1e3;
    report.rows.push_back(row);
    for (const auto& p : pending) report.rows.push_back(p);
  }

  {
    auto csv = open_output(out_dir / "comparison.csv");
    csv << "frame,solver,max_rel_diff,solve_ms,pcg_iterations,pcg_iterations_to_1e3\r\n";
    for (const auto& r : report.rows) {
      csv << r.frame << ',' << r.solver << ',' << format("%.6e", r.max_rel_diff) << ','
          << (options.timing ? format("%.3f", r.solve_ms) : std::string("0")) << ',' << r.pcg_iterations << ','
          << r.pcg_iterations_to_1e3 << "\r\n";
    }
  }
  {
    auto summary = open_output(out_dir / "summary.txt");
    summary << "scene " << report.scene << '\n';
    summary << "reference " << report.solvers.front() << '\n';
    std::map<std::string, double> total_ms;
    std::map<std::string, int> worst_1e3;
    for (const auto& r : report.rows) {
      total_ms[r.solver] += r.solve_ms;
      worst_1e3[r.solver] = std::max(worst_1e3[r.solver], r.pcg_iterations_to_1e3);
    }
    for (const auto& name : report.solvers) {
      summary << name << " max_rel_diff " << format("%.6e", report.max_rel_diff(name));
      if (options.timing) summary << " solve_ms " << format("%.3f", total_ms[name]);
      if (name == "pcg") summary << " max_iterations_to_1e-3 " << worst_1e3[name];
      summary << '\n';
    }
  }
  return report;
}

}  // namespace schurpd
