/// @file bench.hpp
/// Ready-made experiments: immersed-curve relaxation scenarios, time
/// integration runs with energy traces, stability sweeps over the time step,
/// refinement studies against a fine reference run, and a steady Stokes
/// manufactured-solution check for the fluid discretization alone.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fsi/diagnostics.hpp"
#include "fsi/mesh.hpp"
#include "fsi/schemes.hpp"

namespace fsi {

/// Initial-value problems on the unit square. Both kinds place a closed
/// curve whose rest shape is a circle; the run starts away from equilibrium
/// (stretched circle or area-matched ellipse) and relaxes through the fluid.
struct Scenario {
  enum class Kind { EllipseRelax, SteadyCircle };
  Kind kind = Kind::EllipseRelax;
  Vec2 center{0.5, 0.5};
  double a = 0.25;            ///< ellipse semi-axis x (EllipseRelax start)
  double b = 0.125;           ///< ellipse semi-axis y
  double radius = 0.2;        ///< initial circle radius (SteadyCircle start)
  double rest_radius = 0.0;   ///< rest circle; 0 picks the kind's default
  int n = 16;                 ///< fluid subdivisions per side
  int m = 0;                  ///< curve nodes; 0 means m = n

  void validate() const;
  double resolved_rest_radius() const;
  int resolved_m() const;
  FluidMesh make_fluid() const;
  SolidMesh make_solid() const;   ///< rest circle, the reference configuration
  std::vector<double> initial_displacement(const SolidMesh& smesh) const;
};

Scenario::Kind scenario_kind_from_name(const std::string& name);
const char* scenario_kind_name(Scenario::Kind k);

/// Where experiment output files go. The library formats complete file
/// contents and hands them over; sinks decide placement.
class OutputSink {
 public:
  virtual ~OutputSink() = default;
  virtual void write_file(const std::string& name, const std::string& content) = 0;
};

/// Writes into a directory, creating it first.
class DirectorySink : public OutputSink {
 public:
  explicit DirectorySink(std::string dir);
  void write_file(const std::string& name, const std::string& content) override;

 private:
  std::string dir_;
};

/// Collects files in memory; used by tests.
class MemorySink : public OutputSink {
 public:
  void write_file(const std::string& name, const std::string& content) override {
    files[name] = content;
  }
  std::map<std::string, std::string> files;
};

struct RunOptions {
  double t_end = 1.0;
  int snapshot_interval = 0;         ///< in steps; 0 disables snapshots
  double abort_factor = 1e6;         ///< abort when energy exceeds this times initial
  double stable_factor = 10.0;       ///< classification bound for sweeps
  std::string label;                 ///< suffix for output file names
  std::uint64_t config_hash = 0;     ///< stamped into every file header
};

struct RunResult {
  CoupledState final_state;
  std::vector<EnergyRecord> records;   ///< first entry is the initial state
  double initial_energy = 0.0;
  double max_energy = 0.0;
  double max_balance_defect = 0.0;
  double max_kinematic_residual = 0.0;
  double max_stage_residual = 0.0;
  bool completed = false;
  bool unstable = false;
  bool out_of_domain = false;
  std::string abort_reason;
};

/// Integrate one scenario to t_end, recording the energy trace. Writes
/// energy<label>.csv (plus a gnuplot .dat mirror) and curve snapshots when a
/// sink is given. Instability aborts the loop and flags the result instead of
/// throwing; so does the curve leaving the domain.
RunResult run_scenario(const Scenario& scenario, const SchemeConfig& cfg,
                       const RunOptions& opts, OutputSink* sink);

struct SweepRow {
  double tau = 0.0;
  bool stable = false;
  bool completed = false;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_energy = 0.0;
};

/// Run the same scenario across a ladder of time steps and classify each as
/// stable (max energy within stable_factor of the initial energy) or not.
/// Writes sweep.csv and one energy trace per step size.
std::vector<SweepRow> stability_sweep(const Scenario& scenario, const SchemeConfig& cfg,
                                      const std::vector<double>& taus, const RunOptions& opts,
                                      OutputSink* sink, int threads = 0);

/// Refinement study descriptions. Time: fixed mesh, time-step ladder against
/// a small-step reference. Space: mesh ladder at fixed time step against a
/// fine-mesh reference. Global: simultaneous ladder (n_j, tau_j) pairs.
struct StudyPlan {
  enum class Kind { Time, Space, Global };
  Kind kind = Kind::Time;
  std::vector<double> taus;
  std::vector<int> ns;
  int ref_n = 0;
  double ref_tau = 0.0;
  double t_eval = 0.0;
  Scheme ref_scheme = Scheme::Monolithic;

  void validate() const;
  std::vector<std::pair<int, double>> ladder(const Scenario& scenario) const;
};

StudyPlan::Kind study_kind_from_name(const std::string& name);
const char* study_kind_name(StudyPlan::Kind k);

struct StudyRow {
  int n = 0;
  double h = 0.0;
  double tau = 0.0;
  ErrorReport err;
  /// rates against the previous ladder point; NaN on the first row
  double rate_u = 0.0, rate_p = 0.0, rate_d = 0.0, rate_ddot = 0.0, rate_total = 0.0;
};

/// Run the ladder and the reference, measure errors at t_eval, attach rates.
/// Ladder points run in parallel (IMMERSED_FSI_THREADS or `threads` caps the
/// pool); aggregation order is fixed by ladder index, so results do not
/// depend on scheduling. Writes errors_<kind>.csv through the sink.
std::vector<StudyRow> convergence_study(const StudyPlan& plan, const Scenario& scenario,
                                        const SchemeConfig& cfg, const RunOptions& opts,
                                        OutputSink* sink, int threads = 0);

struct MmsRow {
  int n = 0;
  double h = 0.0;
  double err_u_l2 = 0.0, err_u_h1 = 0.0, err_p_l2 = 0.0;
  double rate_u_l2 = 0.0, rate_u_h1 = 0.0, rate_p_l2 = 0.0;   ///< NaN on first row
};

/// Steady Stokes with a manufactured divergence-free velocity (trigonometric
/// stream function) and zero-mean pressure on the unit square; Dirichlet
/// velocity, stabilized equal-order elements, mean-pressure pinning. Errors
/// are volume quadrature against the exact fields. Writes errors_stokes.csv
/// through the sink.
std::vector<MmsRow> stokes_mms(const std::vector<int>& ns, double mu, double gamma,
                               std::uint64_t config_hash, OutputSink* sink, int threads = 0);

/// Pool size used for ladder parallelism: `requested`, else the
/// IMMERSED_FSI_THREADS environment variable, else hardware concurrency,
/// always clamped to the job count.
int resolve_threads(int requested, int njobs);

}  // namespace fsi
