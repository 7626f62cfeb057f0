#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kolmonet/config.hpp"
#include "kolmonet/constructor.hpp"

namespace kolmonet {

struct SweepRecord {
  Eigen::Index d = 0;
  double epsilon = 0.0;
  std::string payoff_family;
  Eigen::Index n_used = 0;
  std::int64_t param_count = 0;
  std::int64_t nonzero_param_count = 0;
  double measured_lp_error = 0.0;
  double error_stderr = 0.0;
  int attempts = 0;
  double wall_time_seconds = 0.0;
  std::uint64_t seed = 0;
  bool success = false;
};

struct AxisFit {
  bool fitted = false;
  double exponent = 0.0;
  double std_error = 0.0;
};

// Fitted and predicted scaling exponents: quantity ~ d^a * (1/eps)^b on
// log-log axes, least squares over the successful sweep cells. An axis is
// fitted only when it has at least three distinct values; when both axes
// vary the two exponents are fitted jointly.
struct ScalingFit {
  AxisFit n_vs_d;
  AxisFit n_vs_inv_eps;
  AxisFit params_vs_d;
  AxisFit params_vs_inv_eps;
  double predicted_params_d = 0.0;
  double predicted_params_inv_eps = 0.0;
  double predicted_n_d = 0.0;
  double predicted_n_inv_eps = 0.0;
};

// Configuration-to-domain translation. Shared keys: `d`, `alpha`, `beta`
// (scalar or list), `correlation` (identity | constant:<rho> | matrix file),
// `weights` (list or `equal`), `strike`, `measure` (uniform:<lo>:<hi> |
// lognormal | points:<file>), `payoff`, `p`, `T`, `epsilon`, `mode`,
// `max_attempts`, `eval_samples`, `oracle_samples`, `start_n`, `n_cap`.
BlackScholesModel model_from_config(const Config& cfg, Eigen::Index d);
Vector weights_from_config(const Config& cfg, Eigen::Index d);
MeasureSpec measure_from_config(const Config& cfg, const BlackScholesModel& model,
                                double T);
ApproximationSpec approximation_spec_from_config(const Config& cfg);

// One build per (d, epsilon) cell of `d_list` x `eps_list` (falling back to
// the scalar keys), with per-cell seeds derived from the root `seed`.
// Failures are recorded with the success flag cleared.
std::vector<SweepRecord> run_sweep(const Config& cfg, std::ostream& log);

ScalingFit fit_scaling(const std::vector<SweepRecord>& records,
                       const TheoryExponents& exponents, double growth_v = 2.0);

// Versioned CSV: header row `kolmonet-sweep-v1,...`, one row per record,
// shortest round-trip number formatting.
void write_sweep_csv(const std::vector<SweepRecord>& records, std::ostream& os);

void print_scaling_fit(const ScalingFit& fit, std::ostream& os);

// CLI entry points. Each returns a process exit status.
int cmd_build(const Config& cfg, std::ostream& os);
int cmd_price(const Config& cfg, std::ostream& os);
int cmd_sweep(const Config& cfg, std::ostream& os);
int cmd_verify(const Config& cfg, std::ostream& os);

// `kolmonet build|price|sweep|verify [suite] [--config PATH] [--key value ...]`.
int run_cli(int argc, const char* const* argv, std::ostream& os, std::ostream& err);

}  // namespace kolmonet
