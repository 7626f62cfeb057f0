#include "kolmonet/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "kolmonet/verify.hpp"

namespace kolmonet {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

Vector vector_param(const Config& cfg, const std::string& key, Eigen::Index d,
                    double fallback) {
  if (!cfg.has(key)) return Vector::Constant(d, fallback);
  const std::vector<double> list = cfg.get_list(key);
  if (list.size() == 1) return Vector::Constant(d, list[0]);
  if (static_cast<Eigen::Index>(list.size()) != d)
    throw std::invalid_argument("config: key '" + key + "' needs 1 or " +
                                std::to_string(d) + " entries, got " +
                                std::to_string(list.size()));
  return Eigen::Map<const Vector>(list.data(), d);
}

Matrix load_matrix_file(const std::string& path, Eigen::Index d) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("config: cannot open correlation file '" + path + "'");
  Matrix B(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (!(in >> B(i, j)))
        throw std::runtime_error("config: correlation file '" + path +
                                 "' needs " + std::to_string(d * d) + " numbers");
  return B;
}

PointCloud load_point_file(const std::string& path, Eigen::Index d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open point file '" + path + "'");
  std::vector<double> coords;
  std::vector<double> weights;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::vector<double> nums;
    double v = 0.0;
    while (row >> v) nums.push_back(v);
    if (nums.empty()) continue;
    if (static_cast<Eigen::Index>(nums.size()) != d + 1)
      throw std::runtime_error("config: point file '" + path + "' line " +
                               std::to_string(line_no) + ": expected " +
                               std::to_string(d) + " coordinates plus a weight");
    coords.insert(coords.end(), nums.begin(), nums.end() - 1);
    weights.push_back(nums.back());
  }
  const Eigen::Index m = static_cast<Eigen::Index>(weights.size());
  if (m < 1)
    throw std::runtime_error("config: point file '" + path + "' is empty");
  PointCloud cloud;
  cloud.points.resize(m, d);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      cloud.points(i, j) = coords[static_cast<std::size_t>(i * d + j)];
  cloud.weights = Eigen::Map<const Vector>(weights.data(), m);
  return cloud;
}

PayoffFamily family_from_config(const Config& cfg) {
  const std::string fam = cfg.get_string("payoff");
  const auto parsed = parse_payoff_family(fam);
  if (!parsed)
    throw std::invalid_argument("config: unknown payoff family '" + fam + "'");
  return *parsed;
}

std::uint64_t cell_seed(std::uint64_t root, Eigen::Index d, double eps,
                        PayoffFamily family) {
  std::uint64_t id = stream_tag("sweep/cell");
  id = stream_mix(id, root);
  id = stream_mix(id, static_cast<std::uint64_t>(d));
  id = stream_mix(id, eps);
  id = stream_mix(id, static_cast<std::uint64_t>(family));
  return id;
}

SweepRecord record_from(const BuildReport& report, const ApproximationSpec& spec,
                        std::uint64_t seed) {
  SweepRecord rec;
  rec.d = spec.model.dim();
  rec.epsilon = spec.epsilon;
  rec.payoff_family = std::string(payoff_family_name(spec.family));
  rec.n_used = report.n_used;
  rec.param_count = report.param_count;
  rec.nonzero_param_count = report.nonzero_param_count;
  rec.measured_lp_error = report.measured_lp_error;
  rec.error_stderr = report.error_stderr;
  rec.attempts = report.attempts;
  rec.wall_time_seconds = report.wall_time_seconds;
  rec.seed = seed;
  rec.success = report.success;
  return rec;
}

AxisFit make_axis(double exponent, double std_error) {
  AxisFit f;
  f.fitted = true;
  f.exponent = exponent;
  f.std_error = std_error;
  return f;
}

void print_axis(std::ostream& os, const std::string& label, const AxisFit& fit,
                double predicted) {
  os << "  " << label << ": ";
  if (fit.fitted)
    os << fmt(fit.exponent) << " +- " << fmt(fit.std_error);
  else
    os << "not fitted (needs at least 3 distinct axis values)";
  os << " (predicted " << fmt(predicted) << ")\n";
}

}  // namespace

BlackScholesModel model_from_config(const Config& cfg, Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("config: d must be at least 1");
  Vector alpha = vector_param(cfg, "alpha", d, 0.0);
  Vector beta = vector_param(cfg, "beta", d, 0.2);
  const std::string corr = cfg.get_string("correlation", "identity");
  if (corr == "identity") return make_model(std::move(alpha), std::move(beta));
  if (corr.rfind("constant:", 0) == 0) {
    double rho = 0.0;
    const std::string_view tail = std::string_view(corr).substr(9);
    const auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), rho);
    if (ec != std::errc{} || p != tail.data() + tail.size())
      throw std::invalid_argument("config: correlation '" + corr +
                                  "' has a malformed rho");
    return make_model(std::move(alpha), std::move(beta),
                      equicorrelation_factor(d, rho));
  }
  return make_model(std::move(alpha), std::move(beta), load_matrix_file(corr, d));
}

Vector weights_from_config(const Config& cfg, Eigen::Index d) {
  const std::string raw = cfg.get_string("weights", "equal");
  if (raw == "equal") return Vector::Constant(d, 1.0 / static_cast<double>(d));
  const std::vector<double> list = cfg.get_list("weights");
  if (list.size() == 1 && d > 1) return Vector::Constant(d, list[0]);
  if (static_cast<Eigen::Index>(list.size()) != d)
    throw std::invalid_argument("config: key 'weights' needs 'equal', 1, or " +
                                std::to_string(d) + " entries");
  return Eigen::Map<const Vector>(list.data(), d);
}

MeasureSpec measure_from_config(const Config& cfg, const BlackScholesModel& model,
                                double T) {
  const std::string m = cfg.get_string("measure", "uniform:0:1");
  if (m == "lognormal")
    return LognormalTerminal{model, T, Vector::Ones(model.dim())};
  if (m.rfind("uniform:", 0) == 0) {
    const std::string rest = m.substr(8);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("config: measure '" + m +
                                  "' must be uniform:<lo>:<hi>");
    UniformBox box;
    box.d = model.dim();
    double lo = 0.0;
    double hi = 0.0;
    const std::string lo_s = rest.substr(0, colon);
    const std::string hi_s = rest.substr(colon + 1);
    const auto [p1, e1] = std::from_chars(lo_s.data(), lo_s.data() + lo_s.size(), lo);
    const auto [p2, e2] = std::from_chars(hi_s.data(), hi_s.data() + hi_s.size(), hi);
    if (e1 != std::errc{} || p1 != lo_s.data() + lo_s.size() || e2 != std::errc{} ||
        p2 != hi_s.data() + hi_s.size())
      throw std::invalid_argument("config: measure '" + m +
                                  "' has malformed bounds");
    box.lo = lo;
    box.hi = hi;
    return box;
  }
  if (m.rfind("points:", 0) == 0)
    return load_point_file(m.substr(7), model.dim());
  throw std::invalid_argument(
      "config: measure must be uniform:<lo>:<hi>, lognormal, or points:<path>, got '" +
      m + "'");
}

ApproximationSpec approximation_spec_from_config(const Config& cfg) {
  ApproximationSpec spec;
  const Eigen::Index d = cfg.get_int("d", 1);
  spec.model = model_from_config(cfg, d);
  spec.T = cfg.get_real("T", 1.0);
  spec.family = family_from_config(cfg);
  spec.weights = weights_from_config(cfg, d);
  spec.strike = cfg.get_real("strike", 1.0);
  spec.p = cfg.get_real("p", 2.0);
  spec.epsilon = cfg.get_real("epsilon", 0.1);
  spec.measure = measure_from_config(cfg, spec.model, spec.T);
  const std::string mode = cfg.get_string("mode", "empirical");
  if (mode == "theory")
    spec.mode = BuildMode::Theory;
  else if (mode == "empirical")
    spec.mode = BuildMode::Empirical;
  else
    throw std::invalid_argument("config: mode must be theory or empirical, got '" +
                                mode + "'");
  spec.max_attempts = static_cast<int>(cfg.get_int("max_attempts", 24));
  spec.eval_samples = cfg.get_int("eval_samples", 1024);
  spec.oracle_samples = cfg.get_int("oracle_samples", 1'000'000);
  spec.start_n = cfg.get_int("start_n", 32);
  spec.n_cap = cfg.get_int("n_cap", Eigen::Index{1} << 20);
  return spec;
}

std::vector<SweepRecord> run_sweep(const Config& cfg, std::ostream& log) {
  const std::uint64_t root = cfg.get_uint("seed");
  std::vector<double> d_list;
  if (cfg.has("d_list"))
    d_list = cfg.get_list("d_list");
  else
    d_list.push_back(static_cast<double>(cfg.get_int("d", 1)));
  std::vector<double> eps_list;
  if (cfg.has("eps_list"))
    eps_list = cfg.get_list("eps_list");
  else
    eps_list.push_back(cfg.get_real("epsilon", 0.1));

  std::vector<SweepRecord> records;
  for (const double d_raw : d_list) {
    const Eigen::Index d = static_cast<Eigen::Index>(d_raw);
    if (d < 1 || static_cast<double>(d) != d_raw)
      throw std::invalid_argument("config: d_list entries must be positive integers");
    for (const double eps : eps_list) {
      Config cell = cfg;
      cell.set("d", std::to_string(d));
      cell.set("epsilon", fmt(eps));
      const PayoffFamily family = family_from_config(cell);
      const std::uint64_t seed = cell_seed(root, d, eps, family);
      SweepRecord rec;
      try {
        const ApproximationSpec spec = approximation_spec_from_config(cell);
        const BuildResult result =
            build_approximator(spec, theory_exponents_for(spec.family), seed);
        rec = record_from(result.report, spec, seed);
      } catch (const std::exception& ex) {
        rec.d = d;
        rec.epsilon = eps;
        rec.payoff_family = std::string(payoff_family_name(family));
        rec.seed = seed;
        rec.success = false;
        log << "cell d=" << d << " epsilon=" << fmt(eps) << " failed: " << ex.what()
            << "\n";
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

ScalingFit fit_scaling(const std::vector<SweepRecord>& records,
                       const TheoryExponents& e, double growth_v) {
  ScalingFit fit;
  fit.predicted_params_d = (5.0 + e.zz) * e.theta + e.z + e.w * e.zz;
  fit.predicted_params_inv_eps = 4.0 + e.zz;
  fit.predicted_n_d = 2.0 * growth_v * e.theta;
  fit.predicted_n_inv_eps = 2.0;

  std::vector<const SweepRecord*> rows;
  for (const SweepRecord& r : records)
    if (r.success && r.n_used > 0 && r.param_count > 0) rows.push_back(&r);
  std::set<Eigen::Index> d_values;
  std::set<double> eps_values;
  for (const SweepRecord* r : rows) {
    d_values.insert(r->d);
    eps_values.insert(r->epsilon);
  }
  const bool include_d = d_values.size() >= 2;
  const bool include_e = eps_values.size() >= 2;
  const bool report_d = d_values.size() >= 3;
  const bool report_e = eps_values.size() >= 3;
  if (!report_d && !report_e) return fit;

  const Eigen::Index N = static_cast<Eigen::Index>(rows.size());
  const int k = 1 + (include_d ? 1 : 0) + (include_e ? 1 : 0);
  if (N <= k) return fit;
  Matrix X(N, k);
  Vector yn(N);
  Vector yp(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    int col = 0;
    X(i, col++) = 1.0;
    if (include_d) X(i, col++) = std::log(static_cast<double>(rows[i]->d));
    if (include_e) X(i, col++) = std::log(1.0 / rows[i]->epsilon);
    yn[i] = std::log(static_cast<double>(rows[i]->n_used));
    yp[i] = std::log(static_cast<double>(rows[i]->param_count));
  }
  const Matrix xtx = X.transpose() * X;
  const Matrix xtx_inv = xtx.ldlt().solve(Matrix::Identity(k, k));
  const auto solve = [&](const Vector& y) {
    const Vector beta = xtx_inv * (X.transpose() * y);
    const Vector resid = y - X * beta;
    const double dof = static_cast<double>(N - k);
    const double s2 = resid.squaredNorm() / dof;
    return std::pair<Vector, Vector>(beta, (s2 * xtx_inv.diagonal()).cwiseMax(0.0).cwiseSqrt());
  };
  const auto [bn, sn] = solve(yn);
  const auto [bp, sp] = solve(yp);
  int col = 1;
  if (include_d) {
    if (report_d) {
      fit.n_vs_d = make_axis(bn[col], sn[col]);
      fit.params_vs_d = make_axis(bp[col], sp[col]);
    }
    ++col;
  }
  if (include_e && report_e) {
    fit.n_vs_inv_eps = make_axis(bn[col], sn[col]);
    fit.params_vs_inv_eps = make_axis(bp[col], sp[col]);
  }
  return fit;
}

void write_sweep_csv(const std::vector<SweepRecord>& records, std::ostream& os) {
  os << "kolmonet-sweep-v1,d,epsilon,payoff_family,n_used,param_count,"
        "nonzero_param_count,measured_lp_error,error_stderr,attempts,"
        "wall_time_seconds,seed,success\n";
  int row = 0;
  for (const SweepRecord& r : records) {
    os << row++ << ',' << r.d << ',' << fmt(r.epsilon) << ',' << r.payoff_family
       << ',' << r.n_used << ',' << r.param_count << ',' << r.nonzero_param_count
       << ',' << fmt(r.measured_lp_error) << ',' << fmt(r.error_stderr) << ','
       << r.attempts << ',' << fmt(r.wall_time_seconds) << ',' << r.seed << ','
       << (r.success ? 1 : 0) << '\n';
  }
}

void print_scaling_fit(const ScalingFit& fit, std::ostream& os) {
  os << "scaling fit (log-log least squares over successful cells):\n";
  print_axis(os, "n ~ d^a, a", fit.n_vs_d, fit.predicted_n_d);
  print_axis(os, "n ~ (1/eps)^b, b", fit.n_vs_inv_eps, fit.predicted_n_inv_eps);
  print_axis(os, "params ~ d^a, a", fit.params_vs_d, fit.predicted_params_d);
  print_axis(os, "params ~ (1/eps)^b, b", fit.params_vs_inv_eps,
             fit.predicted_params_inv_eps);
}

int cmd_build(const Config& cfg, std::ostream& os) {
  const std::uint64_t seed = cfg.get_uint("seed");
  const ApproximationSpec spec = approximation_spec_from_config(cfg);
  const BuildResult result =
      build_approximator(spec, theory_exponents_for(spec.family), seed);
  const BuildReport& report = result.report;
  if (report.executed) {
    const std::string out = cfg.get_string("out", "psi.ann");
    save_network(result.psi, std::filesystem::path(out));
    os << "network written to " << out << "\n";
  } else {
    os << "build not executed: certified channel count " << fmt(report.theory_n)
       << " exceeds the cap " << spec.n_cap << "; a-priori error bound "
       << fmt(report.apriori_bound) << "\n";
  }
  write_sweep_csv({record_from(report, spec, seed)}, os);
  if (report.executed && !report.success)
    os << "build failed: best shared-set error " << fmt(report.best_paired_error)
       << " vs target " << fmt(spec.epsilon) << " after " << report.attempts
       << " attempts\n";
  return report.success ? 0 : 1;
}

int cmd_price(const Config& cfg, std::ostream& os) {
  const std::vector<double> xs = cfg.get_list("x");
  const Eigen::Index d = static_cast<Eigen::Index>(xs.size());
  const Vector x = Eigen::Map<const Vector>(xs.data(), d);
  const bool both = cfg.get_bool("both", false);
  const bool have_net = cfg.has("net");

  double net_value = 0.0;
  bool net_done = false;
  if (have_net) {
    const Network psi = load_network(std::filesystem::path(cfg.get_string("net")));
    if (psi.input_dim() != d)
      throw std::invalid_argument("price: point has dimension " + std::to_string(d) +
                                  " but the network expects " +
                                  std::to_string(psi.input_dim()));
    net_value = realize(psi, x);
    net_done = true;
  }
  double oracle_value = 0.0;
  bool oracle_done = false;
  if (!have_net || both) {
    const BlackScholesModel model = model_from_config(cfg, d);
    const PriceOracle oracle(family_from_config(cfg), weights_from_config(cfg, d),
                             cfg.get_real("strike", 1.0), model,
                             cfg.get_real("T", 1.0),
                             OracleConfig{cfg.get_int("oracle_samples", 1'000'000),
                                          kOracleSeed});
    oracle_value = oracle.price(x);
    oracle_done = true;
  }
  if (net_done && oracle_done)
    os << "network " << fmt(net_value) << "\noracle " << fmt(oracle_value)
       << "\ndifference " << fmt(net_value - oracle_value) << "\n";
  else
    os << fmt(net_done ? net_value : oracle_value) << "\n";
  return 0;
}

int cmd_sweep(const Config& cfg, std::ostream& os) {
  const std::vector<SweepRecord> records = run_sweep(cfg, os);
  const std::string out = cfg.get_string("out", "sweep.csv");
  {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("sweep: cannot write '" + out + "'");
    write_sweep_csv(records, f);
  }
  os << "wrote " << records.size() << " rows to " << out << "\n";
  if (records.size() < 2) {
    os << "note: single cell, no scaling fit\n";
    return 0;
  }
  print_scaling_fit(
      fit_scaling(records, theory_exponents_for(family_from_config(cfg))), os);
  return 0;
}

int cmd_verify(const Config& cfg, std::ostream& os) {
  const std::string suite = cfg.get_string("suite", "all");
  if (suite != "core" && suite != "sde" && suite != "mc" && suite != "e2e" &&
      suite != "all")
    throw std::invalid_argument("verify: unknown suite '" + suite +
                                "' (core, sde, mc, e2e, all)");
  const std::uint64_t seed = cfg.get_uint("seed", kVerifySeed);
  std::vector<CheckResult> results;
  const auto append = [&results](std::vector<CheckResult> batch) {
    for (CheckResult& r : batch) results.push_back(std::move(r));
  };
  if (suite == "core" || suite == "all") append(verify_core(seed));
  if (suite == "sde" || suite == "all") append(verify_sde(seed));
  if (suite == "mc" || suite == "all") append(verify_mc(seed));
  if (suite == "e2e" || suite == "all") append(verify_e2e(seed));

  std::size_t passed = 0;
  for (const CheckResult& r : results) {
    os << (r.pass ? "[ ok ] " : "[FAIL] ") << r.name << " (" << fmt(r.seconds)
       << "s)";
    if (!r.detail.empty()) os << ": " << r.detail;
    os << "\n";
    if (r.pass) ++passed;
  }
  os << "passed " << passed << "/" << results.size() << " checks\n";
  return passed == results.size() ? 0 : 1;
}

int run_cli(int argc, const char* const* argv, std::ostream& os, std::ostream& err) {
  static constexpr const char* kUsage =
      "usage: kolmonet build|price|sweep|verify [suite] [--config PATH] "
      "[--key value ...]\n";
  if (argc < 2) {
    err << kUsage;
    return 2;
  }
  const std::string cmd = argv[1];
  if (cmd != "build" && cmd != "price" && cmd != "sweep" && cmd != "verify") {
    err << "unknown command '" << cmd << "'\n" << kUsage;
    return 2;
  }
  std::string config_path;
  std::string suite;
  std::vector<std::pair<std::string, std::string>> overrides;
  int i = 2;
  if (cmd == "verify" && i < argc && argv[i][0] != '-') suite = argv[i++];
  for (; i < argc; i += 2) {
    std::string key = argv[i];
    if (key.rfind("--", 0) != 0 || key.size() <= 2 || i + 1 >= argc) {
      err << kUsage;
      return 2;
    }
    key = key.substr(2);
    if (key == "config")
      config_path = argv[i + 1];
    else
      overrides.emplace_back(key, argv[i + 1]);
  }
  try {
    Config cfg = config_path.empty()
                     ? Config{}
                     : Config::from_file(std::filesystem::path(config_path));
    if (!suite.empty()) cfg.set("suite", suite);
    for (auto& [key, value] : overrides) cfg.set(key, std::move(value));
    if (cmd == "build") return cmd_build(cfg, os);
    if (cmd == "price") return cmd_price(cfg, os);
    if (cmd == "sweep") return cmd_sweep(cfg, os);
    return cmd_verify(cfg, os);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace kolmonet
