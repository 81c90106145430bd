#pragma once

// Experiment drivers: local-error order fits, Dirac-GAN norm growth,
// stability prediction against rollouts, and deterministic CSV/JSON output.

#include "driftlab/core.hpp"
#include "driftlab/drift.hpp"
#include "driftlab/games.hpp"
#include "driftlab/integrators.hpp"
#include "driftlab/regularizers.hpp"
#include "driftlab/stability.hpp"

#include "json.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace driftlab {

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Order fits

struct OrderFit {
  std::vector<double> h_values;  ///< strictly decreasing
  std::vector<double> errors;    ///< stacked 2-norm
  std::vector<double> phi_errors;
  std::vector<double> theta_errors;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

enum class Reference { OriginalFlow, ModifiedFlow };

inline const char* to_string(Reference r) {
  return r == Reference::OriginalFlow ? "original" : "modified";
}

/// h_max, h_max * ratio, ... (`points` values).
inline std::vector<double> geometric_grid(double h_max, int points, double ratio = 0.5) {
  if (!(h_max > 0.0) || points < 1 || !(ratio > 0.0 && ratio < 1.0)) {
    throw ContractViolation("geometric_grid: need h_max > 0, points >= 1, 0 < ratio < 1");
  }
  std::vector<double> grid;
  double h = h_max;
  for (int i = 0; i < points; ++i) {
    grid.push_back(h);
    h *= ratio;
  }
  return grid;
}

/// Least-squares line through (log h, log error).
inline OrderFit fit_order(std::vector<double> h_values, std::vector<double> errors) {
  if (h_values.size() != errors.size() || h_values.size() < 4) {
    throw ContractViolation("fit_order: need at least 4 (h, error) pairs");
  }
  const double floor = 1e2 * std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!std::isfinite(errors[i]) || errors[i] < floor) {
      std::ostringstream os;
      os << "fit_order: error " << errors[i] << " at h = " << h_values[i]
         << " is at or below round-off; the grid is too fine";
      throw DegenerateFit(os.str());
    }
    if (i > 0 && !(h_values[i] < h_values[i - 1])) {
      throw ContractViolation("fit_order: h values must be strictly decreasing");
    }
  }
  const auto n = static_cast<double>(errors.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    sx += std::log(h_values[i]);
    sy += std::log(errors[i]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double dx = std::log(h_values[i]) - mx;
    const double dy = std::log(errors[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  OrderFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.h_values = std::move(h_values);
  fit.errors = std::move(errors);
  return fit;
}

/// One-step discrepancies for a family of step sizes. `discrete(h)` and
/// `reference(h)` return the two states to compare.
inline OrderFit local_error_order(const std::function<JointState(double)>& discrete,
                                  const std::function<JointState(double)>& reference,
                                  const std::vector<double>& h_grid) {
  std::vector<double> errors, phi_errors, theta_errors;
  for (double h : h_grid) {
    const JointState a = discrete(h);
    const JointState b = reference(h);
    errors.push_back((a.stacked() - b.stacked()).norm());
    phi_errors.push_back((a.phi.values() - b.phi.values()).norm());
    theta_errors.push_back((a.theta.values() - b.theta.values()).norm());
  }
  OrderFit fit = fit_order(h_grid, errors);
  fit.phi_errors = std::move(phi_errors);
  fit.theta_errors = std::move(theta_errors);
  return fit;
}

/// Local error of one step of `scheme` against the flow of the original or the
/// modified field. Each player is compared with the flow run for its own
/// effective step: phi after alpha h and theta after lambda h.
inline OrderFit local_error_order(const GameDefinition& game, const Scheme& scheme,
                                  Reference reference, const JointState& state0,
                                  const StepSizes& rates_template, const std::vector<double>& h_grid,
                                  int substeps = kDefaultFlowSubsteps) {
  game.check_state(state0);
  const JointField original = game.field();
  auto discrete = [&](double h) {
    return step(original, scheme, state0, rates_template.with_h(h));
  };
  auto ref = [&](double h) {
    const StepSizes rates = rates_template.with_h(h);
    const JointField field = reference == Reference::OriginalFlow
                                 ? original
                                 : modified_field(game, scheme, rates).as_field();
    return flow_per_player(field, state0, rates.phi_rate(), rates.theta_rate(), substeps);
  };
  return local_error_order(discrete, ref, h_grid);
}

// ---------------------------------------------------------------------------
// Dirac-GAN norm growth

/// d(phi^2 + theta^2)/dt along the simultaneous-update modified flow:
/// h (alpha phi^2 + lambda theta^2) l'^2 + (lambda - alpha) h phi theta (theta^2 - phi^2) l' l''.
inline double dirac_growth_rate(double phi, double theta, const StepSizes& rates,
                                const DiracLossProfile& profile = DiracLossProfile::saturating()) {
  const double z = theta * phi;
  const double d1 = profile.dl(z);
  const double d2 = profile.d2l(z);
  return rates.h * ((rates.alpha * phi * phi + rates.lambda * theta * theta) * d1 * d1 +
                    (rates.lambda - rates.alpha) * phi * theta * (theta * theta - phi * phi) * d1 *
                        d2);
}

/// Central difference in time of phi^2 + theta^2 along the flow of `field`.
inline double norm_sq_rate_fd(const JointField& field, const JointState& state, double dt = 1e-3,
                              int substeps = 4) {
  const double ahead = flow(field, state, dt, substeps).stacked().squaredNorm();
  const double behind = flow(field, state, -dt, substeps).stacked().squaredNorm();
  return (ahead - behind) / (2.0 * dt);
}

struct DiracNormGrowth {
  std::vector<double> norm_sq;        ///< phi^2 + theta^2 of the simultaneous iterates
  std::vector<double> analytic_rate;  ///< growth rate of the modified flow at each iterate
  std::vector<double> fd_rate;        ///< same, by finite differences in time
  bool strictly_increasing = true;
  double max_rate_rel_error = 0.0;
  std::optional<std::string> overflow;
};

inline DiracNormGrowth dirac_norm_growth(const StepSizes& rates, const JointState& state0,
                                         long n_steps,
                                         const DiracLossProfile& profile =
                                             DiracLossProfile::saturating()) {
  const GameDefinition game = make_dirac_gan(profile);
  game.check_state(state0);
  if (state0.stacked().squaredNorm() == 0.0) {
    throw ContractViolation("dirac_norm_growth: the origin is the equilibrium");
  }
  const JointField modified = modified_field(game, Scheme::simultaneous(), rates).as_field();
  const Trajectory traj = rollout(game, Scheme::simultaneous(), state0, rates, n_steps);
  DiracNormGrowth out;
  out.overflow = traj.overflow;
  for (const TrajectoryPoint& p : traj.points) {
    const double n2 = p.state.stacked().squaredNorm();
    if (!out.norm_sq.empty() && !(n2 > out.norm_sq.back())) {
      out.strictly_increasing = false;
    }
    out.norm_sq.push_back(n2);
    const double analytic = dirac_growth_rate(p.state.phi[0], p.state.theta[0], rates, profile);
    double fd = analytic;
    try {
      fd = norm_sq_rate_fd(modified, p.state);
    } catch (const OverflowError&) {
      fd = std::numeric_limits<double>::quiet_NaN();
    }
    out.analytic_rate.push_back(analytic);
    out.fd_rate.push_back(fd);
    const double scale = std::max(std::abs(analytic), std::numeric_limits<double>::min());
    const double rel = std::isfinite(fd) ? std::abs(fd - analytic) / scale
                                         : std::numeric_limits<double>::infinity();
    out.max_rate_rel_error = std::max(out.max_rate_rel_error, rel);
  }
  if (out.overflow) {
    out.strictly_increasing = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stability prediction against rollouts

enum class Empirical { Converged, Diverged, Undecided };

inline const char* to_string(Empirical e) {
  switch (e) {
    case Empirical::Converged: return "converged";
    case Empirical::Diverged: return "diverged";
    case Empirical::Undecided: return "undecided";
  }
  return "?";
}

inline constexpr long kDefaultProbeSteps = 50000;
inline constexpr double kDefaultProbeRadius = 1e-2;

struct StabilityComparison {
  Classification predicted = Classification::Marginal;
  Empirical empirical = Empirical::Undecided;
  StabilityReport report;
  double final_distance = 0.0;
  long steps_taken = 0;

  /// Stable prediction with divergence, or unstable prediction with convergence.
  bool contradictory() const {
    return (predicted == Classification::AsymptoticallyStable && empirical == Empirical::Diverged) ||
           (predicted == Classification::Unstable && empirical == Empirical::Converged);
  }
};

/// Unit direction from the seeded stream.
inline Vector probe_direction(Index dim, std::uint64_t seed) {
  const CounterRng rng(seed);
  Vector d(dim);
  for (Index i = 0; i < dim; ++i) {
    d[i] = rng.symmetric(static_cast<std::uint64_t>(i));
  }
  const double n = d.norm();
  if (n == 0.0) {
    d.setZero();
    d[0] = 1.0;
    return d;
  }
  return d / n;
}

/// Predicted classification of the modified Jacobian and the outcome of a
/// rollout started at equilibrium + probe_radius * (seeded unit direction).
/// Converged if the final distance is below 0.1 probe_radius, Diverged above
/// 10 probe_radius (or on overflow). Rollouts stop early once the distance
/// leaves [1e-12, 1e12] * probe_radius, where the verdict can no longer change.
inline StabilityComparison stability_vs_empirical(const GameDefinition& game,
                                                  const JointState& equilibrium,
                                                  const Scheme& scheme, const StepSizes& rates,
                                                  double probe_radius = kDefaultProbeRadius,
                                                  long n_steps = kDefaultProbeSteps,
                                                  std::uint64_t seed = 0) {
  if (!(probe_radius > 0.0) || n_steps < 1) {
    throw ContractViolation("stability_vs_empirical: need probe_radius > 0 and n_steps >= 1");
  }
  StabilityComparison out;
  out.report = stability_report(game, equilibrium, scheme, rates);
  out.predicted = out.report.classification;

  const Vector center = equilibrium.stacked();
  Vector x = center + probe_radius * probe_direction(center.size(), seed);
  const JointField field = game.field();
  JointState state = JointState::from_stacked(x, game.phi_dim);
  double distance = probe_radius;
  bool overflow = false;
  for (long i = 1; i <= n_steps; ++i) {
    try {
      state = step(field, scheme, state, rates, i);
    } catch (const OverflowError&) {
      overflow = true;
      out.steps_taken = i - 1;
      break;
    }
    out.steps_taken = i;
    distance = (state.stacked() - center).norm();
    if (distance > 1e12 * probe_radius || distance < 1e-12 * probe_radius) {
      break;
    }
  }
  out.final_distance = overflow ? std::numeric_limits<double>::infinity() : distance;
  if (overflow || distance > 10.0 * probe_radius) {
    out.empirical = Empirical::Diverged;
  } else if (distance < 0.1 * probe_radius) {
    out.empirical = Empirical::Converged;
  } else {
    out.empirical = Empirical::Undecided;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records and serialization

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

using RecordValue = std::variant<double, long, bool, std::string>;

inline std::string format_value(const RecordValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(x);
        } else if constexpr (std::is_same_v<T, long>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else {
          return x;
        }
      },
      v);
}

struct ExperimentRecord {
  std::string experiment;
  std::string game;
  std::string scheme;
  StepSizes rates;
  std::vector<std::pair<std::string, RecordValue>> outputs;  ///< in insertion order
  double wall_clock_seconds = 0.0;

  ExperimentRecord& set(std::string key, RecordValue value) {
    outputs.emplace_back(std::move(key), std::move(value));
    return *this;
  }
};

/// Quote a CSV field when it contains a comma, quote or line break.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) os_ << ',';
      os_ << csv_field(fields[i]);
    }
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson to_json_value(const RecordValue& v) {
  return std::visit(
      [](const auto& x) -> OrderedJson {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(x)) {
            return format_double(x);
          }
        }
        return OrderedJson(x);
      },
      v);
}

struct EmitOptions {
  bool include_timing = false;  ///< wall-clock breaks byte-identical reruns, so off by default
};

enum class Format { CSV, JSON };

/// Long-format CSV: experiment,game,scheme,h,alpha,lambda,key,value
/// (plus wall_clock_seconds when timing is included), one row per output.
inline void emit_csv(const std::vector<ExperimentRecord>& records, std::ostream& os,
                     const EmitOptions& opts = {}) {
  CsvWriter w(os);
  std::vector<std::string> header{"experiment", "game", "scheme", "h", "alpha", "lambda", "key",
                                  "value"};
  if (opts.include_timing) header.push_back("wall_clock_seconds");
  w.row(header);
  for (const ExperimentRecord& r : records) {
    for (const auto& [key, value] : r.outputs) {
      std::vector<std::string> row{r.experiment,
                                   r.game,
                                   r.scheme,
                                   format_double(r.rates.h),
                                   format_double(r.rates.alpha),
                                   format_double(r.rates.lambda),
                                   key,
                                   format_value(value)};
      if (opts.include_timing) row.push_back(format_double(r.wall_clock_seconds));
      w.row(row);
    }
  }
}

inline OrderedJson to_json(const ExperimentRecord& r, const EmitOptions& opts = {}) {
  OrderedJson j;
  j["experiment"] = r.experiment;
  j["game"] = r.game;
  j["scheme"] = r.scheme;
  j["rates"] = {{"h", r.rates.h}, {"alpha", r.rates.alpha}, {"lambda", r.rates.lambda}};
  OrderedJson outputs = OrderedJson::object();
  for (const auto& [key, value] : r.outputs) {
    outputs[key] = to_json_value(value);
  }
  j["outputs"] = std::move(outputs);
  if (opts.include_timing) j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

inline void emit_json(const std::vector<ExperimentRecord>& records, std::ostream& os,
                      const EmitOptions& opts = {}) {
  OrderedJson arr = OrderedJson::array();
  for (const ExperimentRecord& r : records) {
    arr.push_back(to_json(r, opts));
  }
  os << arr.dump(2) << '\n';
}

inline void emit(const std::vector<ExperimentRecord>& records, Format format, std::ostream& os,
                 const EmitOptions& opts = {}) {
  if (format == Format::CSV) {
    emit_csv(records, os, opts);
  } else {
    emit_json(records, os, opts);
  }
}

/// Write to a file, surfacing I/O failures with the path.
inline void emit(const std::vector<ExperimentRecord>& records, Format format,
                 const std::string& path, const EmitOptions& opts = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open '" + path + "' for writing");
  }
  emit(records, format, out, opts);
  out.flush();
  if (!out) {
    throw Error("write to '" + path + "' failed");
  }
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Configuration

/// Seed from DRIFTLAB_SEED, or 0 when unset. Throws ContractViolation when the
/// variable is set but is not an unsigned integer.
inline std::uint64_t default_seed() {
  const char* env = std::getenv("DRIFTLAB_SEED");
  if (env == nullptr || *env == '\0') {
    return 0;
  }
  std::uint64_t value = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto res = std::from_chars(env, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ContractViolation(std::string("DRIFTLAB_SEED is not an unsigned integer: ") + env);
  }
  return value;
}

/// Flat configuration file: one `key = value` per line, `#` starts a comment,
/// blank lines are ignored. Keys are the long CLI flag names without the
/// leading dashes; list values are separated by whitespace. A repeated key
/// replaces the earlier value.
inline std::map<std::string, std::vector<std::string>> parse_config(std::istream& in,
                                                                    const std::string& origin) {
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractViolation(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ContractViolation(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    std::istringstream values(line.substr(eq + 1));
    std::vector<std::string> items;
    for (std::string v; values >> v;) items.push_back(v);
    out[key] = std::move(items);
  }
  return out;
}

inline std::map<std::string, std::vector<std::string>> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot read config '" + path + "'");
  }
  return parse_config(in, path);
}

}  // namespace driftlab
