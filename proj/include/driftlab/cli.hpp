#pragma once

// Command-line front end: simulate, order-fit, stability, dirac, sweep.
//
// Exit codes: 0 success, 1 an experiment assertion failed (or the run itself
// failed), 2 usage error. Every subcommand accepts --config FILE with flat
// `key = value` lines (see parse_config); flags given on the command line win.

#include "driftlab/lab.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace driftlab {

namespace cli_detail {

struct GameOptions {
  std::string game = "linear-toy";
  std::vector<double> eps{0.09, 0.09};
  std::vector<long> dims{2, 2};
  int degree = 2;
  std::uint64_t seed = 0;
};

struct RateOptions {
  double h = 0.1;
  double alpha = 1.0;
  double lambda = 1.0;
  std::string scheme = "sim";
  int m = 1;
  int k = 1;
};

struct OutputOptions {
  std::string out;   ///< CSV path; empty = stdout
  std::string json;  ///< JSON summary path; empty = stdout
};

class UsageError : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

inline GameDefinition build_game(const GameOptions& o) {
  if (o.game == "linear-toy") {
    if (o.eps.size() != 2) throw UsageError("--eps takes two values");
    return make_linear_toy(o.eps[0], o.eps[1]);
  }
  if (o.game == "dirac") {
    return make_dirac_gan();
  }
  if (o.dims.size() != 2 || o.dims[0] < 1 || o.dims[1] < 1) {
    throw UsageError("--dims takes two positive values");
  }
  if (o.game == "quadratic-zero-sum") {
    return make_quadratic_zero_sum(QuadraticGameParams::random(o.seed, o.dims[0], o.dims[1]));
  }
  if (o.game == "quadratic-common-payoff") {
    return make_quadratic_common_payoff(QuadraticGameParams::random(o.seed, o.dims[0], o.dims[1]));
  }
  if (o.game == "polynomial") {
    return make_random_polynomial_game(o.seed, o.dims[0], o.dims[1], o.degree, true);
  }
  throw UsageError("unknown game '" + o.game + "'");
}

inline Scheme build_scheme(const RateOptions& o) {
  if (o.scheme == "sim") return Scheme::simultaneous();
  if (o.scheme == "alt") return Scheme::alternating(o.m, o.k);
  if (o.scheme == "rk4") return Scheme::rk4();
  throw UsageError("unknown scheme '" + o.scheme + "'");
}

inline StepSizes build_rates(const RateOptions& o) { return StepSizes(o.h, o.alpha, o.lambda); }

inline JointState build_state(const GameDefinition& game, const std::vector<double>& phi,
                              const std::vector<double>& theta, double fill) {
  auto make = [fill](const std::vector<double>& v, Index dim, const char* flag) {
    if (v.empty()) return Vector(Vector::Constant(dim, fill));
    if (static_cast<Index>(v.size()) != dim) {
      throw UsageError(std::string(flag) + " needs " + std::to_string(dim) + " values");
    }
    return Vector(Vector::Map(v.data(), dim));
  };
  return JointState(make(phi, game.phi_dim, "--phi"), make(theta, game.theta_dim, "--theta"));
}

inline void add_game_options(CLI::App* app, GameOptions& o) {
  app->add_option("--game", o.game,
                  "linear-toy | dirac | quadratic-zero-sum | quadratic-common-payoff | polynomial")
      ->capture_default_str();
  app->add_option("--eps", o.eps, "linear-toy eps1 eps2")->expected(2)->capture_default_str();
  app->add_option("--dims", o.dims, "phi and theta dims of generated games")
      ->expected(2)
      ->capture_default_str();
  app->add_option("--degree", o.degree, "polynomial degree (1-3)")->capture_default_str();
  app->add_option("--seed", o.seed, "seed for generated games (default: DRIFTLAB_SEED or 0)");
}

inline void add_rate_options(CLI::App* app, RateOptions& o, bool with_scheme) {
  app->add_option("--h", o.h, "base step size")->capture_default_str();
  app->add_option("--alpha", o.alpha, "first player multiplier")->capture_default_str();
  app->add_option("--lambda", o.lambda, "second player multiplier")->capture_default_str();
  if (with_scheme) {
    app->add_option("--scheme", o.scheme, "sim | alt | rk4")->capture_default_str();
  }
  app->add_option("--m", o.m, "first player inner updates (alt)")->capture_default_str();
  app->add_option("--k", o.k, "second player inner updates (alt)")->capture_default_str();
}

inline void add_output_options(CLI::App* app, OutputOptions& o) {
  app->add_option("--out", o.out, "CSV output path (default stdout)");
  app->add_option("--json", o.json, "JSON summary path (default stdout)");
}

/// Writes CSV and JSON where requested. With no paths both go to stdout, CSV first.
class Outputs {
 public:
  Outputs(const OutputOptions& o, std::ostream& stdout_stream) : opts_(o), stdout_(stdout_stream) {}

  template <class Fn>
  void csv(Fn&& write) {
    with_stream(opts_.out, std::forward<Fn>(write));
  }

  void json(const OrderedJson& j) {
    with_stream(opts_.json, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }

 private:
  template <class Fn>
  void with_stream(const std::string& path, Fn&& write) {
    if (path.empty() || path == "-") {
      write(stdout_);
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    write(f);
    f.flush();
    if (!f) throw Error("write to '" + path + "' failed");
  }

  OutputOptions opts_;
  std::ostream& stdout_;
};

inline OrderedJson rates_json(const StepSizes& r) {
  return {{"h", r.h}, {"alpha", r.alpha}, {"lambda", r.lambda}};
}

inline OrderedJson finite_or_string(double x) {
  return std::isfinite(x) ? OrderedJson(x) : OrderedJson(format_double(x));
}

inline OrderedJson eigen_json(const std::vector<Complex>& eigs) {
  OrderedJson arr = OrderedJson::array();
  for (const Complex& e : eigs) {
    arr.push_back({{"re", e.real()}, {"im", e.imag()}});
  }
  return arr;
}

inline RegularizerSpec build_regularizer(const std::string& name, double coef) {
  if (name == "none") return RegularizerSpec::none();
  if (name == "cancel-sim") return RegularizerSpec::cancel_interaction_sim();
  if (name == "cancel-alt") return RegularizerSpec::cancel_interaction_alt();
  if (name == "cancel-first") return RegularizerSpec::cancel_first_player_interaction_only();
  if (name == "sga") return RegularizerSpec::sga(coef);
  if (name == "consensus") return RegularizerSpec::consensus(coef);
  if (name == "strengthen-self") return RegularizerSpec::strengthen_self();
  throw UsageError("unknown regularizer '" + name + "'");
}

/// Splice config-file values in front of the command-line flags, skipping
/// keys that the command line already sets.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!path) return kept;
  auto on_command_line = [&](const std::string& key) {
    for (const std::string& a : kept) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  std::vector<std::string> out;
  // Keep the subcommand first so the spliced flags bind to it.
  std::size_t first = 0;
  if (!kept.empty() && kept[0].rfind("-", 0) != 0) {
    out.push_back(kept[0]);
    first = 1;
  }
  for (const auto& [key, values] : load_config(*path)) {
    if (on_command_line(key)) continue;
    out.push_back("--" + key);
    out.insert(out.end(), values.begin(), values.end());
  }
  out.insert(out.end(), kept.begin() + static_cast<std::ptrdiff_t>(first), kept.end());
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct SimulateOptions {
  GameOptions game;
  RateOptions rates;
  OutputOptions output;
  long steps = 100;
  std::vector<double> phi, theta;
  std::string regularizer = "none";
  double reg_coef = 0.0;
};

inline int run_simulate(const SimulateOptions& o, std::ostream& out) {
  const GameDefinition game = build_game(o.game);
  const StepSizes rates = build_rates(o.rates);
  const Scheme scheme = build_scheme(o.rates);
  const JointState s0 = build_state(game, o.phi, o.theta, 1.0);
  const RegularizerSpec reg = build_regularizer(o.regularizer, o.reg_coef);
  const Trajectory traj = reg.kind == RegularizerSpec::Kind::None
                              ? rollout(game, scheme, s0, rates, o.steps)
                              : rollout(game, scheme, s0, rates, o.steps, reg);
  Outputs io(o.output, out);
  io.csv([&](std::ostream& os) {
    CsvWriter w(os);
    std::vector<std::string> header{"step"};
    for (Index i = 0; i < game.phi_dim; ++i) header.push_back("phi" + std::to_string(i));
    for (Index i = 0; i < game.theta_dim; ++i) header.push_back("theta" + std::to_string(i));
    header.push_back("norm_sq");
    w.row(header);
    for (const TrajectoryPoint& p : traj.points) {
      std::vector<std::string> row{std::to_string(p.step)};
      for (Index i = 0; i < game.phi_dim; ++i) row.push_back(format_double(p.state.phi[i]));
      for (Index i = 0; i < game.theta_dim; ++i) row.push_back(format_double(p.state.theta[i]));
      row.push_back(format_double(p.state.stacked().squaredNorm()));
      w.row(row);
    }
  });
  OrderedJson j;
  j["experiment"] = "simulate";
  j["game"] = game.name;
  j["scheme"] = scheme.name();
  j["rates"] = rates_json(rates);
  j["regularizer"] = reg.name();
  j["steps_requested"] = o.steps;
  j["steps_completed"] = traj.last_step();
  j["initial_norm_sq"] = traj.points.front().state.stacked().squaredNorm();
  j["final_norm_sq"] = traj.final_state().stacked().squaredNorm();
  j["overflow"] = traj.overflow ? OrderedJson(*traj.overflow) : OrderedJson(nullptr);
  io.json(j);
  return 0;
}

struct OrderFitOptions {
  GameOptions game;
  RateOptions rates;
  OutputOptions output;
  std::string reference = "modified";
  double h_max = 0.1;
  int points = 5;
  int substeps = kDefaultFlowSubsteps;
  std::vector<double> phi, theta;
  std::vector<double> expect_slope;  ///< optional [lo, hi]
};

inline int run_order_fit(const OrderFitOptions& o, std::ostream& out) {
  const GameDefinition game = build_game(o.game);
  const Scheme scheme = build_scheme(o.rates);
  const StepSizes rates = build_rates(o.rates);
  Reference ref;
  if (o.reference == "modified") {
    ref = Reference::ModifiedFlow;
  } else if (o.reference == "original") {
    ref = Reference::OriginalFlow;
  } else {
    throw UsageError("--reference must be original or modified");
  }
  if (!o.expect_slope.empty() && o.expect_slope.size() != 2) {
    throw UsageError("--expect-slope takes two values");
  }
  const JointState s0 = build_state(game, o.phi, o.theta, 1.0);
  const OrderFit fit = local_error_order(game, scheme, ref, s0, rates,
                                         geometric_grid(o.h_max, o.points), o.substeps);
  Outputs io(o.output, out);
  io.csv([&](std::ostream& os) {
    CsvWriter w(os);
    w.row({"h", "error", "phi_error", "theta_error"});
    for (std::size_t i = 0; i < fit.h_values.size(); ++i) {
      w.row({format_double(fit.h_values[i]), format_double(fit.errors[i]),
             format_double(fit.phi_errors[i]), format_double(fit.theta_errors[i])});
    }
  });
  bool pass = true;
  OrderedJson j;
  j["experiment"] = "order-fit";
  j["game"] = game.name;
  j["scheme"] = scheme.name();
  j["reference"] = to_string(ref);
  j["rates"] = {{"alpha", rates.alpha}, {"lambda", rates.lambda}};
  j["substeps"] = o.substeps;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.r_squared;
  if (!o.expect_slope.empty()) {
    pass = fit.slope >= o.expect_slope[0] && fit.slope <= o.expect_slope[1];
    j["expected_slope"] = o.expect_slope;
    j["pass"] = pass;
  }
  io.json(j);
  return pass ? 0 : 1;
}

struct StabilityOptions {
  GameOptions game;
  RateOptions rates;
  OutputOptions output;
  std::vector<double> phi, theta;
};

inline int run_stability(const StabilityOptions& o, std::ostream& out) {
  const GameDefinition game = build_game(o.game);
  const StepSizes rates = build_rates(o.rates);
  const JointState eq = build_state(game, o.phi, o.theta, 0.0);
  const Scheme sim = Scheme::simultaneous();
  const Scheme alt = Scheme::alternating(o.rates.m, o.rates.k);
  const StabilityReport rs = stability_report(game, eq, sim, rates);
  const StabilityReport ra = stability_report(game, eq, alt, rates);
  const StabilityReport r0 = analyze(best_jacobian_blocks(game, eq).assembled());
  Outputs io(o.output, out);
  if (!o.output.out.empty()) {
    io.csv([&](std::ostream& os) {
      CsvWriter w(os);
      w.row({"scheme", "trace", "determinant", "classification", "eig_index", "eig_re", "eig_im"});
      auto rows = [&](const std::string& name, const StabilityReport& r) {
        for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
          w.row({name, format_double(r.trace),
                 r.determinant ? format_double(*r.determinant) : std::string(),
                 to_string(r.classification), std::to_string(i),
                 format_double(r.eigenvalues[i].real()), format_double(r.eigenvalues[i].imag())});
        }
      };
      rows("original", r0);
      rows(sim.name(), rs);
      rows(alt.name(), ra);
    });
  }
  auto det = [](const StabilityReport& r) {
    return r.determinant ? OrderedJson(*r.determinant) : OrderedJson(nullptr);
  };
  OrderedJson j;
  j["experiment"] = "stability";
  j["game"] = game.name;
  j["rates"] = rates_json(rates);
  j["alt_counts"] = {{"m", o.rates.m}, {"k", o.rates.k}};
  j["trace_original"] = r0.trace;
  j["classification_original"] = to_string(r0.classification);
  j["trace_sim"] = rs.trace;
  j["det_sim"] = det(rs);
  j["classification_sim"] = to_string(rs.classification);
  j["eigenvalues_sim"] = eigen_json(rs.eigenvalues);
  j["trace_alt"] = ra.trace;
  j["det_alt"] = det(ra);
  j["classification_alt"] = to_string(ra.classification);
  j["eigenvalues_alt"] = eigen_json(ra.eigenvalues);
  io.json(j);
  return 0;
}

struct DiracOptions {
  RateOptions rates;
  OutputOptions output;
  long steps = 200;
  double phi = 0.5;
  double theta = 0.5;
  double u = 0.0;
  double nu = 0.0;
};

inline int run_dirac(const DiracOptions& o, std::ostream& out) {
  const StepSizes rates = build_rates(o.rates);
  const JointState s0(PlayerVector{o.phi}, PlayerVector{o.theta});
  const DiracNormGrowth growth = dirac_norm_growth(rates, s0, o.steps);
  const DiracRegularizedResult reg = dirac_regularized_jacobian(o.u, o.nu, rates);
  const GameDefinition game = make_dirac_gan();
  Outputs io(o.output, out);
  io.csv([&](std::ostream& os) {
    CsvWriter w(os);
    w.row({"step", "norm_sq", "analytic_rate", "fd_rate"});
    for (std::size_t i = 0; i < growth.norm_sq.size(); ++i) {
      w.row({std::to_string(i), format_double(growth.norm_sq[i]),
             format_double(growth.analytic_rate[i]), format_double(growth.fd_rate[i])});
    }
  });
  const bool pass = growth.strictly_increasing && growth.max_rate_rel_error <= 1e-4;
  OrderedJson j;
  j["experiment"] = "dirac";
  j["game"] = game.name;
  j["rates"] = rates_json(rates);
  j["steps"] = o.steps;
  j["strictly_increasing"] = growth.strictly_increasing;
  j["initial_norm_sq"] = growth.norm_sq.front();
  j["final_norm_sq"] = growth.norm_sq.back();
  j["max_rate_rel_error"] = finite_or_string(growth.max_rate_rel_error);
  j["regularized"] = {{"u", o.u},
                      {"nu", o.nu},
                      {"threshold_u", rates.phi_rate() / 4.0},
                      {"threshold_nu", rates.theta_rate() / 4.0},
                      {"trace", reg.report.trace},
                      {"classification", to_string(reg.report.classification)},
                      {"stable", reg.stable},
                      {"eigenvalues", eigen_json(reg.report.eigenvalues)}};
  j["pass"] = pass;
  io.json(j);
  return pass ? 0 : 1;
}

struct SweepOptions {
  OutputOptions output;
  std::vector<double> eps_values{0.03, 0.06, 0.09};
  std::vector<double> h_values{0.05, 0.1, 0.2};
  long steps = kDefaultProbeSteps;
  double probe = kDefaultProbeRadius;
  std::uint64_t seed = 0;
};

inline int run_sweep(const SweepOptions& o, std::ostream& out) {
  struct Row {
    double e1, e2, h;
    std::string scheme;
    StabilityComparison cmp;
  };
  std::vector<Row> rows;
  for (double e1 : o.eps_values) {
    for (double e2 : o.eps_values) {
      const GameDefinition game = make_linear_toy(e1, e2);
      const JointState eq(PlayerVector{0.0}, PlayerVector{0.0});
      for (double h : o.h_values) {
        for (const Scheme& s : {Scheme::simultaneous(), Scheme::alternating(1, 1)}) {
          rows.push_back({e1, e2, h, s.name(),
                          stability_vs_empirical(game, eq, s, StepSizes(h), o.probe, o.steps,
                                                 o.seed)});
        }
      }
    }
  }
  Outputs io(o.output, out);
  long contradictions = 0, agree = 0, undecided = 0;
  io.csv([&](std::ostream& os) {
    CsvWriter w(os);
    w.row({"eps1", "eps2", "h", "scheme", "trace", "predicted", "empirical", "final_distance",
           "steps"});
    for (const Row& r : rows) {
      w.row({format_double(r.e1), format_double(r.e2), format_double(r.h), r.scheme,
             format_double(r.cmp.report.trace), to_string(r.cmp.predicted),
             to_string(r.cmp.empirical), format_double(r.cmp.final_distance),
             std::to_string(r.cmp.steps_taken)});
    }
  });
  for (const Row& r : rows) {
    if (r.cmp.contradictory()) {
      ++contradictions;
    } else if (r.cmp.empirical == Empirical::Undecided) {
      ++undecided;
    } else {
      ++agree;
    }
  }
  OrderedJson j;
  j["experiment"] = "sweep";
  j["game"] = "linear-toy";
  j["cases"] = static_cast<long>(rows.size());
  j["agree"] = agree;
  j["undecided"] = undecided;
  j["contradictions"] = contradictions;
  j["steps"] = o.steps;
  j["probe_radius"] = o.probe;
  j["seed"] = o.seed;
  j["pass"] = contradictions == 0;
  io.json(j);
  return contradictions == 0 ? 0 : 1;
}

}  // namespace cli_detail

/// Entry point shared by the driftlab executable and the tests.
inline int cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Discretization drift in two-player games"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");
  app.set_help_all_flag("--help-all");

  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  SimulateOptions sim_o;
  sim_o.game.seed = seed;
  auto* sim = app.add_subcommand("simulate", "roll out a scheme and write the trajectory");
  add_game_options(sim, sim_o.game);
  add_rate_options(sim, sim_o.rates, true);
  add_output_options(sim, sim_o.output);
  sim->add_option("--steps", sim_o.steps)->capture_default_str();
  sim->add_option("--phi", sim_o.phi, "initial phi (default all ones)");
  sim->add_option("--theta", sim_o.theta, "initial theta (default all ones)");
  sim->add_option("--regularizer", sim_o.regularizer,
                  "none | cancel-sim | cancel-alt | cancel-first | sga | consensus | "
                  "strengthen-self")
      ->capture_default_str();
  sim->add_option("--reg-coef", sim_o.reg_coef, "coefficient for sga / consensus");

  OrderFitOptions of_o;
  of_o.game.seed = seed;
  auto* of = app.add_subcommand("order-fit", "fit the local-error order of one step");
  add_game_options(of, of_o.game);
  add_rate_options(of, of_o.rates, true);
  add_output_options(of, of_o.output);
  of->add_option("--reference", of_o.reference, "original | modified")->capture_default_str();
  of->add_option("--h-max", of_o.h_max)->capture_default_str();
  of->add_option("--points", of_o.points)->capture_default_str();
  of->add_option("--substeps", of_o.substeps, "reference flow RK4 steps")->capture_default_str();
  of->add_option("--phi", of_o.phi, "start phi (default all ones)");
  of->add_option("--theta", of_o.theta, "start theta (default all ones)");
  of->add_option("--expect-slope", of_o.expect_slope, "exit 1 unless lo <= slope <= hi")
      ->expected(2);

  StabilityOptions st_o;
  st_o.game.seed = seed;
  auto* st = app.add_subcommand("stability", "modified Jacobian analysis at an equilibrium");
  add_game_options(st, st_o.game);
  add_rate_options(st, st_o.rates, false);
  add_output_options(st, st_o.output);
  st->add_option("--phi", st_o.phi, "equilibrium phi (default origin)");
  st->add_option("--theta", st_o.theta, "equilibrium theta (default origin)");

  DiracOptions di_o;
  auto* di = app.add_subcommand("dirac", "Dirac-GAN norm growth and regularized stability");
  add_rate_options(di, di_o.rates, false);
  add_output_options(di, di_o.output);
  di->add_option("--steps", di_o.steps)->capture_default_str();
  di->add_option("--phi", di_o.phi)->capture_default_str();
  di->add_option("--theta", di_o.theta)->capture_default_str();
  di->add_option("--u", di_o.u, "penalty on ||grad_theta E||^2 for the first player");
  di->add_option("--nu", di_o.nu, "penalty on ||grad_phi E||^2 for the second player");

  SweepOptions sw_o;
  sw_o.seed = seed;
  auto* sw = app.add_subcommand("sweep", "stability prediction against rollouts on linear-toy");
  add_output_options(sw, sw_o.output);
  sw->add_option("--eps-values", sw_o.eps_values)->capture_default_str();
  sw->add_option("--h-values", sw_o.h_values)->capture_default_str();
  sw->add_option("--steps", sw_o.steps)->capture_default_str();
  sw->add_option("--probe", sw_o.probe)->capture_default_str();
  sw->add_option("--seed", sw_o.seed, "probe direction seed (default: DRIFTLAB_SEED or 0)");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::vector<const char*> argv{"driftlab"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const Error& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_o, out);
    if (of->parsed()) return run_order_fit(of_o, out);
    if (st->parsed()) return run_stability(st_o, out);
    if (di->parsed()) return run_dirac(di_o, out);
    if (sw->parsed()) return run_sweep(sw_o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const NotAnEquilibrium& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ContractViolation& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

inline int cli(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli(args, out, err);
}

}  // namespace driftlab
