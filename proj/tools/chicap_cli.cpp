#include "chicap/additivity.hpp"
#include "chicap/errors.hpp"
#include "chicap/random.hpp"
#include "chicap/records.hpp"
#include "chicap/shor.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace chicap;
using records::Json;

namespace {

enum Exit { kPass = 0, kCheckFail = 1, kInvalid = 2, kNotConverged = 3 };

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::optional<double> tol;
  std::string output = "table";
  bool assert_proven = false;
};

Json load_config(const std::string& path) {
  std::stringstream buf;
  if (path.empty() || path == "-") {
    buf << std::cin.rdbuf();
  } else {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file '" + path + "'");
    buf << in.rdbuf();
  }
  return Json::parse(buf.str());
}

OptimizerConfig optimizer_config(const Json& config, const Flags& f) {
  OptimizerConfig cfg;
  if (config.contains("optimizer")) {
    const Json& o = config.at("optimizer");
    if (o.contains("restarts")) cfg.restarts = o.at("restarts").get<int>();
    if (o.contains("max_iterations")) cfg.max_iterations = o.at("max_iterations").get<int>();
    if (o.contains("ensemble_size")) cfg.ensemble_size = o.at("ensemble_size").get<std::size_t>();
    if (o.contains("tol_value")) cfg.tol_value = o.at("tol_value").get<double>();
    if (o.contains("tol_certificate")) cfg.tol_certificate = o.at("tol_certificate").get<double>();
    if (o.contains("seed")) cfg.seed = o.at("seed").get<std::uint64_t>();
    if (o.contains("certify")) cfg.certify = o.at("certify").get<bool>();
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.restarts) cfg.restarts = *f.restarts;
  cfg.validate();
  return cfg;
}

// Effective settings, embedded in emitted instances so that they replay on their own.
Json optimizer_json(const OptimizerConfig& cfg) {
  return {{"restarts", cfg.restarts},   {"max_iterations", cfg.max_iterations},
          {"ensemble_size", cfg.ensemble_size}, {"tol_value", cfg.tol_value},
          {"tol_certificate", cfg.tol_certificate}, {"seed", cfg.seed},
          {"certify", cfg.certify}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void emit(const Json& record) { std::cout << record.dump() << '\n'; }

void print_report_row(const GapReport& r) {
  std::cout << r.quantity << "  lhs " << fmt(r.lhs) << "  rhs " << fmt(r.rhs) << "  gap " << fmt(r.gap) << "  tol "
            << fmt(r.tolerance) << "  " << (r.proven ? (r.pass ? "PASS" : "FAIL") : (r.pass ? "no-violation" : "VIOLATION"))
            << (r.converged ? "" : "  (not converged)") << '\n';
  for (const auto& [k, v] : r.details) std::cout << "    " << k << " = " << fmt(v) << '\n';
}

int cmd_capacity(const Json& config, const Flags& f) {
  OptimizerConfig cfg = optimizer_config(config, f);
  if (f.tol) cfg.tol_certificate = *f.tol;
  const Json& ch = config.at("channel");
  const bool block = records::is_block_record(ch);
  std::optional<KrausChannel> kraus;
  std::optional<BlockChannel> blocks;
  std::size_t din = 0;
  if (block) {
    blocks = records::parse_block_channel(ch);
    din = blocks->din();
  } else {
    kraus = records::parse_channel(ch);
    din = kraus->din();
  }
  const ConstraintSet constraint =
      config.contains("constraint") ? records::parse_constraint(config.at("constraint"), din) : ConstraintSet::full();

  const CapacityResult r = block ? chi_capacity(*blocks, constraint, cfg) : chi_capacity(*kraus, constraint, cfg);
  if (f.output == "records") {
    Json out = records::to_json(r);
    out["quantity"] = "capacity";
    out["constraint"] = constraint.kind();
    out["seed"] = cfg.seed;
    emit(out);
  } else {
    std::cout << "capacity          " << fmt(r.value) << " bits\n"
              << "constraint        " << constraint.kind() << '\n'
              << "certificate       " << fmt(r.certificate) << '\n'
              << "certificate gap   " << fmt(r.certificate_gap) << '\n';
    if (r.multiplier) std::cout << "lambda            " << fmt(*r.multiplier) << '\n';
    std::cout << "converged         " << (r.converged ? "yes" : "no") << '\n'
              << "ensemble          " << r.ensemble.size() << " members\n";
    for (std::size_t i = 0; i < r.ensemble.size(); ++i)
      std::cout << "  p = " << fmt(r.ensemble.weight(i))
                << "  max eig = " << fmt(eigenvalues_h(r.ensemble.state(i).matrix()).maxCoeff()) << '\n';
  }
  return r.converged ? kPass : kNotConverged;
}

int cmd_certify(const Json& config, const Flags& f) {
  OptimizerConfig cfg = optimizer_config(config, f);
  if (f.tol) cfg.tol_certificate = *f.tol;
  const KrausChannel c = records::parse_channel(config.at("channel"));
  const ConstraintSet constraint = config.contains("constraint")
                                       ? records::parse_constraint(config.at("constraint"), c.din())
                                       : ConstraintSet::full();
  const Ensemble e = records::parse_ensemble(config.at("ensemble"));
  const double chi = chi_of_ensemble(c, e);
  const Certificate cert = optimality_certificate(c, constraint, e, cfg);
  const bool ok = cert.gap <= cfg.tol_certificate;
  if (f.output == "records") {
    emit({{"quantity", "certificate"},
          {"chi", records::round9(chi)},
          {"value", records::round9(cert.value)},
          {"gap", records::round9(cert.gap)},
          {"tolerance", cfg.tol_certificate},
          {"support_violation", cert.support_violation},
          {"pass", ok},
          {"seed", cfg.seed}});
  } else {
    std::cout << "chi of candidate  " << fmt(chi) << '\n'
              << "certificate       " << fmt(cert.value) << '\n'
              << "gap               " << fmt(cert.gap) << '\n'
              << "tolerance         " << fmt(cfg.tol_certificate) << '\n'
              << (ok ? "PASS" : "FAIL") << (cert.support_violation ? "  (support violation)" : "") << '\n';
  }
  return ok ? kPass : kCheckFail;
}

int cmd_shor_check(const Json& config, const Flags& f) {
  const OptimizerConfig cfg = optimizer_config(config, f);
  const ShorExtension x = records::parse_extension(config.at("extension"));
  const KrausChannel psi = config.contains("psi") ? records::parse_channel(config.at("psi")) : trivial_channel();
  const ConstraintSet b =
      config.contains("constraint") ? records::parse_constraint(config.at("constraint"), psi.din()) : ConstraintSet::full();
  std::vector<std::size_t> ds;
  if (config.contains("d_sweep"))
    for (const Json& d : config.at("d_sweep")) ds.push_back(d.get<std::size_t>());
  else
    ds.push_back(x.d());
  for (std::size_t d : ds)
    if (d < 1) throw InvalidInput("d_sweep entries must be positive");
  // With "lambda" the sweep follows q = lambda / log2 d instead of the fixed q of the extension.
  const std::optional<double> lambda =
      config.contains("lambda") ? std::optional<double>(config.at("lambda").get<double>()) : std::nullopt;
  const auto q_for = [&](std::size_t d) {
    if (!lambda) return x.q();
    if (d < 2 || !(*lambda >= 0.0)) throw InvalidInput("lambda sweeps need d >= 2 and lambda >= 0");
    const double q = *lambda / std::log2(static_cast<double>(d));
    if (q > 1.0) throw InvalidInput("lambda / log2 d exceeds 1 at d = " + std::to_string(d));
    return q;
  };
  const double slack = f.tol ? *f.tol : config.value("slack", 1e-3);

  bool all = true;
  bool converged = true;
  if (f.output == "table")
    std::cout << "d      q              lhs            rhs            deviation      bound          result\n";
  for (std::size_t d : ds) {
    const double q = q_for(d);
    const Prop3Report r = prop3_check(x.base(), psi, x.effect(), q, d, b, cfg, slack);
    all = all && r.pass;
    converged = converged && r.converged;
    if (f.output == "records") {
      Json out = records::to_json(r, d);
      out["q"] = records::round9(q);
      out["seed"] = cfg.seed;
      emit(out);
    } else {
      std::printf("%-6zu %-14s %-14s %-14s %-14s %-14s %s\n", d, fmt(q).c_str(), fmt(r.lhs).c_str(), fmt(r.rhs).c_str(),
                  fmt(r.deviation).c_str(), fmt(r.bound).c_str(), r.pass ? "PASS" : "FAIL");
    }
  }
  std::cout.flush();
  if (!all) return kCheckFail;
  return converged ? kPass : kNotConverged;
}

DensityMatrix check_state(const Json& check, std::size_t dh, std::size_t dk) {
  if (check.contains("state")) return records::parse_state(check.at("state"));
  if (check.contains("witness_state")) return records::parse_state(check.at("witness_state"));
  if (check.contains("random_state")) {
    const Json& r = check.at("random_state");
    return random_bipartite_state(dh, dk, r.value("rank", dh * dk), r.value("bias", 0.0),
                                  r.value("seed", std::uint64_t{1}));
  }
  throw InvalidInput("check needs 'state' or 'random_state'");
}

struct Check {
  Json record;
  std::function<GapReport()> run;
};

// Parses and validates one additivity check; the returned closure performs the solve.
Check prepare_check(const Json& source, const OptimizerConfig& cfg, double tol) {
  Json check = source;
  check.erase("checks");
  check["optimizer"] = optimizer_json(cfg);
  const std::string kind = check.at("check").get<std::string>();
  if (kind == "prop2_noiseless") {
    const KrausChannel psi = records::parse_channel(check.at("psi"));
    const DensityMatrix rho = records::parse_state(check.at("rho"));
    const DensityMatrix omega = records::parse_state(check.at("omega"));
    const double t = check.value("tolerance", 1e-2);
    return {check, [=] { return prop2_noiseless_check(psi, rho, omega, cfg, t); }};
  }
  const KrausChannel phi = records::parse_channel(check.at("phi"));
  const KrausChannel psi = records::parse_channel(check.at("psi"));
  if (kind == "constrained") {
    const ConstraintSet a = records::parse_constraint(check.at("A"), phi.din());
    const ConstraintSet b = records::parse_constraint(check.at("B"), psi.din());
    return {check, [=] { return constrained_additivity_gap(phi, a, psi, b, cfg, tol); }};
  }
  const DensityMatrix sigma = check_state(check, phi.din(), psi.din());
  if (sigma.dim() != phi.din() * psi.din()) throw InvalidInput("state dimension does not match the channels");
  if (kind == "subadditivity") return {check, [=] { return subadditivity_gap(phi, psi, sigma, cfg, tol); }};
  if (kind == "hatH") return {check, [=] { return hatH_superadditivity_gap(phi, psi, sigma, cfg, tol); }};
  if (kind == "prop2_directsum") {
    const double q = check.at("q").get<double>();
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("q must lie in [0, 1]");
    return {check, [=] { return prop2_directsum_check(phi, psi, q, sigma, cfg, tol); }};
  }
  throw InvalidInput("unknown check '" + kind + "'");
}

int run_reports(const std::vector<Check>& checks, const Flags& f) {
  bool proven_failure = false;
  for (const Check& c : checks) {
    const GapReport r = c.run();
    if (r.proven && !r.pass) proven_failure = true;
    if (f.output == "records")
      emit(records::to_json(r, c.record));
    else
      print_report_row(r);
  }
  std::cout.flush();
  return f.assert_proven && proven_failure ? kCheckFail : kPass;
}

int cmd_additivity(const Json& config, const Flags& f) {
  const OptimizerConfig cfg = optimizer_config(config, f);
  const double tol = f.tol ? *f.tol : config.value("tolerance", 2e-3);
  std::vector<Check> checks;
  if (config.contains("checks"))
    for (const Json& c : config.at("checks")) checks.push_back(prepare_check(c, cfg, tol));
  else
    checks.push_back(prepare_check(config, cfg, tol));
  return run_reports(checks, f);
}

int cmd_weak_additivity(const Json& config, const Flags& f) {
  const OptimizerConfig cfg = optimizer_config(config, f);
  const double tol = f.tol ? *f.tol : config.value("tolerance", 2e-3);
  const KrausChannel phi = records::parse_channel(config.at("phi"));
  const KrausChannel psi = records::parse_channel(config.at("psi"));
  const Matrix a = records::parse_matrix(config.at("A"));
  const Matrix b = records::parse_matrix(config.at("B"));
  const double gamma = config.at("gamma").get<double>();
  const int grid_n = config.value("grid_n", 11);
  if (static_cast<std::size_t>(a.rows()) != phi.din() || static_cast<std::size_t>(b.rows()) != psi.din())
    throw InvalidInput("constraint operators do not match the channel inputs");
  Json record = config;
  record["optimizer"] = optimizer_json(cfg);
  return run_reports({{record, [=] { return weak_additivity_check(phi, a, psi, b, gamma, grid_n, cfg, tol); }}}, f);
}

int cmd_profile_alpha(const Json& config, const Flags& f) {
  const OptimizerConfig cfg = optimizer_config(config, f);
  const double tol = f.tol ? *f.tol : config.value("tolerance", 1e-5);
  const KrausChannel c = records::parse_channel(config.at("channel"));
  const Matrix a = records::parse_matrix(config.at("A"));
  if (static_cast<std::size_t>(a.rows()) != c.din()) throw InvalidInput("A does not match the channel input");
  std::vector<double> alphas;
  if (config.contains("alphas")) {
    alphas = config.at("alphas").get<std::vector<double>>();
  } else {
    const int n = config.value("grid_n", 21);
    if (n < 2) throw InvalidInput("grid_n must be at least 2");
    const double lo = eigenvalues_h(a).minCoeff();
    for (int k = 0; k < n; ++k) alphas.push_back(lo + (1.0 - lo) * k / (n - 1));
  }
  const AlphaProfile p = f_alpha_profile(c, a, alphas, cfg, tol);
  const bool ok = p.nondecreasing && p.concave;
  if (f.output == "records") {
    Json out = records::to_json(p);
    out["tolerance"] = tol;
    out["pass"] = ok;
    out["seed"] = cfg.seed;
    emit(out);
  } else {
    std::cout << "alpha          value\n";
    for (const auto& pt : p.points)
      std::printf("%-14s %s%s\n", fmt(pt.alpha).c_str(), fmt(pt.value).c_str(), pt.converged ? "" : "  (not converged)");
    std::cout << "nondecreasing  " << (p.nondecreasing ? "yes" : "no") << "  (max decrease " << fmt(p.max_decrease)
              << ")\nconcave        " << (p.concave ? "yes" : "no") << "  (max second difference "
              << fmt(p.max_second_difference) << ")\n";
  }
  std::cout.flush();
  return ok ? kPass : kCheckFail;
}

int cmd_search(const Json& config, const Flags& f) {
  const OptimizerConfig cfg = optimizer_config(config, f);
  const double tol = f.tol ? *f.tol : config.value("tolerance", 2e-3);
  const KrausChannel phi = records::parse_channel(config.at("phi"));
  const KrausChannel psi = records::parse_channel(config.at("psi"));
  SearchOptions opts;
  opts.budget = config.value("budget", opts.budget);
  opts.refine_steps = config.value("refine_steps", opts.refine_steps);
  opts.bias = config.value("bias", opts.bias);
  if (opts.budget < 1) throw InvalidInput("budget must be at least 1");
  Json record = config;
  record["optimizer"] = optimizer_json(cfg);
  return run_reports({{record, [=] { return violation_search(phi, psi, opts, cfg, tol); }}}, f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained chi-capacity, channel extension and additivity tools"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--seed", flags.seed, "Base seed (overrides optimizer.seed; default 1234567)");
  app.add_option("--restarts", flags.restarts, "Random restarts per solve (default 4)");
  app.add_option("--tol", flags.tol,
                 "Check tolerance: certificate gap (capacity, certify; default 1e-4), report tolerance "
                 "(additivity, weak-additivity, search; default 2e-3), slack (shor-check; default 1e-3), "
                 "profile tolerance (profile-alpha; default 1e-5)");
  app.add_option("--output", flags.output, "Output mode")->check(CLI::IsMember({"table", "records"}));
  app.add_flag("--assert-proven", flags.assert_proven, "Exit 1 when a proven-case inequality is violated");

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Json&, const Flags&);
  };
  const Command commands[] = {
      {"capacity", "Constrained chi-capacity of a channel", cmd_capacity},
      {"certify", "Optimality certificate for a candidate ensemble", cmd_certify},
      {"shor-check", "Extension bound over a sweep of index sizes", cmd_shor_check},
      {"additivity", "Additivity gap reports", cmd_additivity},
      {"weak-additivity", "Weak additivity over constraint-budget splits", cmd_weak_additivity},
      {"profile-alpha", "Constrained capacity as a function of alpha", cmd_profile_alpha},
      {"search", "Randomized search for subadditivity violations", cmd_search},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("config", flags.config_path, "JSON config file (stdin when omitted or '-')");
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInvalid;
  }

  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    try {
      return cmd->run(load_config(flags.config_path), flags);
    } catch (const InvalidInput& e) {
      std::cerr << "invalid input: " << e.what() << '\n';
      return kInvalid;
    } catch (const Json::exception& e) {
      std::cerr << "invalid input: " << e.what() << '\n';
      return kInvalid;
    } catch (const Unsupported& e) {
      std::cerr << "unsupported: " << e.what() << '\n';
      return kInvalid;
    } catch (const VerificationError& e) {
      std::cerr << "verification failed: " << e.what() << '\n';
      return kCheckFail;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kCheckFail;
    }
  }
  return kInvalid;
}
