#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "fblcap/effcap.hpp"
#include "fblcap/errors.hpp"
#include "fblcap/experiment.hpp"
#include "fblcap/mcsim.hpp"
#include "fblcap/optim.hpp"

namespace fblcap::cli {

namespace {

using nlohmann::json;

class ArgumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every setting a run can take. Filled from the --config file first, then
// overridden by flags given on the command line.
struct Settings {
  std::optional<double> theta, snr_db, eps, sigma2, eta, d_max, eps_init;
  std::optional<int> n, nt, m, max_iter;
  std::optional<std::uint64_t> samples, seed, batch;
  std::optional<unsigned> workers;
  std::optional<std::string> methods, out, param, grid, grid_m, grid_snr_db;
  std::optional<bool> clamp_rate, trace, log_grid, literal_bernoulli, direct_sampling;
};

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "theta", "n",     "nt",         "m",          "snr_db",   "eps",
      "sigma2", "samples", "seed",    "batch",      "methods",  "config",
      "out",   "clamp_rate", "trace", "workers",    "param",    "grid",
      "log_grid", "literal_bernoulli", "direct_sampling", "grid_m", "grid_snr_db", "eta", "d_max",
      "max_iter", "eps_init"};
  return keys;
}

template <class T>
void take(const json& j, const char* key, std::optional<T>& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config key '") + key + "': " + e.what());
  }
}

Settings load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ArgumentError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config file must hold a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known_config_keys().contains(key)) throw ArgumentError("unknown config key '" + key + "'");

  Settings s;
  take(j, "theta", s.theta);
  take(j, "snr_db", s.snr_db);
  take(j, "eps", s.eps);
  take(j, "sigma2", s.sigma2);
  take(j, "eta", s.eta);
  take(j, "d_max", s.d_max);
  take(j, "eps_init", s.eps_init);
  take(j, "n", s.n);
  take(j, "nt", s.nt);
  take(j, "m", s.m);
  take(j, "max_iter", s.max_iter);
  take(j, "samples", s.samples);
  take(j, "seed", s.seed);
  take(j, "batch", s.batch);
  take(j, "workers", s.workers);
  take(j, "methods", s.methods);
  take(j, "out", s.out);
  take(j, "param", s.param);
  take(j, "grid", s.grid);
  take(j, "grid_m", s.grid_m);
  take(j, "grid_snr_db", s.grid_snr_db);
  take(j, "clamp_rate", s.clamp_rate);
  take(j, "trace", s.trace);
  take(j, "log_grid", s.log_grid);
  take(j, "literal_bernoulli", s.literal_bernoulli);
  take(j, "direct_sampling", s.direct_sampling);
  return s;
}

template <class T>
void overlay(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

Settings merge(Settings base, const Settings& top) {
  overlay(base.theta, top.theta);
  overlay(base.snr_db, top.snr_db);
  overlay(base.eps, top.eps);
  overlay(base.sigma2, top.sigma2);
  overlay(base.eta, top.eta);
  overlay(base.d_max, top.d_max);
  overlay(base.eps_init, top.eps_init);
  overlay(base.n, top.n);
  overlay(base.nt, top.nt);
  overlay(base.m, top.m);
  overlay(base.max_iter, top.max_iter);
  overlay(base.samples, top.samples);
  overlay(base.seed, top.seed);
  overlay(base.batch, top.batch);
  overlay(base.workers, top.workers);
  overlay(base.methods, top.methods);
  overlay(base.out, top.out);
  overlay(base.param, top.param);
  overlay(base.grid, top.grid);
  overlay(base.grid_m, top.grid_m);
  overlay(base.grid_snr_db, top.grid_snr_db);
  overlay(base.clamp_rate, top.clamp_rate);
  overlay(base.trace, top.trace);
  overlay(base.log_grid, top.log_grid);
  overlay(base.literal_bernoulli, top.literal_bernoulli);
  overlay(base.direct_sampling, top.direct_sampling);
  return base;
}

// Binds a flag to a plain variable and copies it into the optional only when
// the flag was actually given.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}

  template <class T>
  void option(const std::string& name, std::optional<T>& dst, const std::string& help) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(name, *holder, help);
    commits_.push_back([opt, holder, &dst] {
      if (opt->count() > 0) dst = *holder;
    });
  }

  void flag(const std::string& name, std::optional<bool>& dst, const std::string& help) {
    auto holder = std::make_shared<bool>(false);
    CLI::Option* opt = app_->add_flag(name, *holder, help);
    commits_.push_back([opt, holder, &dst] {
      if (opt->count() > 0) dst = *holder;
    });
  }

  void commit() const {
    for (const auto& fn : commits_) fn();
  }

 private:
  CLI::App* app_;
  std::vector<std::function<void()>> commits_;
};

void add_link_options(Binder& b, Settings& s) {
  b.option("--theta", s.theta, "QoS exponent in 1/bit (default 0.01)");
  b.option("--n", s.n, "block length in channel uses (default 300)");
  b.option("--m", s.m, "number of parallel sub-channels (default 5)");
  b.option("--snr-db", s.snr_db, "transmit SNR in dB (default 6)");
  b.option("--sigma2", s.sigma2, "noise power (default 1)");
  b.option("--workers", s.workers, "worker threads, 0 = all cores");
}

void add_point_options(Binder& b, Settings& s) {
  b.option("--nt", s.nt, "pilot length in channel uses (default 20)");
  b.option("--eps", s.eps, "decoding error probability in (0,1) (default 1e-5)");
}

void add_mc_options(Binder& b, Settings& s) {
  b.option("--samples", s.samples, "Monte-Carlo block realizations (default 1e6)");
  b.option("--seed", s.seed, "RNG seed (default 1)");
  b.option("--batch", s.batch, "samples per reduction batch (default 65536)");
  b.flag("--clamp-rate", s.clamp_rate, "zero negative instantaneous rates");
  b.flag("--literal-bernoulli", s.literal_bernoulli, "sample the block-error event explicitly");
  b.flag("--direct-sampling", s.direct_sampling, "plain Exp(1) fading draws, no importance weights");
}

SystemParams params_from(const Settings& s) {
  SystemParams p;
  p.theta = s.theta.value_or(0.01);
  p.n = s.n.value_or(300);
  p.n_t = s.nt.value_or(20);
  p.m = s.m.value_or(5);
  p.gamma0 = db_to_linear(s.snr_db.value_or(6.0));
  p.sigma2 = s.sigma2.value_or(1.0);
  p.eps = s.eps.value_or(1e-5);
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ArgumentError(e.what());
  }
  return p;
}

McConfig mc_from(const Settings& s) {
  McConfig cfg;
  cfg.samples = s.samples.value_or(1'000'000);
  cfg.seed = s.seed.value_or(1);
  cfg.batch = s.batch.value_or(65'536);
  cfg.workers = s.workers.value_or(0);
  cfg.mode = s.literal_bernoulli.value_or(false) ? BernoulliMode::kSampled
                                                 : BernoulliMode::kMarginalized;
  cfg.rate_policy =
      s.clamp_rate.value_or(false) ? RatePolicy::kClampAtZero : RatePolicy::kUnclamped;
  cfg.sampler = s.direct_sampling.value_or(false) ? FadingSampler::kDirect
                                                  : FadingSampler::kImportance;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ArgumentError(e.what());
  }
  return cfg;
}

MethodSet methods_from(const Settings& s, MethodSet fallback) {
  if (!s.methods) return fallback;
  try {
    return parse_methods(*s.methods);
  } catch (const std::invalid_argument& e) {
    throw ArgumentError(e.what());
  }
}

std::vector<double> grid_from(const std::string& text, std::string_view flag) {
  try {
    return parse_grid(text);
  } catch (const std::invalid_argument& e) {
    throw ArgumentError(std::string(flag) + ": " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

void finish(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("write failed for '" + path + "'");
}

void write_metadata(const std::string& out_path, const json& meta) {
  const std::string path = out_path + ".meta.json";
  auto f = open_out(path);
  f << meta.dump(2) << '\n';
  finish(f, path);
}

void print_kv(std::ostream& os, std::string_view key, double value) {
  os << key << " = " << format_double(value) << '\n';
}

int cmd_eval(const Settings& s, std::ostream& out, std::ostream& err) {
  const SystemParams p = params_from(s);
  const MethodSet methods = methods_from(s, {true, true, false});

  const double snr = avg_received_snr(p.n_t, p.gamma0);
  print_kv(out, "G", snr);
  print_kv(out, "G_db", linear_to_db(snr));
  out << "n_d = " << p.n_d() << '\n';
  print_kv(out, "theta_prime_n_d", p.expint_order());
  print_kv(out, "cap", ec_cap(p.theta, p.eps));

  std::optional<double> expint_value;
  if (methods.expint) {
    expint_value = ec_expint(p).value;
    print_kv(out, "expint", *expint_value);
  }
  if (methods.lower_bound) {
    const EcValue lb = ec_lower_bound(p);
    print_kv(out, "lower_bound", lb.value);
    if (lb.warning) err << "warning: " << *lb.warning << '\n';
  }
  if (methods.monte_carlo) {
    const McEstimate est = ec_monte_carlo(p, mc_from(s));
    print_kv(out, "monte_carlo", est.value);
    print_kv(out, "monte_carlo_stderr", est.std_error);
    out << "monte_carlo_samples = " << est.samples_used << '\n';
  }
  if (s.d_max) {
    DelaySpec spec{expint_value.value_or(0.0), *s.d_max, s.eta.value_or(1.0)};
    try {
      spec.validate();
    } catch (const DomainError& e) {
      throw ArgumentError(e.what());
    }
    if (!expint_value) throw ArgumentError("--d-max needs the expint method");
    print_kv(out, "delay_violation", delay_violation(p.theta, spec));
  }
  return kOk;
}

int cmd_mc(const Settings& s, std::ostream& out, std::ostream&) {
  const SystemParams p = params_from(s);
  const McConfig cfg = mc_from(s);
  const McEstimate est = ec_monte_carlo(p, cfg);
  print_kv(out, "monte_carlo", est.value);
  print_kv(out, "monte_carlo_stderr", est.std_error);
  out << "samples = " << est.samples_used << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "rng = " << Rng::kFamily << '\n';
  if (p.expint_order() > 1.0) print_kv(out, "expint", ec_expint(p).value);

  if (s.out) {
    const std::string& path = *s.out;
    auto f = open_out(path);
    f << "monte_carlo,monte_carlo_stderr,samples\n"
      << format_double(est.value) << ',' << format_double(est.std_error) << ','
      << est.samples_used << '\n';
    finish(f, path);
    json meta = {{"tool", "fblcap"},
                 {"version", std::string(version())},
                 {"command", "mc"},
                 {"params", params_json(p)},
                 {"samples", cfg.samples},
                 {"seed", cfg.seed},
                 {"batch", cfg.batch},
                 {"bernoulli", cfg.mode == BernoulliMode::kSampled ? "sampled" : "marginalized"},
                 {"sampler", cfg.sampler == FadingSampler::kDirect ? "direct" : "importance"},
                 {"clamp_rate", cfg.rate_policy == RatePolicy::kClampAtZero},
                 {"rng", std::string(Rng::kFamily)}};
    write_metadata(path, meta);
  }
  return kOk;
}

int cmd_sweep(const Settings& s, std::ostream& out, std::ostream&) {
  if (!s.param) throw ArgumentError("sweep needs --param (n_t, eps, snr_db or m)");
  if (!s.grid) throw ArgumentError("sweep needs --grid");
  const auto field = parse_swept_field(*s.param);
  if (!field) throw ArgumentError("unknown sweep parameter '" + *s.param + "'");

  Settings fixed = s;
  // The swept field need not be valid in the fixed settings.
  switch (*field) {
    case SweptField::kPilot: fixed.nt = fixed.nt.value_or(20); break;
    case SweptField::kEps: fixed.eps = fixed.eps.value_or(1e-5); break;
    default: break;
  }

  SweepSpec spec;
  spec.swept = *field;
  spec.grid = grid_from(*s.grid, "--grid");
  if (s.log_grid.value_or(false))
    for (double& v : spec.grid) v = std::pow(10.0, v);
  spec.fixed = params_from(fixed);
  spec.methods = methods_from(s, {true, true, false});
  if (spec.methods.monte_carlo) spec.mc = mc_from(s);
  spec.mc.rate_policy =
      s.clamp_rate.value_or(false) ? RatePolicy::kClampAtZero : RatePolicy::kUnclamped;
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ArgumentError(e.what());
  }

  const unsigned workers = s.workers.value_or(0);
  const auto rows = run_sweep(spec, workers);
  if (s.out) {
    const std::string& path = *s.out;
    auto f = open_out(path);
    write_sweep_csv(f, spec, rows);
    finish(f, path);
    write_metadata(path, sweep_metadata(spec, workers));
    out << "wrote " << rows.size() << " rows to " << path << '\n';
  } else {
    write_sweep_csv(out, spec, rows);
  }
  return kOk;
}

void print_trace(std::ostream& os, const OptimResult& r) {
  os << "iteration,half_step,n_t,eps,objective\n";
  for (const auto& t : r.trace)
    os << t.iteration << ',' << (t.step == HalfStep::kPilot ? "n_t" : "eps") << ',' << t.n_t
       << ',' << format_double(t.eps) << ',' << format_double(t.objective) << '\n';
}

int cmd_optimize(const Settings& s, std::ostream& out, std::ostream&) {
  const double theta = s.theta.value_or(0.01);
  const int n = s.n.value_or(300);
  if (!(theta > 0.0)) throw ArgumentError("theta must be > 0");
  OptimOptions opts;
  opts.eps_init = s.eps_init.value_or(opts.eps_init);
  opts.max_iter = s.max_iter.value_or(opts.max_iter);
  const unsigned workers = s.workers.value_or(0);

  const bool grid_mode = s.grid_m || s.grid_snr_db;
  if (!grid_mode) {
    const int m = s.m.value_or(5);
    const double snr_db = s.snr_db.value_or(6.0);
    if (m < 1) throw ArgumentError("m must be >= 1");
    const OptimResult r = alternate_optimize({m, db_to_linear(snr_db), theta, n}, opts);
    out << "n_t_star = " << r.n_t_star << '\n';
    print_kv(out, "eps_star", r.eps_star);
    print_kv(out, "ec_lower_bound", r.ec_star);
    print_kv(out, "ec_expint", r.ec_expint);
    out << "iterations = " << r.iterations << '\n';
    out << "boundary = " << (r.boundary ? "true" : "false") << '\n';
    std::vector<OptimGridPoint> pts{{m, snr_db, r, {}}};
    if (s.out) {
      const std::string& path = *s.out;
      auto f = open_out(path);
      write_optimize_csv(f, pts);
      finish(f, path);
      if (s.trace.value_or(false)) {
        const std::string tpath = path + ".trace.csv";
        auto t = open_out(tpath);
        write_trace_csv(t, pts);
        finish(t, tpath);
      }
      write_metadata(path, {{"tool", "fblcap"},
                            {"version", std::string(version())},
                            {"command", "optimize"},
                            {"theta", theta},
                            {"n", n},
                            {"m", m},
                            {"snr_db", snr_db},
                            {"eps_init", opts.eps_init},
                            {"gap_tol", opts.gap_tol},
                            {"max_iter", opts.max_iter}});
    } else if (s.trace.value_or(false)) {
      print_trace(out, r);
    }
    return kOk;
  }

  std::vector<int> ms;
  for (double v : grid_from(s.grid_m.value_or(std::to_string(s.m.value_or(5))), "--grid-m")) {
    if (v < 1 || std::round(v) != v) throw ArgumentError("--grid-m values must be integers >= 1");
    ms.push_back(static_cast<int>(v));
  }
  const auto snrs =
      grid_from(s.grid_snr_db.value_or(format_double(s.snr_db.value_or(6.0))), "--grid-snr-db");
  const auto points = run_optimize_grid(ms, snrs, theta, n, opts, workers);

  const bool any_failed = std::any_of(points.begin(), points.end(),
                                      [](const OptimGridPoint& p) { return !p.result; });
  if (s.out) {
    const std::string& path = *s.out;
    auto f = open_out(path);
    write_optimize_csv(f, points);
    finish(f, path);
    if (s.trace.value_or(false)) {
      const std::string tpath = path + ".trace.csv";
      auto t = open_out(tpath);
      write_trace_csv(t, points);
      finish(t, tpath);
    }
    write_metadata(path, {{"tool", "fblcap"},
                          {"version", std::string(version())},
                          {"command", "optimize"},
                          {"theta", theta},
                          {"n", n},
                          {"grid_m", ms},
                          {"grid_snr_db", snrs},
                          {"eps_init", opts.eps_init},
                          {"gap_tol", opts.gap_tol},
                          {"max_iter", opts.max_iter}});
    out << "wrote " << points.size() << " rows to " << path << '\n';
  } else {
    write_optimize_csv(out, points);
    if (s.trace.value_or(false)) write_trace_csv(out, points);
  }
  return any_failed ? kDomainError : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Effective capacity of finite-blocklength transmission over parallel "
               "Rayleigh sub-channels with pilot-based channel estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  Settings cli;
  std::string config_path;

  auto* eval = app.add_subcommand("eval", "evaluate the effective capacity at one point");
  auto* mc = app.add_subcommand("mc", "Monte-Carlo estimate at one point");
  auto* sweep = app.add_subcommand("sweep", "sweep one parameter and write CSV");
  auto* optimize = app.add_subcommand("optimize", "alternating pilot / error-probability optimizer");

  std::vector<Binder> binders;
  binders.reserve(4);
  for (auto* sub : {eval, mc, sweep, optimize}) {
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    Binder& b = binders.emplace_back(sub);
    add_link_options(b, cli);
    b.option("--out", cli.out, "output CSV path (metadata goes to PATH.meta.json)");
    if (sub != optimize) add_point_options(b, cli);
    if (sub == eval || sub == sweep) {
      b.option("--methods", cli.methods, "comma list of expint,lower_bound,monte_carlo");
      add_mc_options(b, cli);
    }
    if (sub == mc) add_mc_options(b, cli);
    if (sub == eval) {
      b.option("--d-max", cli.d_max, "delay bound in blocks for the violation estimate");
      b.option("--eta", cli.eta, "buffer non-empty probability (default 1)");
    }
    if (sub == sweep) {
      b.option("--param", cli.param, "swept field: n_t, eps, snr_db or m");
      b.option("--grid", cli.grid, "grid values 'a,b,c' or 'start:stop:step'");
      b.flag("--log-grid", cli.log_grid, "grid holds log10 of the swept values");
    }
    if (sub == optimize) {
      b.flag("--trace", cli.trace, "emit one row per half-step");
      b.option("--grid-m", cli.grid_m, "sub-channel grid for batch optimization");
      b.option("--grid-snr-db", cli.grid_snr_db, "SNR grid in dB for batch optimization");
      b.option("--eps-init", cli.eps_init, "initial error probability (default 1e-3)");
      b.option("--max-iter", cli.max_iter, "iteration cap (default 100)");
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kArgumentError;
  }
  for (const auto& b : binders) b.commit();

  try {
    Settings settings = cli;
    if (!config_path.empty()) settings = merge(load_config(config_path), cli);

    if (eval->parsed()) return cmd_eval(settings, out, err);
    if (mc->parsed()) return cmd_mc(settings, out, err);
    if (sweep->parsed()) return cmd_sweep(settings, out, err);
    return cmd_optimize(settings, out, err);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kArgumentError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
}

}  // namespace fblcap::cli
