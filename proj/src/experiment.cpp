#include "fblcap/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include "fblcap/effcap.hpp"
#include "fblcap/errors.hpp"

#ifndef FBLCAP_VERSION
#define FBLCAP_VERSION "0.0.0"
#endif

namespace fblcap {

namespace {

int to_int_exact(double v, std::string_view what) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9 || std::abs(r) > 1e9) {
    std::ostringstream msg;
    msg << what << " must be an integer (got " << format_double(v) << ")";
    throw DomainError(msg.str());
  }
  return static_cast<int>(r);
}

double parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return v;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
}

std::string csv_safe(std::string text) {
  std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return text;
}

void write_optional(std::ostream& os, const std::optional<double>& v) {
  os << ',';
  if (v) os << format_double(*v);
}

}  // namespace

std::string_view version() { return FBLCAP_VERSION; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string_view column_name(SweptField field) {
  switch (field) {
    case SweptField::kPilot: return "n_t";
    case SweptField::kEps: return "eps";
    case SweptField::kSnrDb: return "snr_db";
    case SweptField::kSubchannels: return "m";
  }
  return "?";
}

std::optional<SweptField> parse_swept_field(std::string_view name) {
  if (name == "n_t" || name == "nt") return SweptField::kPilot;
  if (name == "eps") return SweptField::kEps;
  if (name == "snr_db" || name == "gamma0_db" || name == "snr-db") return SweptField::kSnrDb;
  if (name == "m") return SweptField::kSubchannels;
  return std::nullopt;
}

MethodSet parse_methods(std::string_view list) {
  MethodSet out{false, false, false};
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    const std::string_view item = list.substr(start, end - start);
    if (item == "expint")
      out.expint = true;
    else if (item == "lower_bound")
      out.lower_bound = true;
    else if (item == "monte_carlo" || item == "mc")
      out.monte_carlo = true;
    else
      throw std::invalid_argument("unknown method '" + std::string(item) +
                                  "' (expected expint, lower_bound, monte_carlo)");
    start = end + 1;
  }
  return out;
}

std::string to_string(const MethodSet& methods) {
  std::string out;
  auto add = [&](std::string_view name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (methods.expint) add("expint");
  if (methods.lower_bound) add("lower_bound");
  if (methods.monte_carlo) add("monte_carlo");
  return out;
}

void SweepSpec::validate() const {
  if (grid.empty()) throw DomainError("sweep grid must not be empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("sweep grid must be strictly increasing");
  if (!methods.expint && !methods.lower_bound && !methods.monte_carlo)
    throw DomainError("sweep needs at least one method");
  if (methods.monte_carlo) mc.validate();
}

SystemParams SweepSpec::at(double value) const {
  SystemParams p = fixed;
  switch (swept) {
    case SweptField::kPilot: p.n_t = to_int_exact(value, "n_t"); break;
    case SweptField::kEps: p.eps = value; break;
    case SweptField::kSnrDb: p.gamma0 = db_to_linear(value); break;
    case SweptField::kSubchannels: p.m = to_int_exact(value, "m"); break;
  }
  return p;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned workers) {
  spec.validate();
  std::vector<SweepRow> rows(spec.grid.size());
  McConfig mc = spec.mc;
  if (workers != 1) mc.workers = 1;  // parallelism lives at the point level

  parallel_for(rows.size(), workers, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.swept = spec.grid[i];
    std::vector<std::string> notes;
    auto attempt = [&](std::string_view method, auto&& fn) {
      try {
        fn();
      } catch (const std::exception& e) {
        row.valid = false;
        notes.push_back(std::string(method) + ": " + e.what());
      }
    };
    SystemParams p;
    try {
      p = spec.at(row.swept);
      p.validate();
    } catch (const std::exception& e) {
      row.valid = false;
      row.note = csv_safe(e.what());
      return;
    }
    if (spec.methods.expint) attempt("expint", [&] { row.expint = ec_expint(p).value; });
    if (spec.methods.lower_bound)
      attempt("lower_bound", [&] { row.lower_bound = ec_lower_bound(p).value; });
    if (spec.methods.monte_carlo)
      attempt("monte_carlo", [&] {
        const McEstimate est = ec_monte_carlo(p, mc);
        row.monte_carlo = est.value;
        row.monte_carlo_stderr = est.std_error;
      });
    std::string joined;
    for (const auto& n : notes) joined += (joined.empty() ? "" : " | ") + n;
    row.note = csv_safe(joined);
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  os << column_name(spec.swept);
  if (spec.methods.expint) os << ",expint";
  if (spec.methods.lower_bound) os << ",lower_bound";
  if (spec.methods.monte_carlo) os << ",monte_carlo,monte_carlo_stderr";
  os << ",valid,note\n";
  for (const auto& row : rows) {
    os << format_double(row.swept);
    if (spec.methods.expint) write_optional(os, row.expint);
    if (spec.methods.lower_bound) write_optional(os, row.lower_bound);
    if (spec.methods.monte_carlo) {
      write_optional(os, row.monte_carlo);
      write_optional(os, row.monte_carlo_stderr);
    }
    os << ',' << (row.valid ? 1 : 0) << ',' << row.note << '\n';
  }
}

std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto first = text.find(':');
    const auto second = text.find(':', first + 1);
    if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos)
      throw std::invalid_argument("range grid must be start:stop:step");
    const double start = parse_number(text.substr(0, first));
    const double stop = parse_number(text.substr(first + 1, second - first - 1));
    const double step = parse_number(text.substr(second + 1));
    if (!(step > 0.0) || stop < start)
      throw std::invalid_argument("range grid needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 10'000'000) throw std::invalid_argument("range grid too large");
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    out.push_back(parse_number(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

nlohmann::json params_json(const SystemParams& p) {
  return {{"theta", p.theta}, {"n", p.n},           {"n_t", p.n_t},
          {"m", p.m},         {"gamma0", p.gamma0}, {"snr_db", linear_to_db(p.gamma0)},
          {"sigma2", p.sigma2}, {"eps", p.eps}};
}

nlohmann::json sweep_metadata(const SweepSpec& spec, unsigned workers) {
  nlohmann::json meta;
  meta["tool"] = "fblcap";
  meta["version"] = std::string(version());
  meta["command"] = "sweep";
  meta["swept"] = std::string(column_name(spec.swept));
  meta["grid"] = spec.grid;
  meta["fixed"] = params_json(spec.fixed);
  meta["methods"] = to_string(spec.methods);
  if (spec.methods.monte_carlo) {
    meta["monte_carlo"] = {
        {"samples", spec.mc.samples},
        {"seed", spec.mc.seed},
        {"batch", spec.mc.batch},
        {"bernoulli", spec.mc.mode == BernoulliMode::kSampled ? "sampled" : "marginalized"},
        {"sampler", spec.mc.sampler == FadingSampler::kDirect ? "direct" : "importance"},
        {"rng", std::string(Rng::kFamily)}};
  }
  meta["clamp_rate"] = spec.mc.rate_policy == RatePolicy::kClampAtZero;
  meta["workers"] = workers;
  meta["units"] = "bits/block";
  return meta;
}

std::vector<OptimGridPoint> run_optimize_grid(const std::vector<int>& ms,
                                              const std::vector<double>& snrs_db, double theta,
                                              int n, const OptimOptions& opts, unsigned workers) {
  std::vector<OptimGridPoint> points;
  for (int m : ms)
    for (double db : snrs_db) points.push_back({m, db, std::nullopt, {}});
  parallel_for(points.size(), workers, [&](std::size_t i) {
    auto& pt = points[i];
    try {
      pt.result = alternate_optimize({pt.m, db_to_linear(pt.snr_db), theta, n}, opts);
    } catch (const std::exception& e) {
      pt.error = csv_safe(e.what());
    }
  });
  return points;
}

void write_optimize_csv(std::ostream& os, const std::vector<OptimGridPoint>& points) {
  os << "m,snr_db,n_t_star,eps_star,ec_lower_bound,ec_expint,iterations,boundary,valid,note\n";
  for (const auto& pt : points) {
    os << pt.m << ',' << format_double(pt.snr_db);
    if (pt.result) {
      const auto& r = *pt.result;
      os << ',' << r.n_t_star << ',' << format_double(r.eps_star) << ','
         << format_double(r.ec_star) << ',' << format_double(r.ec_expint) << ',' << r.iterations
         << ',' << (r.boundary ? 1 : 0) << ",1,\n";
    } else {
      os << ",,,,,,,0," << pt.error << '\n';
    }
  }
}

void write_trace_csv(std::ostream& os, const std::vector<OptimGridPoint>& points) {
  os << "m,snr_db,iteration,half_step,n_t,eps,objective\n";
  for (const auto& pt : points) {
    if (!pt.result) continue;
    for (const auto& t : pt.result->trace) {
      os << pt.m << ',' << format_double(pt.snr_db) << ',' << t.iteration << ','
         << (t.step == HalfStep::kPilot ? "n_t" : "eps") << ',' << t.n_t << ','
         << format_double(t.eps) << ',' << format_double(t.objective) << '\n';
    }
  }
}

}  // namespace fblcap
