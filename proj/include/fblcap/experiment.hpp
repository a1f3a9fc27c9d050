#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fblcap/channel.hpp"
#include "fblcap/mcsim.hpp"
#include "fblcap/optim.hpp"

namespace fblcap {

std::string_view version();

double db_to_linear(double db);
double linear_to_db(double linear);

/// Round-trippable text for a double: 17 significant digits, '.' as decimal
/// separator regardless of locale.
std::string format_double(double v);

enum class SweptField { kPilot, kEps, kSnrDb, kSubchannels };

std::string_view column_name(SweptField field);
std::optional<SweptField> parse_swept_field(std::string_view name);

struct MethodSet {
  bool expint = true;
  bool lower_bound = true;
  bool monte_carlo = false;
};

/// Parses a comma list drawn from {expint, lower_bound, monte_carlo}.
MethodSet parse_methods(std::string_view list);
std::string to_string(const MethodSet& methods);

struct SweepSpec {
  SweptField swept = SweptField::kPilot;
  std::vector<double> grid;
  SystemParams fixed;  // the swept field is overwritten per point
  MethodSet methods;
  McConfig mc;

  /// Grid must be non-empty and strictly increasing.
  void validate() const;
  SystemParams at(double value) const;
};

struct SweepRow {
  double swept = 0.0;
  std::optional<double> expint;
  std::optional<double> lower_bound;
  std::optional<double> monte_carlo;
  std::optional<double> monte_carlo_stderr;
  bool valid = true;
  std::string note;
};

/// Evaluates every grid point. Point failures mark the row invalid and never
/// abort the sweep. Rows come back in grid order for any worker count.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned workers = 0);

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows);

/// Parses a grid given as "a,b,c" or "start:stop:step" (inclusive stop).
std::vector<double> parse_grid(std::string_view text);

nlohmann::json params_json(const SystemParams& params);
nlohmann::json sweep_metadata(const SweepSpec& spec, unsigned workers);

struct OptimGridPoint {
  int m = 0;
  double snr_db = 0.0;
  std::optional<OptimResult> result;
  std::string error;
};

std::vector<OptimGridPoint> run_optimize_grid(const std::vector<int>& ms,
                                              const std::vector<double>& snrs_db, double theta,
                                              int n, const OptimOptions& opts = {},
                                              unsigned workers = 0);

void write_optimize_csv(std::ostream& os, const std::vector<OptimGridPoint>& points);
void write_trace_csv(std::ostream& os, const std::vector<OptimGridPoint>& points);

}  // namespace fblcap
