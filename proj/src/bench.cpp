#include "bfssd/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bfssd {

void ExperimentSpec::validate() const {
  problem.validate();
  if (methods.empty()) throw ConfigError("experiment '" + name + "': no methods");
  if (trials < 1) throw ConfigError("experiment '" + name + "': trials must be >= 1");
  if (!(budget >= 0.0)) throw ConfigError("experiment '" + name + "': budget must be >= 0");
  if (grid.empty()) throw ConfigError("experiment '" + name + "': checkpoint grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError("experiment '" + name + "': grid must be strictly increasing");
    }
  }
  if (plot_points < 2) throw ConfigError("experiment '" + name + "': plot_points must be >= 2");
  if (workers < 0) throw ConfigError("experiment '" + name + "': workers must be >= 0");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (methods[i].label == methods[j].label) {
        throw ConfigError("experiment '" + name + "': duplicate method label '" + methods[i].label + "'");
      }
    }
    methods[i].config.validate(problem.dim());
  }
}

const MethodOutcome& ExperimentResult::at(const std::string& label) const {
  for (const auto& m : methods)
    if (m.label == label) return m;
  throw std::out_of_range("no method labelled '" + label + "' in experiment '" + name + "'");
}

double value_at(const RunTrace& trace, double spend) {
  const auto& cps = trace.checkpoints();
  const auto it = std::upper_bound(cps.begin(), cps.end(), spend,
                                   [](double s, const Checkpoint& c) { return s < c.equiv_hf; });
  if (it == cps.begin()) return std::numeric_limits<double>::quiet_NaN();
  return std::prev(it)->best_value;
}

std::vector<double> resample(const RunTrace& trace, const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double n : grid) out.push_back(value_at(trace, n));
  return out;
}

CurveSummary summarize(const std::vector<RunTrace>& traces, const std::vector<double>& grid) {
  CurveSummary s;
  s.grid = grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double n : grid) {
    std::vector<double> values;
    for (const auto& t : traces) {
      const double v = value_at(t, n);
      if (!std::isnan(v)) values.push_back(v);
    }
    if (values.size() != traces.size() || values.empty()) {
      s.mean.push_back(nan);
      s.std.push_back(nan);
      s.min.push_back(nan);
      s.max.push_back(nan);
      continue;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    // a mean of identical values can round off the shared value
    s.mean.push_back(std::clamp(mean, *lo, *hi));
    s.std.push_back(*lo == *hi ? 0.0 : std::sqrt(ss / values.size()));
    s.min.push_back(*lo);
    s.max.push_back(*hi);
  }
  return s;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  std::vector<double> dense(spec.plot_points);
  const double top = std::max(spec.budget, spec.grid.back());
  for (int i = 0; i < spec.plot_points; ++i) dense[i] = top * (i + 1) / spec.plot_points;

  const int n_methods = static_cast<int>(spec.methods.size());
  const int jobs = n_methods * spec.trials;
  std::vector<RunResult> runs(jobs);
  std::vector<std::exception_ptr> errors(jobs);

#ifdef _OPENMP
  const int workers = spec.workers > 0 ? spec.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
#endif
  for (int job = 0; job < jobs; ++job) {
    const int m = job / spec.trials;
    const int t = job % spec.trials;
    try {
      OptimizerConfig cfg = spec.methods[m].config;
      cfg.budget = spec.budget;
      runs[job] = run_optimizer(spec.problem, cfg, RngStream::child_seed(spec.base_seed, t));
    } catch (...) {
      errors[job] = std::current_exception();
    }
  }

  for (int job = 0; job < jobs; ++job) {
    if (!errors[job]) continue;
    const std::string where = "experiment '" + spec.name + "', method '" +
                              spec.methods[job / spec.trials].label + "', trial " +
                              std::to_string(job % spec.trials) + " (seed " +
                              std::to_string(RngStream::child_seed(spec.base_seed, job % spec.trials)) +
                              ")";
    try {
      std::rethrow_exception(errors[job]);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const std::exception& e) {
      throw RunAbort(where + ": " + e.what());
    }
  }

  ExperimentResult result;
  result.name = spec.name;
  for (int m = 0; m < n_methods; ++m) {
    MethodOutcome outcome;
    outcome.label = spec.methods[m].label;
    std::vector<RunTrace> traces;
    for (int t = 0; t < spec.trials; ++t) {
      traces.push_back(runs[m * spec.trials + t].trace);
      outcome.runs.push_back(std::move(runs[m * spec.trials + t]));
    }
    outcome.table = summarize(traces, spec.grid);
    outcome.curve = summarize(traces, dense);
    result.methods.push_back(std::move(outcome));
  }
  return result;
}

namespace {

std::string fixed4(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string full(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string grid_label(double n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", n);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string path_safe(const std::string& label) {
  std::string out;
  for (char ch : label) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    out += ok ? ch : '_';
  }
  return out.empty() ? "_" : out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw RunAbort("cannot write " + path.string());
  out << text;
  if (!out) throw RunAbort("write failed for " + path.string());
}

}  // namespace

std::string emit_table(const ExperimentResult& result) {
  std::ostringstream os;
  os << "method";
  if (!result.methods.empty()) {
    for (double n : result.methods.front().table.grid) {
      os << ",mean@" << grid_label(n) << ",std@" << grid_label(n);
    }
  }
  os << '\n';
  for (const auto& m : result.methods) {
    os << m.label;
    for (std::size_t i = 0; i < m.table.grid.size(); ++i) {
      os << ',' << fixed4(m.table.mean[i]) << ',' << fixed4(m.table.std[i]);
    }
    os << '\n';
  }
  return os.str();
}

std::string emit_summary_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "method,N,mean,std,min,max\n";
  for (const auto& m : result.methods) {
    for (std::size_t i = 0; i < m.table.grid.size(); ++i) {
      os << m.label << ',' << grid_label(m.table.grid[i]) << ',' << full(m.table.mean[i]) << ','
         << full(m.table.std[i]) << ',' << full(m.table.min[i]) << ',' << full(m.table.max[i])
         << '\n';
    }
  }
  return os.str();
}

std::string emit_trace_csv(const RunTrace& trace) {
  std::ostringstream os;
  os << "equiv_hf,best_value\n";
  for (const auto& c : trace.checkpoints()) os << full(c.equiv_hf) << ',' << full(c.best_value) << '\n';
  return os.str();
}

std::string emit_convergence_plot(const ExperimentResult& result, bool log_y,
                                  const std::string& title) {
  if (result.methods.empty()) throw std::invalid_argument("nothing to plot");

  constexpr double width = 820, height = 520;
  constexpr double left = 80, right = 190, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};

  double x_max = 0.0;
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -y_lo;
  for (const auto& m : result.methods) {
    const auto& c = m.curve;
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      x_max = std::max(x_max, c.grid[i]);
      if (std::isnan(c.mean[i])) continue;
      for (double v : {c.min[i], c.max[i]}) {
        if (log_y && !(v > 0.0)) continue;
        y_lo = std::min(y_lo, v);
        y_hi = std::max(y_hi, v);
      }
    }
  }
  if (!std::isfinite(y_lo)) {
    y_lo = log_y ? 1.0 : 0.0;
    y_hi = log_y ? 10.0 : 1.0;
  }
  auto ty = [&](double v) { return log_y ? std::log10(std::max(v, y_lo)) : v; };
  double a = ty(y_lo);
  double b = ty(y_hi);
  if (b - a < 1e-12) {
    a -= 0.5;
    b += 0.5;
  }
  const double pad = 0.05 * (b - a);
  a -= pad;
  b += pad;
  if (x_max <= 0.0) x_max = 1.0;
  auto px = [&](double x) { return left + pw * x / x_max; };
  auto py = [&](double v) { return top + ph * (1.0 - (ty(v) - a) / (b - a)); };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!title.empty()) {
    os << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
       << xml_escape(title) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_max * i / 5;
    os << "<line x1=\"" << px(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << px(xv) << "\" y2=\""
       << top + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\">"
       << grid_label(xv) << "</text>\n";
    const double t = a + (b - a) * i / 5;
    const double yv = log_y ? std::pow(10.0, t) : t;
    const double yy = top + ph * (1.0 - static_cast<double>(i) / 5);
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << yy << "\" x2=\"" << left << "\" y2=\"" << yy
       << "\" stroke=\"black\"/>\n";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", yv);
    os << "<text x=\"" << left - 8 << "\" y=\"" << yy + 4 << "\" text-anchor=\"end\">" << buf
       << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15
     << "\" text-anchor=\"middle\">equivalent HF evaluations</text>\n";
  os << "<text transform=\"translate(20," << top + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">best HF value" << (log_y ? " (log)" : "")
     << "</text>\n";

  for (std::size_t m = 0; m < result.methods.size(); ++m) {
    const auto& c = result.methods[m].curve;
    const char* color = palette[m % std::size(palette)];
    std::ostringstream band_hi, band_lo, line;
    band_hi.precision(6);
    band_lo.precision(6);
    line.precision(6);
    bool any = false;
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      if (std::isnan(c.mean[i])) continue;
      band_hi << px(c.grid[i]) << ',' << py(c.max[i]) << ' ';
      line << px(c.grid[i]) << ',' << py(c.mean[i]) << ' ';
      any = true;
    }
    for (std::size_t i = c.grid.size(); i-- > 0;) {
      if (std::isnan(c.mean[i])) continue;
      band_lo << px(c.grid[i]) << ',' << py(c.min[i]) << ' ';
    }
    if (any) {
      os << "<polygon points=\"" << band_hi.str() << band_lo.str() << "\" fill=\"" << color
         << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
      os << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.8\"/>\n";
    }
    const double ly = top + 10 + 20.0 * m;
    os << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
    os << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">"
       << xml_escape(result.methods[m].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::filesystem::path write_experiment(const ExperimentResult& result,
                                       const std::filesystem::path& out_dir, bool log_y) {
  const std::filesystem::path root = out_dir / path_safe(result.name);
  std::filesystem::create_directories(root);
  for (const auto& m : result.methods) {
    const auto dir = root / path_safe(m.label);
    std::filesystem::create_directories(dir);
    for (std::size_t t = 0; t < m.runs.size(); ++t) {
      write_file(dir / ("trial_" + std::to_string(t) + ".csv"), emit_trace_csv(m.runs[t].trace));
    }
  }
  write_file(root / "summary.csv", emit_summary_csv(result));
  write_file(root / "table.csv", emit_table(result));
  write_file(root / "curves.svg", emit_convergence_plot(result, log_y, result.name));
  return root;
}

}  // namespace bfssd
