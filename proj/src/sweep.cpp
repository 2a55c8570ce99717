#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "specres/experiments.hpp"

namespace specres {

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::PiC: return "pi_c";
    case SweepVariable::LambdaC: return "lambda_c";
    case SweepVariable::Kappa: return "kappa";
  }
  return "?";
}

SweepVariable parse_sweep_variable(const std::string& text) {
  if (text == "pi_c") return SweepVariable::PiC;
  if (text == "lambda_c") return SweepVariable::LambdaC;
  if (text == "kappa") return SweepVariable::Kappa;
  throw DomainError("unknown sweep variable '" + text + "' (expected pi_c|lambda_c|kappa)");
}

std::vector<double> SweepSpec::points() const {
  std::vector<double> pts(steps);
  if (steps == 1) {
    pts[0] = from;
    return pts;
  }
  for (std::uint32_t i = 0; i < steps; ++i) {
    pts[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
  pts.back() = to;
  return pts;
}

void validate_sweep(const SweepSpec& sweep, const MarketParams& params) {
  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os << "invalid " << to_string(sweep.variable) << " sweep [" << sweep.from << ", " << sweep.to
       << "] with " << sweep.steps << " steps: " << why;
    throw ConfigError(os.str());
  };
  if (!std::isfinite(sweep.from) || !std::isfinite(sweep.to)) fail("bounds must be finite");
  if (sweep.steps < 2) fail("need at least 2 steps");
  if (sweep.from > sweep.to) fail("'from' must not exceed 'to'");
  switch (sweep.variable) {
    case SweepVariable::PiC:
      if (sweep.from < 0.0 || sweep.to > 1.0) fail("pi_c must stay inside [0, 1]");
      break;
    case SweepVariable::LambdaC:
      if (sweep.from <= 0.0 || sweep.to >= params.lambda_n()) {
        fail("lambda_c must stay inside (0, lambda_n) with lambda_n = " + format_number(params.lambda_n()));
      }
      break;
    case SweepVariable::Kappa:
      if (sweep.from < 0.0) fail("kappa must be nonnegative");
      break;
  }
}

std::vector<SweepRow> run_sweep(const MarketParams& params, const SweepSpec& sweep, SolveMode mode,
                                std::optional<double> r_max) {
  validate_sweep(sweep, params);
  std::vector<SweepRow> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double v : sweep.points()) {
    const MarketParams p = sweep.variable == SweepVariable::PiC       ? params.with_pi_c(v)
                           : sweep.variable == SweepVariable::LambdaC ? params.with_lambda_c(v)
                                                                      : params.with_kappa(v);
    SweepRow row;
    row.value = v;
    try {
      const SolveResult res = solve(p, mode, r_max);
      row.menu = res.menu;
      row.profit = res.profit;
      row.existence_ok = res.existence_ok;
      row.boundary_flag = res.boundary_flag;
      row.solved = true;
    } catch (const SolveError&) {
      row.menu = {nan, nan, nan, nan};
      row.profit = nan;
      row.existence_ok = false;
      row.boundary_flag = rebate_nonmc_numeric(p, r_max.value_or(default_r_max(p))).boundary_flag;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_sweep_csv(std::ostream& os, SweepVariable variable, const std::vector<SweepRow>& rows) {
  os << kSweepCsvHeader << '\n';
  const std::string name = to_string(variable);
  for (const SweepRow& r : rows) {
    os << name << ',' << format_number(r.value) << ',' << format_number(r.menu.p_c) << ','
       << format_number(r.menu.r_c) << ',' << format_number(r.menu.p_n) << ','
       << format_number(r.menu.r_n) << ',' << format_number(r.profit) << ','
       << (r.existence_ok ? "true" : "false") << ',' << (r.boundary_flag ? "true" : "false") << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepCsvHeader) {
    throw ConfigError("sweep CSV: unexpected header");
  }
  auto number = [](const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
  };
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 9) throw ConfigError("sweep CSV: expected 9 columns in '" + line + "'");
    SweepRow r;
    r.value = number(f[1]);
    r.menu = {number(f[2]), number(f[3]), number(f[4]), number(f[5])};
    r.profit = number(f[6]);
    r.existence_ok = f[7] == "true";
    r.boundary_flag = f[8] == "true";
    r.solved = std::isfinite(r.menu.p_c);
    rows.push_back(r);
  }
  return rows;
}

void write_sweep_svg(std::ostream& os, SweepVariable variable, const std::vector<SweepRow>& rows) {
  constexpr double kWidth = 720, kHeight = 480;
  constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  struct Series {
    const char* label;
    const char* color;
    bool dashed;
    double ContractMenu::*field;
  };
  const std::array<Series, 4> series{{
      {"p_c", "#1f77b4", false, &ContractMenu::p_c},
      {"r_c", "#1f77b4", true, &ContractMenu::r_c},
      {"p_n", "#d62728", false, &ContractMenu::p_n},
      {"r_n", "#d62728", true, &ContractMenu::r_n},
  }};

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = 0.0, y_hi = -std::numeric_limits<double>::infinity();
  for (const SweepRow& r : rows) {
    x_lo = std::min(x_lo, r.value);
    x_hi = std::max(x_hi, r.value);
    if (!r.solved) continue;
    for (const Series& s : series) {
      y_lo = std::min(y_lo, r.menu.*s.field);
      y_hi = std::max(y_hi, r.menu.*s.field);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (!std::isfinite(y_hi) || y_hi <= y_lo) y_hi = y_lo + 1.0;
  y_hi *= 1.05;

  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double y) { return kTop + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h; };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  auto coord = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  const std::string name = to_string(variable);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << "Optimal contract menu vs " << name << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / kTicks;
    const double yv = y_lo + (y_hi - y_lo) * i / kTicks;
    os << "<line x1=\"" << coord(sx(xv)) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << coord(sx(xv))
       << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << coord(sx(xv)) << "\" y=\"" << kTop + plot_h + 20 << "\" text-anchor=\"middle\">"
       << fmt(xv) << "</text>\n";
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << coord(sy(yv)) << "\" x2=\"" << kLeft << "\" y2=\""
       << coord(sy(yv)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << coord(sy(yv) + 4) << "\" text-anchor=\"end\">" << fmt(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">" << name
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << kTop + plot_h / 2 << ")\">MU</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    // Unsolved points split the line into separate polylines.
    std::vector<std::string> segments;
    std::string current;
    for (const SweepRow& r : rows) {
      if (!r.solved) {
        if (!current.empty()) segments.push_back(current), current.clear();
        continue;
      }
      if (!current.empty()) current += ' ';
      current += coord(sx(r.value)) + ',' + coord(sy(r.menu.*s.field));
    }
    if (!current.empty()) segments.push_back(current);
    for (const std::string& pts : segments) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\""
         << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << pts << "\"/>\n";
    }
    const double ly = kTop + 20 + 20.0 * static_cast<double>(k);
    const double lx = kLeft + plot_w + 15;
    os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 30 << "\" y2=\"" << ly << "\" stroke=\""
       << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    os << "<text x=\"" << lx + 38 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace specres
