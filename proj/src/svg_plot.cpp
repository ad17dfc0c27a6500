#include "sig/svg_plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "sig/error.hpp"
#include "sig/metrics.hpp"

namespace sig::plot {
namespace {

constexpr double kMargin = 40.0;

// Fixed three-decimal coordinates keep the bytes stable across platforms.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, std::round(v * 1000.0) / 1000.0, std::chars_format::fixed, 3);
  std::string s(buf, res.ptr);
  if (s == "-0.000") s = "0.000";
  return s;
}

struct Frame {
  double x_lo, x_hi, y_lo, y_hi, size;
  double px(double x) const { return kMargin + (x - x_lo) / (x_hi - x_lo) * (size - 2 * kMargin); }
  double py(double y) const { return size - kMargin - (y - y_lo) / (y_hi - y_lo) * (size - 2 * kMargin); }
};

void axes(std::ostringstream& o, const Frame& f, const std::string& x_label, const std::string& y_label) {
  const double lo = kMargin, hi = f.size - kMargin;
  o << "<g class=\"axes\" stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
  o << "<line x1=\"" << num(lo) << "\" y1=\"" << num(hi) << "\" x2=\"" << num(hi) << "\" y2=\"" << num(hi) << "\"/>\n";
  o << "<line x1=\"" << num(lo) << "\" y1=\"" << num(lo) << "\" x2=\"" << num(lo) << "\" y2=\"" << num(hi) << "\"/>\n";
  o << "</g>\n";
  o << "<g class=\"labels\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  o << "<text x=\"" << num(lo) << "\" y=\"" << num(hi + 16) << "\">" << num(f.x_lo) << "</text>\n";
  o << "<text x=\"" << num(hi) << "\" y=\"" << num(hi + 16) << "\" text-anchor=\"end\">" << num(f.x_hi) << "</text>\n";
  o << "<text x=\"" << num(lo - 4) << "\" y=\"" << num(hi) << "\" text-anchor=\"end\">" << num(f.y_lo) << "</text>\n";
  o << "<text x=\"" << num(lo - 4) << "\" y=\"" << num(lo + 8) << "\" text-anchor=\"end\">" << num(f.y_hi) << "</text>\n";
  o << "<text x=\"" << num(f.size / 2) << "\" y=\"" << num(f.size - 8) << "\" text-anchor=\"middle\">" << x_label
    << "</text>\n";
  o << "<text x=\"12\" y=\"" << num(f.size / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 12 "
    << num(f.size / 2) << ")\">" << y_label << "</text>\n";
  o << "</g>\n";
}

std::string open_svg(int size) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
    << size << ' ' << size << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return o.str();
}

std::string continuous(const Points& samples, const data::DatasetSpec& spec, const PlotOptions& opt) {
  double lo = -1, hi = 1;
  for (const auto& c : spec.centers) {
    lo = std::min({lo, c[0], c[1]});
    hi = std::max({hi, c[0], c[1]});
  }
  if (spec.kind == data::DatasetKind::ring_noise) {
    lo = std::min(lo, -spec.radius);
    hi = std::max(hi, spec.radius);
  }
  lo -= 1.0;
  hi += 1.0;
  const Frame f{lo, hi, lo, hi, static_cast<double>(opt.size)};
  std::ostringstream o;
  o << open_svg(opt.size);
  o << "<defs><clipPath id=\"plot-area\"><rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\""
    << num(opt.size - 2 * kMargin) << "\" height=\"" << num(opt.size - 2 * kMargin) << "\"/></clipPath></defs>\n";
  axes(o, f, "x0", "x1");
  if (samples.empty()) {
    o << "</svg>\n";
    return o.str();
  }
  const std::size_t shown = opt.max_points == 0 ? samples.size() : std::min(samples.size(), opt.max_points);
  o << "<g class=\"samples\" fill=\"#1f77b4\" fill-opacity=\"0.35\" clip-path=\"url(#plot-area)\">\n";
  for (std::size_t i = 0; i < shown; ++i) {
    o << "<circle cx=\"" << num(f.px(samples(i, 0))) << "\" cy=\"" << num(f.py(samples(i, 1))) << "\" r=\"1.2\"/>\n";
  }
  o << "</g>\n";
  const double scale = (opt.size - 2 * kMargin) / (hi - lo);
  o << "<g class=\"mode-balls\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1\">\n";
  for (const auto& c : spec.centers) {
    o << "<circle class=\"mode-ball\" cx=\"" << num(f.px(c[0])) << "\" cy=\"" << num(f.py(c[1])) << "\" r=\""
      << num(3 * spec.sigma_data * scale) << "\"/>\n";
  }
  o << "</g>\n<g class=\"centers\" stroke=\"#d62728\" stroke-width=\"1.5\">\n";
  for (const auto& c : spec.centers) {
    const double x = f.px(c[0]), y = f.py(c[1]);
    o << "<path class=\"center\" d=\"M" << num(x - 4) << ' ' << num(y) << "H" << num(x + 4) << "M" << num(x) << ' '
      << num(y - 4) << "V" << num(y + 4) << "\"/>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

std::string discrete(const Points& samples, const data::DatasetSpec& spec, const PlotOptions& opt) {
  const auto values = metrics::to_integers(samples);
  std::int64_t top = 20;
  std::vector<double> empirical, truth;
  if (!values.empty()) {
    const auto rep = metrics::discrete_fit_report(values, spec);
    top = rep.max_value;
    empirical = rep.empirical;
    truth = rep.truth;
  }
  double y_hi = 0;
  for (double v : empirical) y_hi = std::max(y_hi, v);
  for (double v : truth) y_hi = std::max(y_hi, v);
  if (y_hi <= 0) y_hi = 1;
  const Frame f{-0.5, static_cast<double>(top) + 0.5, 0.0, y_hi * 1.05, static_cast<double>(opt.size)};
  std::ostringstream o;
  o << open_svg(opt.size);
  axes(o, f, "x", "pmf");
  if (values.empty()) {
    o << "</svg>\n";
    return o.str();
  }
  const double slot = (opt.size - 2 * kMargin) / (static_cast<double>(top) + 1.0);
  const double bar = slot * 0.4;
  auto bars = [&](const char* cls, const char* color, const std::vector<double>& pmf, double offset) {
    o << "<g class=\"" << cls << "\" fill=\"" << color << "\">\n";
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      const double x = f.px(static_cast<double>(k)) + offset;
      const double y = f.py(pmf[k]);
      o << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(bar) << "\" height=\""
        << num(f.py(0) - y) << "\"/>\n";
    }
    o << "</g>\n";
  };
  bars("empirical", "#1f77b4", empirical, -bar);
  bars("truth", "#d62728", truth, 0.0);
  o << "</svg>\n";
  return o.str();
}

}  // namespace

std::string render_svg(const Points& samples, const data::DatasetSpec& spec, const PlotOptions& options) {
  if (options.size < 4 * static_cast<int>(kMargin)) throw ConfigError("plot: canvas too small");
  if (samples.dim > 2) {
    throw ConfigError("plot: " + std::to_string(samples.dim) + "-dimensional samples are not supported (1-D or 2-D only)");
  }
  if (!samples.empty() && samples.dim != spec.dim()) {
    throw ConfigError("plot: samples have dimension " + std::to_string(samples.dim) + " but the " +
                      data::to_string(spec.kind) + " spec has dimension " + std::to_string(spec.dim()));
  }
  return spec.discrete() ? discrete(samples, spec, options) : continuous(samples, spec, options);
}

}  // namespace sig::plot
