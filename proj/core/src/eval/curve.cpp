// SPDX-License-Identifier: Apache-2.0
#include "trelab/eval/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "trelab/error.hpp"

namespace trelab::eval {
namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

void check_ratios(std::span<const double> ratios) {
  if (ratios.empty()) throw ConfigError("no sampling ratios given");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0 && ratios[i] <= 1.0)) throw ConfigError("sampling ratio " + fmt("%g", ratios[i]) + " outside (0, 1]");
    if (i > 0 && !(ratios[i] > ratios[i - 1])) throw ConfigError("sampling ratios must be strictly ascending");
  }
}

std::vector<double> parse_ratios(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("sampling ratio '" + item + "' is not a number");
    }
  }
  check_ratios(out);
  return out;
}

std::vector<CurvePoint> sample_efficiency_curve(const data::Dataset& train, std::span<const double> ratios,
                                                std::size_t n_seeds, std::uint64_t base_seed,
                                                const CurveTrainer& trainer) {
  check_ratios(ratios);
  if (n_seeds == 0) throw ConfigError("curve needs at least one seed");
  std::vector<CurvePoint> points;
  for (double ratio : ratios) {
    for (std::size_t k = 0; k < n_seeds; ++k) {
      const std::uint64_t seed = base_seed + k;
      points.push_back({ratio, seed, trainer(data::stratified_subsample(train, ratio, seed), seed)});
    }
  }
  return points;
}

std::vector<CurveMean> curve_means(std::span<const CurvePoint> points) {
  std::vector<CurveMean> out;
  std::vector<std::size_t> counts;
  for (const CurvePoint& p : points) {
    if (out.empty() || out.back().ratio != p.ratio) {
      out.push_back({p.ratio, 0.0});
      counts.push_back(0);
    }
    out.back().mean_f1 += p.f1;
    ++counts.back();
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].mean_f1 /= static_cast<double>(counts[i]);
  return out;
}

std::string curve_csv(std::span<const CurvePoint> points) {
  std::string out = "ratio,seed,f1\n";
  for (const CurvePoint& p : points) out += fmt("%g", p.ratio) + ',' + std::to_string(p.seed) + ',' + fmt("%.6f", p.f1) + '\n';
  return out;
}

std::string curve_svg(std::span<const CurvePoint> points) {
  constexpr double kWidth = 480, kHeight = 320, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](double ratio) { return kLeft + ratio * plot_w; };
  auto y_of = [&](double f1) { return kTop + (1.0 - f1) * plot_h; };

  std::ostringstream svg;
  svg << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n'
      << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")" << kHeight
      << R"(" viewBox="0 0 )" << kWidth << ' ' << kHeight << R"(" font-family="sans-serif" font-size="11">)" << '\n'
      << R"(<rect x="0" y="0" width=")" << kWidth << R"(" height=")" << kHeight << R"(" fill="white"/>)" << '\n';
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << fmt("%.2f", y_of(v)) << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << fmt("%.2f", y_of(v)) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt("%.2f", y_of(v) + 4)
        << "\" text-anchor=\"end\">" << fmt("%.2f", v) << "</text>\n"
        << "<text x=\"" << fmt("%.2f", x_of(v)) << "\" y=\"" << kTop + plot_h + 16
        << "\" text-anchor=\"middle\">" << fmt("%g", v * 100) << "%</text>\n";
  }
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">training data used</text>\n"
      << "<text x=\"14\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << kTop + plot_h / 2 << ")\">validation F1</text>\n";

  for (const CurvePoint& p : points) {
    svg << "<circle cx=\"" << fmt("%.2f", x_of(p.ratio)) << "\" cy=\"" << fmt("%.2f", y_of(p.f1))
        << "\" r=\"2.5\" fill=\"#9ecae1\"/>\n";
  }
  const std::vector<CurveMean> means = curve_means(points);
  if (!means.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < means.size(); ++i) {
      svg << (i ? " " : "") << fmt("%.2f", x_of(means[i].ratio)) << ',' << fmt("%.2f", y_of(means[i].mean_f1));
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace trelab::eval
