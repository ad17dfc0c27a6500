#pragma once

#include <string>

#include "sig/datasets.hpp"
#include "sig/points.hpp"

namespace sig::plot {

struct PlotOptions {
  int size = 480;                // square canvas, pixels
  std::size_t max_points = 20000;  // leading rows drawn; 0 means all
};

// Scatter with center markers and 3 sigma_data circles for 2-D data, bars of
// the empirical pmf next to the true pmf for 1-D discrete data. Empty samples
// give axes only. Output depends on nothing but the inputs.
std::string render_svg(const Points& samples, const data::DatasetSpec& spec, const PlotOptions& options = {});

}  // namespace sig::plot
