#pragma once

#include <string>
#include <vector>

#include "qstomo/types.hpp"

namespace qstomo {

struct SinogramCell {
  cplx value{0.0, 0.0};
  cplx oracle{0.0, 0.0};
  double T = 0.0;
  double dt = 0.0;
  double graf_phase = 0.0;
  bool ok = true;
};

// Cells indexed (angle, offset, speed, j) with j fastest. j label: 1 or 2 for an axis,
// 0 for the direction perpendicular to v.
struct Sinogram {
  std::vector<double> angles;
  std::vector<double> offsets;
  std::vector<double> speeds;
  std::vector<int> js;
  std::vector<SinogramCell> cells;

  size_t index(size_t a, size_t o, size_t s, size_t j) const {
    return ((a * offsets.size() + o) * speeds.size() + s) * js.size() + j;
  }
  size_t size() const { return angles.size() * offsets.size() * speeds.size() * js.size(); }
  bool complete() const;
  // Im(value) (or Im(oracle)) on the (angle, offset) table for one speed and j.
  std::vector<double> projection(size_t speed, size_t j, bool use_oracle = false) const;
};

std::string sinogram_csv_header();
std::string sinogram_csv_row(double theta, double offset, double speed, int j, const SinogramCell& c);
void write_sinogram_csv(const std::string& path, const Sinogram& s);
// Geometry is rebuilt from the rows (first-seen order of each column).
Sinogram read_sinogram_csv(const std::string& path);

}  // namespace qstomo
