#pragma once

#include "capshare/model.hpp"

namespace capshare {

// One row of the built-in reference set (the published comparison tables).
// gate_* decide whether a cell participates in the regression exit status;
// cells whose printed reference value is provably inconsistent with the row
// inputs are shipped ungated with an explanatory footnote instead.
struct ReferenceRow {
  int table = 0;
  int row = 0;
  SystemConfig config;
  std::optional<double> reference_exact;
  std::optional<double> reference_approx;
  bool gate_exact = true;
  bool gate_approx = true;
  double exact_tolerance = 0.0005;
  double approx_tolerance = 0.0005;
  std::string footnote;
};

const std::vector<ReferenceRow>& reference_rows();

}  // namespace capshare
