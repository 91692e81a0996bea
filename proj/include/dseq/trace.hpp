#pragma once

#include <vector>

namespace dseq {

struct AlammTraceRow {
  int iter = 0;
  int outer = 0;
  double wpsl_db = 0.0;
  double merit = 0.0;         // W at the accepted point, current multipliers
  double merit_before = 0.0;  // W at the step's starting point, same multipliers
  double max_stopband_violation = 0.0;  // max(0, max_s e_s - U_max)
  double papr = 0.0;
  double wall_ms = 0.0;
};

struct AlammTrace {
  std::vector<AlammTraceRow> rows;
};

struct AmTraceRow {
  int iter = 0;
  double gap = 0.0;
  double phi = 0.0;
  double sigma_ratio = 0.0;
  double wall_ms = 0.0;
};

struct AmTrace {
  std::vector<AmTraceRow> rows;
};

}  // namespace dseq
