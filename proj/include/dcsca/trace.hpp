#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace dcsca {

struct IterationTrace {
  int iteration = 0;
  double h_value = 0.0;
  double stationarity_gap = 0.0;
  double step_size = 0.0;
  double elapsed_seconds = 0.0;
};

/// CSV with header `iter,h,gap,gamma,seconds`, one row per record.
std::string trace_to_csv(const std::vector<IterationTrace>& trace);
/// JSON array with identical field names.
std::string trace_to_json(const std::vector<IterationTrace>& trace);

class Stopwatch {
 public:
  Stopwatch() : start_(clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

}  // namespace dcsca
