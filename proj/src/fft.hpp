#pragma once

#include <complex>

#include <fftw3.h>

namespace vscope::detail {

/// FFTW r2c/c2r plan pair for an n^3 real grid. Plans are created once per n
/// (planner calls are serialized) and executed through the new-array interface,
/// which is thread-safe.
class FftPlans {
 public:
  static const FftPlans& get(int n);

  void r2c(const double* in, std::complex<double>* out) const;
  /// Destroys `in`.
  void c2r(std::complex<double>* in, double* out) const;

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans();

 private:
  explicit FftPlans(int n);
  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace vscope::detail
