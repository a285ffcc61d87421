#include "fft.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace vscope::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftPlans::FftPlans(int n) : n_(n) {
  const std::size_t nreal = std::size_t(n) * n * n;
  const std::size_t ncomplex = std::size_t(n) * n * (n / 2 + 1);
  double* r = fftw_alloc_real(nreal);
  fftw_complex* c = fftw_alloc_complex(ncomplex);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_ = fftw_plan_dft_r2c_3d(n, n, n, r, c, flags);
  backward_ = fftw_plan_dft_c2r_3d(n, n, n, c, r, flags);
  fftw_free(r);
  fftw_free(c);
  if (!forward_ || !backward_) throw std::runtime_error("FFTW plan creation failed");
}

FftPlans::~FftPlans() {
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(backward_);
}

const FftPlans& FftPlans::get(int n) {
  static std::map<int, std::unique_ptr<FftPlans>> cache;
  std::lock_guard lock(planner_mutex());
  auto& slot = cache[n];
  if (!slot) slot.reset(new FftPlans(n));
  return *slot;
}

void FftPlans::r2c(const double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void FftPlans::c2r(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
}

}  // namespace vscope::detail
