#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace fracwave::detail {

// Thin wrapper over FFTW's complex-to-complex transforms. Plans are cached
// per shape and reused through the new-array execute interface; planning is
// serialized because FFTW's planner is not thread-safe.
class FftEngine {
 public:
  static FftEngine& instance() {
    static FftEngine engine;
    return engine;
  }

  // In-place transform of `data` interpreted with the given per-axis sizes.
  // sign is FFTW_FORWARD or FFTW_BACKWARD; no normalization is applied.
  void transform(std::vector<std::complex<double>>& data,
                 const std::vector<int>& shape, int sign) {
    fftw_plan plan = get_plan(shape, sign, data.size());
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
  }

  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

 private:
  FftEngine() = default;

  ~FftEngine() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get_plan(const std::vector<int>& shape, int sign, std::size_t total) {
    const auto key = std::make_pair(shape, sign);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    // Plan on a scratch buffer; FFTW_ESTIMATE plans do not depend on the
    // array contents and tolerate differently-aligned execute arrays when
    // combined with FFTW_UNALIGNED.
    std::vector<std::complex<double>> scratch(total);
    auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan =
        fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), ptr, ptr, sign,
                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

}  // namespace fracwave::detail
