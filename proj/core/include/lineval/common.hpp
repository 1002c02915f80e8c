#ifndef LINEVAL_COMMON_HPP
#define LINEVAL_COMMON_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lineval {

/// Bad or missing input data (files, config, schema violations). CLI exit code 1.
class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A pipeline stage failed mid-run. CLI exit code 2.
class stage_error : public std::runtime_error {
 public:
  stage_error(std::string stage, const std::string& msg)
      : std::runtime_error("[" + stage + "] " + msg), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Canonical decimal formatting for report files. %.12g keeps means and
/// per-group reals re-parseable well past the 1e-6 consistency tolerance,
/// and normalizes -0 so reruns are byte-identical.
std::string format_double(double value);

/// FNV-1a 64-bit, used for content-addressed cache keys.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Runs fn(i) for i in [0, n) on `workers` threads (0 = hardware default,
/// capped by the LINEVAL_MAX_WORKERS environment variable). Work items must
/// write to disjoint state.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

/// Worker count after applying the environment cap.
unsigned effective_workers(unsigned requested);

}  // namespace lineval

#endif  // LINEVAL_COMMON_HPP
