#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "zspeedl/dataset.hpp"
#include "zspeedl/errors.hpp"
#include "zspeedl/predictor.hpp"

namespace zspeedl {

struct TimingStats {
  double avg_ms = 0.0;
  double std_ms = 0.0;  // population standard deviation over the timed runs
  double min_ms = 0.0;
  std::size_t repeats = 0;
  std::size_t warmup = 0;
  std::string device_label;
};

inline constexpr std::size_t kDefaultWarmup = 10;
inline constexpr std::size_t kDefaultRepeats = 100;

// Instrumentation called immediately before the first and after the last
// timed run. Tests use it to count allocations inside the timed region.
struct TimedRegionHooks {
  void (*enter)() = nullptr;
  void (*leave)() = nullptr;
};
void set_timed_region_hooks(TimedRegionHooks hooks) noexcept;
TimedRegionHooks timed_region_hooks() noexcept;

TimingStats summarize_ns(const std::vector<std::int64_t>& samples_ns, std::size_t warmup, std::string device_label);

// Runs `op` warmup times untimed, then `repeats` times timed individually with
// the monotonic clock, all on the calling thread.
template <typename Op>
TimingStats time_closure(Op&& op, std::size_t warmup, std::size_t repeats, std::string device_label = {}) {
  if (repeats == 0) throw UsageError("time_closure: repeats must be at least 1");
  using Clock = std::chrono::steady_clock;
  using Result = std::invoke_result_t<Op&>;
  [[maybe_unused]] volatile std::size_t sink = 0;
  auto call = [&] {
    if constexpr (std::is_void_v<Result>) {
      op();
    } else {
      sink = static_cast<std::size_t>(op());
    }
  };
  for (std::size_t i = 0; i < warmup; ++i) call();
  std::vector<std::int64_t> samples(repeats);
  const TimedRegionHooks hooks = timed_region_hooks();
  if (hooks.enter) hooks.enter();
  for (std::size_t i = 0; i < repeats; ++i) {
    const auto t0 = Clock::now();
    call();
    const auto t1 = Clock::now();
    samples[i] = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  }
  if (hooks.leave) hooks.leave();
  return summarize_ns(samples, warmup, std::move(device_label));
}

// Per-sample classification latency on one fixed unseen test row, candidates
// = unseen classes. Predictor preparation happens before timing.
TimingStats bench_classification(const Model& model, const DatasetBundle& bundle, std::size_t warmup,
                                 std::size_t repeats, const std::string& device_label);

// Latency of classifying `batch` consecutive unseen test rows per timed run.
TimingStats bench_batch(const Model& model, const DatasetBundle& bundle, std::size_t batch, std::size_t warmup,
                        std::size_t repeats, const std::string& device_label);

// Frames per second of extraction followed by classification.
double compose_fps(double t_extract_ms, double t_classify_ms);

struct BenchEntry {
  std::string method;
  std::string backbone_tag;
  std::size_t feature_dim = 0;
  TimingStats stats;

  friend bool operator==(const BenchEntry& a, const BenchEntry& b) {
    return a.method == b.method && a.backbone_tag == b.backbone_tag && a.feature_dim == b.feature_dim &&
           a.stats.avg_ms == b.stats.avg_ms && a.stats.std_ms == b.stats.std_ms && a.stats.min_ms == b.stats.min_ms &&
           a.stats.repeats == b.stats.repeats && a.stats.warmup == b.stats.warmup;
  }
};

struct BenchReport {
  std::string toolkit_version = ZSPEEDL_VERSION;
  std::string created_at;
  std::string device_label;
  std::vector<BenchEntry> entries;

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

std::string utc_timestamp();

std::string report_to_json(const BenchReport& r);
BenchReport report_from_json(const std::string& text);

// Table layout: one row per method, one column per feature dimension,
// cells "avg ± std" in milliseconds with two decimals.
std::string report_to_csv(const BenchReport& r);

void write_report(const BenchReport& r, const std::filesystem::path& json_path,
                  const std::optional<std::filesystem::path>& csv_path = std::nullopt);
BenchReport read_report(const std::filesystem::path& path);

}  // namespace zspeedl

namespace zspeedl {

// One (method, backbone) point of the accuracy/speed trade-off.
struct FpsRow {
  std::string method;
  std::string backbone_tag;
  std::size_t feature_dim = 0;
  double extract_ms = 0.0;
  double classify_ms = 0.0;
  double fps = 0.0;
  std::optional<double> accuracy;  // percent, from a result record when supplied
};

struct FpsTable {
  std::vector<FpsRow> rows;
  std::vector<std::string> skipped;  // backbone tags present in only one report
};

// Joins extraction timings (one entry per backbone) with classification
// timings (one entry per method and backbone) on backbone_tag. Accuracy
// records are {method, backbone, mca | h}; mca wins when both are present.
FpsTable join_fps(const BenchReport& extract, const BenchReport& classify,
                  const std::vector<nlohmann::json>& accuracy = {});
std::string fps_to_csv(const FpsTable& t);

}  // namespace zspeedl
