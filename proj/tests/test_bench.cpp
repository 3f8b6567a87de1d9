#include <atomic>
#include <chrono>
#include <cstdlib>
#include <memory>
#include <new>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixture.hpp"
#include "json.hpp"
#include "zspeedl/bench.hpp"
#include "zspeedl/experiment.hpp"

using namespace zspeedl;

// Allocation counter for the timed-region checks. Counting is switched on
// only between the harness hooks.
namespace {
std::atomic<bool> g_counting{false};
std::atomic<std::size_t> g_allocs{0};
void enter_region() {
  g_allocs = 0;
  g_counting = true;
}
void leave_region() { g_counting = false; }
}  // namespace

void* operator new(std::size_t n) {
  if (g_counting.load(std::memory_order_relaxed)) g_allocs.fetch_add(1, std::memory_order_relaxed);
  if (void* p = std::malloc(n ? n : 1)) return p;
  throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace {

void busy_wait(std::chrono::nanoseconds d) {
  const auto end = std::chrono::steady_clock::now() + d;
  while (std::chrono::steady_clock::now() < end) {
  }
}

BenchEntry entry(std::string method, std::size_t dim, double avg) {
  BenchEntry e;
  e.method = std::move(method);
  e.backbone_tag = "net" + std::to_string(dim);
  e.feature_dim = dim;
  e.stats.avg_ms = avg;
  e.stats.std_ms = avg / 10;
  e.stats.min_ms = avg * 0.9;
  e.stats.repeats = 100;
  e.stats.warmup = 10;
  return e;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("busy-wait of 2 ms is measured as at least 2 ms") {
    const TimingStats s = time_closure([] { busy_wait(std::chrono::milliseconds(2)); }, 2, 20, "host");
    CHECK(s.min_ms >= 2.0);
    CHECK(s.avg_ms >= 2.0);
    CHECK(s.avg_ms < 2.0 + 5.0);  // generous scheduler-jitter allowance
    CHECK(s.min_ms <= s.avg_ms);
    CHECK(s.std_ms >= 0.0);
    CHECK(s.repeats == 20);
    CHECK(s.warmup == 2);
    CHECK(s.device_label == "host");
  }

  TEST_CASE("single repeat has zero spread; no-op invariants hold") {
    const TimingStats one = time_closure([] { return 1; }, 0, 1);
    CHECK(one.std_ms == 0.0);
    const TimingStats five = time_closure([] {}, 0, 5);
    CHECK(five.avg_ms >= 0.0);
    CHECK(five.min_ms <= five.avg_ms);
    CHECK_THROWS_AS(time_closure([] {}, 0, 0), UsageError);
  }

  TEST_CASE("summary statistics use the population standard deviation") {
    const TimingStats s = summarize_ns({1'000'000, 3'000'000}, 0, "");
    CHECK(s.avg_ms == doctest::Approx(2.0));
    CHECK(s.std_ms == doctest::Approx(1.0));
    CHECK(s.min_ms == doctest::Approx(1.0));
  }

  TEST_CASE("warmup runs are not timed but are executed") {
    int calls = 0;
    time_closure([&] { ++calls; }, 7, 3);
    CHECK(calls == 10);
  }

  TEST_CASE("errors inside the measured operation abort the measurement") {
    CHECK_THROWS_AS(time_closure([]() -> int { throw NumericalError("boom"); }, 0, 3), NumericalError);
  }

  TEST_CASE("allocation counter sees allocations inside the timed region") {
    set_timed_region_hooks({enter_region, leave_region});
    time_closure([] { return std::make_unique<std::vector<int>>(100)->size(); }, 0, 4);
    set_timed_region_hooks({});
    CHECK(g_allocs.load() >= 4);
  }

  TEST_CASE("timed region performs no allocation for any method") {
    const DatasetBundle b = testing::make_fixture(90);
    set_timed_region_hooks({enter_region, leave_region});
    for (Method m : all_methods()) {
      CAPTURE(to_string(m));
      Hyperparameters hp;
      if (m == Method::eszsl) hp = {{"gamma", "1"}, {"lambda", "1"}};
      if (m == Method::sae) hp = {{"lambda", "1"}};
      if (m == Method::dem) hp = {{"hidden", "16"}, {"epochs", "2"}};
      if (m == Method::dap) hp = {{"epochs", "2"}};
      if (m == Method::gen_softmax || m == Method::gen_decoder) hp = {{"n_per_class", "10"}, {"epochs", "2"}};
      const Model model = train_method(m, b, hp, 1).model;
      const TimingStats s = bench_classification(model, b, 3, 20, "host");
      CHECK(g_allocs.load() == 0);
      CHECK(s.repeats == 20);
      const TimingStats batch = bench_batch(model, b, 4, 1, 5, "host");
      CHECK(g_allocs.load() == 0);
      CHECK(batch.min_ms <= batch.avg_ms);
    }
    set_timed_region_hooks({});
  }

  TEST_CASE("pure arithmetic op has coefficient of variation below 0.5") {
    bool ok = false;
    for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
      const TimingStats s = time_closure(
          [] {
            double acc = 0.0;
            for (int i = 1; i < 20000; ++i) acc += 1.0 / i;
            return static_cast<std::size_t>(acc);
          },
          10, 100);
      ok = s.std_ms / s.avg_ms < 0.5;
    }
    CHECK(ok);
  }

  TEST_CASE("compose_fps") {
    CHECK(compose_fps(25.57, 0.04) == doctest::Approx(1000.0 / 25.61).epsilon(1e-15));
    CHECK(std::round(compose_fps(25.57, 0.04) * 100) / 100 == 39.05);
    CHECK(compose_fps(1000, 0) == 1.0);
    CHECK(compose_fps(500, 500) == 1.0);
    CHECK_THROWS_AS(compose_fps(0, 0), DataError);
    CHECK_THROWS_AS(compose_fps(-1, 2), DataError);
  }

  TEST_CASE("report JSON round trips and has sorted keys") {
    BenchReport r;
    r.created_at = "2026-01-01T00:00:00Z";
    r.device_label = "desktop";
    r.entries.push_back(entry("eszsl", 2048, 0.04));
    const std::string text = report_to_json(r);
    CHECK(report_from_json(text) == r);
    const auto j = nlohmann::json::parse(text);
    for (const char* k : {"toolkit_version", "created_at", "device_label", "entries"}) CHECK(j.contains(k));
    CHECK(j.at("toolkit_version") == ZSPEEDL_VERSION);
    CHECK(text.find("\"avg_ms\"") < text.find("\"backbone_tag\""));

    const auto dir = testing::scratch_dir("report");
    write_report(r, dir / "r.json", dir / "r.csv");
    CHECK(read_report(dir / "r.json") == r);
    CHECK(std::filesystem::exists(dir / "r.csv"));
    r.entries.clear();
    CHECK_THROWS_AS(write_report(r, dir / "e.json"), DataError);
  }

  TEST_CASE("CSV mirrors the methods-by-dimension table layout") {
    BenchReport r;
    const std::vector<std::string> methods{"dap", "iap", "eszsl", "sae", "dem", "gen-softmax", "gen-decoder", "x"};
    const std::vector<std::size_t> dims{1024, 1280, 2048, 4032};
    for (const auto& m : methods)
      for (std::size_t d : dims) r.entries.push_back(entry(m, d, 1.234));
    const std::string csv = report_to_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 9);
    CHECK(lines[0] == "method,1024,1280,2048,4032");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 4);
      CHECK(lines[i].rfind(methods[i - 1] + ",", 0) == 0);
    }
    CHECK(lines[1].find("1.23 ± 0.12") != std::string::npos);
  }

  TEST_CASE("fps join pairs reports on backbone and lists unmatched tags") {
    BenchReport ext, cls;
    ext.entries = {entry("extract", 1024, 310.52), entry("extract", 2048, 1639.46)};
    ext.entries[0].backbone_tag = "mobilenet";
    ext.entries[1].backbone_tag = "resnet101";
    cls.entries = {entry("eszsl", 1024, 0.81), entry("eszsl", 1280, 1.08)};
    cls.entries[0].backbone_tag = "mobilenet";
    cls.entries[1].backbone_tag = "mobilenetv2";
    const FpsTable t = join_fps(ext, cls, {nlohmann::json{{"method", "eszsl"}, {"backbone", "mobilenet"}, {"mca", 50.91}}});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].fps == doctest::Approx(1000.0 / 311.33));
    CHECK(std::round(t.rows[0].fps * 100) / 100 == 3.21);
    CHECK(t.rows[0].accuracy == 50.91);
    CHECK(t.skipped == std::vector<std::string>{"mobilenetv2", "resnet101"});
    CHECK(fps_to_csv(t).find("eszsl,mobilenet,1024,310.52,0.81,3.21,50.91") != std::string::npos);
  }
}
