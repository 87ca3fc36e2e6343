#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "grainforce/experiment.hpp"

namespace gf = grainforce;

namespace {

gf::ConditionReport find(const gf::GridResult& g, gf::Interface i, double d, double a, gf::ForceMode m) {
  for (const auto& r : g.all_records()) {
    const auto& c = r.condition;
    if (c.interface == i && c.duration_ms == d && c.force_amplitude_n == a && c.force_mode == m) return r;
  }
  ADD_FAILURE() << "missing cell";
  return {};
}

const gf::GridResult& grid() {
  static const gf::GridResult g = gf::run_grid();
  return g;
}

}  // namespace

TEST(Enumerate, MatchesBruteForceOracle) {
  const auto cells = gf::enumerate_conditions();
  ASSERT_EQ(cells.size(), 48u);
  std::size_t included = 0;
  std::set<std::string> ids;
  for (const auto& e : cells) {
    const auto& c = e.condition;
    // Oracle: below one full 250 Hz cycle, or the KSFR 1 ms constant cell.
    const bool sine_short = c.force_mode == gf::ForceMode::Sine && c.duration_ms < 4.0;
    const bool housing = c.interface == gf::Interface::KSFR && c.duration_ms == 1.0;
    EXPECT_EQ(e.included, !sine_short && !housing) << gf::condition_id(c);
    if (e.included) ++included;
    EXPECT_EQ(e.included, e.reason.empty());
    ids.insert(gf::condition_id(c));
  }
  EXPECT_EQ(included, 39u);
  EXPECT_EQ(ids.size(), 48u);
}

TEST(Enumerate, ReasonStrings) {
  using gf::ForceMode, gf::Interface;
  EXPECT_EQ(gf::exclusion_reason({Interface::CT, 1.0, 0.43, ForceMode::Constant}), "");
  EXPECT_EQ(gf::exclusion_reason({Interface::CT, 1.0, 0.43, ForceMode::Sine}), "vibratory-pulse-below-one-cycle");
  EXPECT_EQ(gf::exclusion_reason({Interface::KSFR, 1.0, 1.0, ForceMode::Constant}), "ksfr-1ms-housing-artifact");
  EXPECT_EQ(gf::exclusion_reason({Interface::KSFR, 1.0, 1.0, ForceMode::Sine}),
            "vibratory-pulse-below-one-cycle,ksfr-1ms-housing-artifact");
  EXPECT_EQ(gf::exclusion_reason({Interface::KSFR, 10.0, 0.72, ForceMode::Sine}), "");
}

TEST(RunCondition, ExcludedCellThrows) {
  try {
    gf::run_condition({gf::Interface::KSFR, 1.0, 1.0, gf::ForceMode::Constant});
    FAIL();
  } catch (const gf::Error& e) {
    EXPECT_EQ(e.code(), gf::ErrorCode::ExcludedCondition);
  }
}

TEST(RunCondition, SineCycleCountAndConstantRms) {
  auto sine = gf::run_condition({gf::Interface::CT, 10.0, 0.72, gf::ForceMode::Sine});
  ASSERT_TRUE(sine.report.cycle_count);
  EXPECT_DOUBLE_EQ(*sine.report.cycle_count, 2.5);
  auto constant = gf::run_condition({gf::Interface::CT, 50.0, 0.43, gf::ForceMode::Constant});
  EXPECT_FALSE(constant.report.cycle_count);
  EXPECT_NEAR(*constant.report.rms_force_n, 0.43, 1e-12);
  EXPECT_NEAR(*constant.report.pulse_energy_n2s, 0.43 * 0.43 * 0.05, 1e-12);
  EXPECT_EQ(*constant.report.pulse_runs, 3u);
  // raised-cosine oracle: mean of (0.5 - 0.5 cos)^2 over whole cycles is 3/8
  auto whole = gf::run_condition({gf::Interface::CT, 100.0, 0.72, gf::ForceMode::Sine});
  EXPECT_NEAR(*whole.report.rms_force_n, 0.72 * std::sqrt(3.0 / 8.0), 1e-9);
}

TEST(RunCondition, KsfrFullAmplitudeStopsTheHand) {
  auto run = gf::run_condition({gf::Interface::KSFR, 100.0, 1.00, gf::ForceMode::Constant});
  EXPECT_DOUBLE_EQ(*run.report.peak_velocity_deficit_m_per_s, gf::KSFRParams{}.intended_velocity_m_per_s);
  EXPECT_FALSE(run.report.peak_displacement_m);
}

TEST(Grid, CountsAndPartitions) {
  const auto& g = grid();
  EXPECT_EQ(g.reports.size(), 39u);
  EXPECT_EQ(g.exclusions.size(), 9u);
  EXPECT_EQ(g.failures, 0u);
  gf::GridOptions ct;
  ct.only = gf::Interface::CT;
  EXPECT_EQ(gf::run_grid({}, ct).reports.size(), 21u);
  gf::GridOptions ksfr;
  ksfr.only = gf::Interface::KSFR;
  EXPECT_EQ(gf::run_grid({}, ksfr).reports.size(), 18u);
}

TEST(Grid, AlignedWithinToleranceEverywhere) {
  for (const auto& r : grid().reports) {
    ASSERT_TRUE(r.measured_lag_ms) << gf::condition_id(r.condition);
    EXPECT_LE(std::abs(*r.measured_lag_ms), 1.0) << gf::condition_id(r.condition);
  }
}

TEST(Grid, ResponseNondecreasingInAmplitudeAndDuration) {
  const auto& g = grid();
  for (auto iface : gf::kInterfaces) {
    for (auto mode : gf::kForceModes) {
      for (double d : gf::kDurationsMs) {
        double prev = -1.0;
        for (double a : {0.43, 0.72, 1.00}) {
          auto r = find(g, iface, d, a, mode);
          if (!r.included) continue;
          EXPECT_GE(*r.peak_response(), prev) << gf::condition_id(r.condition);
          prev = *r.peak_response();
        }
      }
      for (double a : gf::kForceAmplitudesN) {
        double prev = -1.0;
        for (double d : {1.0, 10.0, 50.0, 100.0}) {
          auto r = find(g, iface, d, a, mode);
          if (!r.included) continue;
          EXPECT_GE(*r.peak_response(), prev) << gf::condition_id(r.condition);
          prev = *r.peak_response();
        }
      }
    }
  }
}

TEST(Grid, ReportIsDeterministicAcrossThreadCounts) {
  gf::GridOptions one;
  one.threads = 1;
  EXPECT_EQ(gf::report_jsonl(gf::run_grid({}, one)), gf::report_jsonl(grid()));
}

TEST(Grid, JsonRecordShape) {
  auto j = gf::to_json(find(grid(), gf::Interface::CT, 10.0, 0.72, gf::ForceMode::Sine));
  EXPECT_EQ(j["id"], "ct_10ms_0.72N_sine250");
  EXPECT_EQ(j["reported_sensation"], "pulsed");
  EXPECT_TRUE(j["peak_velocity_deficit_m_per_s"].is_null());
  auto x = gf::to_json(find(grid(), gf::Interface::KSFR, 1.0, 0.43, gf::ForceMode::Constant));
  EXPECT_EQ(x["included"], false);
  EXPECT_EQ(x["exclusion_reason"], "ksfr-1ms-housing-artifact");
  EXPECT_TRUE(x["rms_force_n"].is_null());
}

TEST(Grid, WritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "grainforce_experiment_test";
  std::filesystem::remove_all(dir);
  gf::GridOptions opts;
  opts.only = gf::Interface::KSFR;
  opts.out_dir = dir;
  gf::run_grid({}, opts);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "ksfr_100ms_1.00N_constant_trace.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "ksfr_1ms_1.00N_constant_trace.csv"));
  std::filesystem::remove_all(dir);
}
