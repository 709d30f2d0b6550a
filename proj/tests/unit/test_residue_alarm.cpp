#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <filesystem>

#include "mpfmfd/residue_alarm.hpp"
#include "mpfmfd/rng.hpp"
#include "test_support.hpp"

using namespace mpfmfd;
using mpfmfd::testing::make_series;

namespace {

ResidueStats stats_of(std::vector<double> mean, std::vector<double> sd, int w = 2, Index start = 0) {
  ResidueStats s;
  s.window_w = w;
  s.start = start;
  s.mean_stat = std::move(mean);
  s.std_stat = std::move(sd);
  return s;
}

ResidueSeries noise(std::uint64_t seed, std::size_t n, double sd, double offset = 0.0) {
  Xoshiro256 rng(seed);
  ResidueSeries r;
  for (std::size_t i = 0; i < n; ++i) r.values.push_back(offset + sd * rng.normal());
  return r;
}

double average(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST(Residue, Examples) {
  const ResidueSeries r = residue(make_series(0, {2, 3}), make_series(0, {2, 2}));
  EXPECT_EQ(r.start, 0);
  EXPECT_EQ(r.values, (std::vector<double>{0, 1}));
  const ResidueSeries zero = residue(make_series(4, {1.5, -2, 7}), make_series(4, {1.5, -2, 7}));
  EXPECT_EQ(zero.values, (std::vector<double>{0, 0, 0}));
  EXPECT_MFD_ERROR(residue(make_series(0, {1, 2}), make_series(5, {1, 2})), ErrorCode::NoOverlap);
}

TEST(Residue, UsesIndexIntersection) {
  const ResidueSeries r = residue(make_series(0, {1, 2, 3, 4}), make_series(2, {0, 0, 0}));
  EXPECT_EQ(r.start, 2);
  EXPECT_EQ(r.values, (std::vector<double>{3, 4}));
}

TEST(RollingStats, Examples) {
  const ResidueStats a = rolling_stats(make_series(0, {1, -1, 1, -1}), 4);
  EXPECT_EQ(a.start, 3);
  EXPECT_EQ(a.mean_stat, (std::vector<double>{0}));
  EXPECT_EQ(a.std_stat, (std::vector<double>{1}));
  const ResidueStats b = rolling_stats(make_series(0, {2, 2, 2}), 2);
  EXPECT_EQ(b.mean_stat, (std::vector<double>{2, 2}));
  EXPECT_EQ(b.std_stat, (std::vector<double>{0, 0}));
  EXPECT_MFD_ERROR(rolling_stats(make_series(0, {1, 2, 3}), 1), ErrorCode::WindowTooSmall);
  EXPECT_MFD_ERROR(rolling_stats(make_series(0, {1, 2, 3}), 4), ErrorCode::WindowTooLarge);
}

TEST(RollingStats, MatchesHighPrecisionOracle) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Xoshiro256 rng(seed);
    ResidueSeries res;
    res.start = 17;
    for (int i = 0; i < 1000; ++i) res.values.push_back(1e3 * rng.uniform() + rng.normal());
    for (int w : {2, 7, 50}) {
      const ResidueStats stats = rolling_stats(res, w);
      ASSERT_EQ(stats.size(), 1000u - static_cast<std::size_t>(w) + 1);
      EXPECT_EQ(stats.start, 17 + w - 1);
      for (std::size_t i = 0; i < stats.size(); ++i) {
        Big sum = 0;
        for (int j = 0; j < w; ++j) sum += Big(res.values[i + static_cast<std::size_t>(j)]);
        const Big mean = sum / w;
        Big ss = 0;
        for (int j = 0; j < w; ++j) {
          const Big d = Big(res.values[i + static_cast<std::size_t>(j)]) - mean;
          ss += d * d;
        }
        const double m = static_cast<double>(abs(mean));
        const double s = static_cast<double>(sqrt(ss / w));
        EXPECT_NEAR(stats.mean_stat[i], m, 1e-12 * std::max(1.0, m));
        EXPECT_NEAR(stats.std_stat[i], s, 1e-12 * std::max(1.0, s));
      }
    }
  }
}

TEST(RollingStats, WindowValueDependsOnlyOnItsWindow) {
  ResidueSeries a = noise(5, 300, 1.0);
  ResidueSeries b = a;
  for (std::size_t i = 0; i < 100; ++i) b.values[i] = 1e6 * static_cast<double>(i);
  const ResidueStats sa = rolling_stats(a, 20);
  const ResidueStats sb = rolling_stats(b, 20);
  for (std::size_t i = 100; i < sa.size(); ++i) {
    EXPECT_EQ(sa.mean_stat[i], sb.mean_stat[i]);
    EXPECT_EQ(sa.std_stat[i], sb.std_stat[i]);
  }
}

TEST(Calibrate, Examples) {
  const ResidueStats s = stats_of({0.1, 0.3, 0.2}, {1, 2, 2});
  const Thresholds t1 = calibrate(s, 1.0);
  EXPECT_EQ(t1.mean_thr, 0.3);
  EXPECT_EQ(t1.std_thr, 2.0);
  const Thresholds t2 = calibrate(s, 1.5);
  EXPECT_DOUBLE_EQ(t2.mean_thr, 0.45);
  EXPECT_EQ(t2.std_thr, 3.0);
  EXPECT_MFD_ERROR(calibrate(stats_of({}, {}), 1.0), ErrorCode::EmptyStats);
  EXPECT_MFD_ERROR(calibrate(s, 0.5), ErrorCode::InvalidConfig);
}

TEST(Calibrate, MonotoneInCalibrationRange) {
  const ResidueSeries r = noise(8, 600, 1.0);
  Thresholds previous{};
  for (std::size_t n = 50; n <= r.values.size(); n += 25) {
    ResidueSeries prefix{0, std::vector<double>(r.values.begin(), r.values.begin() + static_cast<long>(n))};
    const Thresholds t = calibrate(rolling_stats(prefix, 50), 1.0);
    EXPECT_GE(t.mean_thr, previous.mean_thr);
    EXPECT_GE(t.std_thr, previous.std_thr);
    previous = t;
  }
}

TEST(Detect, Examples) {
  const Thresholds thr = calibrate(stats_of({0.3}, {1.0}), 1.0);
  EXPECT_TRUE(detect(stats_of({0.1, 0.2}, {0.5, 0.9}), thr).empty());
  const auto events = detect(stats_of({0.5}, {0.5}, 2, 9), thr);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].t, 9);
  EXPECT_EQ(events[0].trigger, Trigger::Mean);
  const auto both = detect(stats_of({0.3, 0.31, 0.1}, {1.0, 1.5, 1.5}), thr);
  ASSERT_EQ(both.size(), 2u);
  EXPECT_EQ(both[0].trigger, Trigger::Both);
  EXPECT_EQ(both[1].trigger, Trigger::Std);
}

TEST(Detect, CalibrationDataNeverAlarmsAgainstItself) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ResidueStats s = rolling_stats(noise(seed, 2000, 0.3, 0.05), 50);
    EXPECT_TRUE(detect(s, calibrate(s, 1.0)).empty());
  }
}

TEST(Detect, StatisticSeparation) {
  const ResidueStats clean = rolling_stats(noise(21, 5000, 1.0), 50);
  const ResidueStats noisy = rolling_stats(noise(22, 5000, 3.0), 50);
  const ResidueStats biased = rolling_stats(noise(23, 5000, 1.0, 2.0), 50);
  // Inflated variance: std grows about threefold, mean stays small relative to the bias case.
  EXPECT_NEAR(average(noisy.std_stat) / average(clean.std_stat), 3.0, 0.3);
  EXPECT_LT(average(noisy.mean_stat), 0.6);
  // Constant offset: mean tends to |b|, std unchanged.
  EXPECT_NEAR(average(biased.mean_stat), 2.0, 0.1);
  EXPECT_NEAR(average(biased.std_stat) / average(clean.std_stat), 1.0, 0.1);
}

TEST(MergeEpisodes, Examples) {
  auto ev = [](Index t, Trigger trigger = Trigger::Mean) { return AlarmEvent{t, trigger, 0.0, 0.0}; };
  const std::vector<AlarmEvent> a = {ev(5), ev(6, Trigger::Std), ev(7), ev(20)};
  const auto episodes = merge_episodes(a, 2);
  ASSERT_EQ(episodes.size(), 2u);
  EXPECT_EQ(episodes[0].start, 5);
  EXPECT_EQ(episodes[0].end, 7);
  EXPECT_EQ(episodes[0].triggers.to_string(), "mean|std");
  EXPECT_EQ(episodes[1].start, 20);
  EXPECT_EQ(episodes[1].end, 20);
  EXPECT_EQ(episodes[1].triggers.to_string(), "mean");
  EXPECT_TRUE(merge_episodes(std::vector<AlarmEvent>{}, 3).empty());
  const std::vector<AlarmEvent> b = {ev(5), ev(8)};
  EXPECT_EQ(merge_episodes(b, 3).size(), 1u);
  EXPECT_EQ(merge_episodes(b, 2).size(), 2u);
  const std::vector<AlarmEvent> unsorted = {ev(8), ev(5)};
  EXPECT_MFD_ERROR(merge_episodes(unsorted, 3), ErrorCode::UnsortedEvents);
}

TEST(ThresholdsFile, RoundTrip) {
  const ResidueStats s = rolling_stats(noise(3, 500, 0.7), 25);
  const Thresholds t = calibrate(s, 1.25);
  EXPECT_EQ(parse_thresholds(format_thresholds(t)), t);
  const auto path = std::filesystem::temp_directory_path() / "mpfmfd_test_thresholds.json";
  save_thresholds(t, path);
  EXPECT_EQ(load_thresholds(path), t);
  std::filesystem::remove(path);
  EXPECT_MFD_ERROR(parse_thresholds("{\"format\": \"x\"}"), ErrorCode::CorruptFile);
  EXPECT_MFD_ERROR(parse_thresholds("not json"), ErrorCode::CorruptFile);
}

TEST(AlarmsCsv, Layout) {
  const Thresholds thr = calibrate(stats_of({0.3}, {1.0}), 1.0);
  const std::vector<AlarmEvent> events = {{12, Trigger::Both, 0.5, 2.0}};
  EXPECT_EQ(format_alarms_csv(events, thr),
            "t,trigger,mean_value,std_value,mean_thr,std_thr\n12,both,0.5,2,0.3,1\n");
  const std::vector<AlarmEpisode> episodes = {{3, 9, TriggerSet{true, true}}};
  EXPECT_EQ(format_episodes_csv(episodes), "start,end,triggers\n3,9,mean|std\n");
}
