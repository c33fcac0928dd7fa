#include "ddrbf/dataset.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ddrbf/errors.hpp"
#include "ddrbf/lyapunov.hpp"
#include "test_util.hpp"

namespace ddrbf {
namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

TrajectoryDataset parse(const std::string& text, CsvFormat format = CsvFormat::kGeneric) {
  std::istringstream in(text);
  return parse_trajectories(in, "inline.csv", format);
}

TEST(Csv, MinimalWithVelocities) {
  const auto d = parse(
      "traj_id,t,x1,x2,xd1,xd2\n"
      "0,0,0.1,-0.30000000000000004,1.5,2\n"
      "0,0.5,1e-3,7,0,-2.25\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim, 2);
  EXPECT_EQ(d.samples[0].x, v2(0.1, -0.30000000000000004));
  EXPECT_EQ(d.samples[0].xdot, v2(1.5, 2));
  EXPECT_EQ(d.samples[1].x, v2(1e-3, 7));
  EXPECT_EQ(d.samples[1].xdot, v2(0, -2.25));
  EXPECT_EQ(d.samples[1].timestamp, 0.5);
  EXPECT_FALSE(d.samples[1].attractor);
}

TEST(Csv, ErrorsNameFileAndLine) {
  try {
    (void)parse("traj_id,t,x1,x2\n0,0,1,2\n0,1,1\n");
    FAIL();
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("inline.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3"), std::string::npos) << msg;
  }
  EXPECT_THROW((void)parse("traj_id,t,x1\n0,0,abc\n"), ParseError);
  EXPECT_THROW((void)parse("id,t,x1\n0,0,1\n"), ParseError);
  EXPECT_THROW((void)parse("traj_id,t,x1\n0,1,1\n0,0.5,2\n"), ParseError);
  EXPECT_THROW((void)parse("traj_id,t,x1\n0,0,nan\n"), ParseError);
}

TEST(Csv, DimensionMismatchAcrossFilesRejected) {
  const auto dir = std::filesystem::temp_directory_path() / "ddrbf_dataset_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "a.csv") << "traj_id,t,x1,x2\n0,0,1,2\n0,1,2,3\n";
  std::ofstream(dir / "b.csv") << "traj_id,t,x1\n0,0,1\n0,1,2\n";
  EXPECT_THROW((void)load_trajectories({dir / "a.csv", dir / "b.csv"}, CsvFormat::kGeneric), ParseError);
  const auto both = load_trajectories({dir / "a.csv", dir / "a.csv"}, CsvFormat::kGeneric);
  EXPECT_EQ(both.trajectory_ids().size(), 2u);
  try {
    (void)load_trajectories({dir / "nope.csv"}, CsvFormat::kGeneric);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.csv"), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST(Csv, WriteReadRoundTrip) {
  std::mt19937_64 rng(61);
  TrajectoryDataset d;
  d.dim = 3;
  for (int tr = 0; tr < 3; ++tr) {
    for (int i = 0; i < 20; ++i) {
      d.samples.push_back({testing::random_vec(rng, 3, -1e3, 1e3), testing::random_vec(rng, 3),
                           tr * 5, 0.01 * i + uniform01(rng) * 1e-3, i == 19});
    }
  }
  std::stringstream buffer;
  write_trajectories(buffer, d);
  const auto back = parse_trajectories(buffer, "roundtrip", CsvFormat::kGeneric);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.samples[i].x, d.samples[i].x);
    EXPECT_EQ(back.samples[i].xdot, d.samples[i].xdot);
    EXPECT_EQ(back.samples[i].timestamp, d.samples[i].timestamp);
    EXPECT_EQ(back.samples[i].trajectory_id, d.samples[i].trajectory_id);
    EXPECT_EQ(back.samples[i].attractor, d.samples[i].attractor);
  }
}

TEST(Velocities, ExactForLinearMotion) {
  const auto v = compute_velocities({v2(0, 0), v2(0.2, -0.1), v2(0.4, -0.2)}, {0, 0.1, 0.2});
  for (const Vec& x : v) EXPECT_LT((x - v2(2, -1)).cwiseAbs().maxCoeff(), 1e-12);
  const auto c = compute_velocities({v2(1, 1), v2(1, 1), v2(1, 1)}, {0, 1, 2});
  for (const Vec& x : c) EXPECT_EQ(x, Vec::Zero(2));
}

TEST(Velocities, InteriorExactForQuadratic) {
  const double h = 0.125;  // dyadic step keeps t² exact
  std::vector<Vec> pos;
  std::vector<double> ts;
  for (int i = 0; i < 9; ++i) {
    ts.push_back(i * h);
    pos.push_back(v2(ts.back() * ts.back(), 0));
  }
  const auto v = compute_velocities(pos, ts);
  for (int i = 1; i < 8; ++i) EXPECT_EQ(v[i](0), 2 * ts[i]);
  EXPECT_NEAR(v[0](0), h, 1e-15);
}

TEST(Velocities, MissingColumnsAreDifferenced) {
  const auto d = parse("traj_id,t,x1\n0,0,0\n0,0.5,1\n0,1,2\n1,0,5\n1,2,5\n");
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(d.samples[i].xdot(0), 2.0);
  EXPECT_EQ(d.samples[3].xdot(0), 0.0);
}

TEST(Lasa, FinalSampleIsAttractor) {
  const auto d = parse("traj_id,t,x1,x2\n1,0,0,0\n1,1,1,1\n1,2,2,2\n2,0,5,5\n2,1,2,2\n", CsvFormat::kLasa);
  EXPECT_TRUE(d.samples[2].attractor);
  EXPECT_EQ(d.samples[2].xdot, Vec::Zero(2));
  EXPECT_TRUE(d.samples[4].attractor);
  EXPECT_FALSE(d.samples[1].attractor);
  EXPECT_EQ(final_point_equilibrium(d), v2(2, 2));
}

TEST(Lasa, ShippedShapesHaveSevenDemonstrations) {
  const std::filesystem::path file = std::filesystem::path(DDRBF_DATA_DIR) / "lasa" / "Angle.csv";
  const auto d = load_trajectories({file}, CsvFormat::kLasa);
  EXPECT_EQ(d.trajectory_ids().size(), 7u);
  EXPECT_EQ(d.size(), 7000u);
  d.validate();
}

TEST(Normalize, EquilibriumToOriginAndInvertible) {
  std::mt19937_64 rng(62);
  TrajectoryDataset d;
  d.dim = 2;
  for (int tr = 0; tr < 3; ++tr) {
    for (int i = 0; i < 30; ++i) {
      d.samples.push_back({testing::random_vec(rng, 2, -40, 25), testing::random_vec(rng, 2, -5, 5), tr, double(i), false});
    }
    d.samples.back().x = v2(-7.5, 3.25);
  }
  const Vec eq = final_point_equilibrium(d);
  const auto n = normalize(d, eq);
  ASSERT_TRUE(n.normalization.has_value());
  for (const Sample& s : n.samples) EXPECT_LE(s.x.cwiseAbs().maxCoeff(), 1.0 + 1e-15);
  for (int tr = 0; tr < 3; ++tr) EXPECT_LE(n.samples[30 * tr + 29].x.norm(), 1e-12);
  const auto back = denormalize(n);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_LE((back.samples[i].x - d.samples[i].x).cwiseAbs().maxCoeff(), 1e-12 * 40);
    EXPECT_LE((back.samples[i].xdot - d.samples[i].xdot).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW((void)normalize(n, Vec::Zero(2)), ArgumentError);
}

TEST(Normalize, ViolationRateUnchangedByPositiveScaling) {
  // Point base with the identity net: the descent sign of xᵀẋ is preserved by
  // equal per-axis scaling around the equilibrium.
  std::mt19937_64 rng(63);
  TrajectoryDataset d;
  d.dim = 2;
  for (int i = 0; i < 300; ++i) {
    d.samples.push_back({testing::random_vec(rng, 2, -3, 3), testing::random_vec(rng, 2), 0, double(i), false});
  }
  const Normalization uniform_scale{Vec::Zero(2), Vec::Constant(2, 0.37)};
  const LyapunovCandidate cand(BaseFunction::point_attractor(2), DiffeoNet(2));
  EXPECT_EQ(violation_rate(cand, d, 0.0).violation_rate,
            violation_rate(cand, apply_normalization(d, uniform_scale), 0.0).violation_rate);
}

TEST(Subsample, KeepsAttractorsAndIsDeterministic) {
  TrajectoryDataset d;
  d.dim = 1;
  for (int i = 0; i < 1000; ++i) d.samples.push_back({Vec::Constant(1, i), Vec::Zero(1), 0, double(i), i == 999});
  const auto a = subsample(d, 200, 5), b = subsample(d, 200, 5), c = subsample(d, 200, 6);
  ASSERT_EQ(a.size(), 201u);
  EXPECT_TRUE(a.samples.back().attractor);
  std::set<double> seen;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.samples[i].x, b.samples[i].x);
    if (i > 0) EXPECT_GT(a.samples[i].timestamp, a.samples[i - 1].timestamp);
    seen.insert(a.samples[i].x(0));
  }
  EXPECT_EQ(seen.size(), 201u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a.samples[i].x != c.samples[i].x;
  EXPECT_TRUE(differs);
  EXPECT_EQ(subsample(d, 5000, 1).size(), 1000u);
}

TEST(Dataset, ValidateAndSelect) {
  TrajectoryDataset d;
  d.dim = 1;
  d.samples = {{Vec::Zero(1), Vec::Zero(1), 3, 0, false}, {Vec::Ones(1), Vec::Zero(1), 4, 0, false},
               {Vec::Ones(1), Vec::Zero(1), 3, 1, false}};
  d.validate();
  EXPECT_EQ(d.trajectory_ids(), (std::vector<int>{3, 4}));
  EXPECT_EQ(d.select({3}).size(), 2u);
  d.samples[2].timestamp = 0;
  EXPECT_THROW(d.validate(), ArgumentError);
}

}  // namespace
}  // namespace ddrbf
