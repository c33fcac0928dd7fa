#include "ddrbf/model_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ddrbf/errors.hpp"
#include "test_util.hpp"

namespace ddrbf {
namespace {

TEST(ModelIo, RoundTripIsByteIdentical) {
  std::mt19937_64 rng(31);
  for (int n : {1, 2, 3}) {
    const DiffeoNet net = testing::random_net(rng, n, 4, 5);
    const std::string text = serialize(net);
    const DiffeoNet back = deserialize(text);
    EXPECT_EQ(serialize(back), text);
    ASSERT_EQ(back.depth(), net.depth());
    for (int t = 0; t < net.depth(); ++t) {
      EXPECT_EQ(back.layers()[t].weights(), net.layers()[t].weights());
      EXPECT_EQ(back.layers()[t].centers(), net.layers()[t].centers());
      EXPECT_EQ(back.layers()[t].spec().covariance(), net.layers()[t].spec().covariance());
      EXPECT_EQ(back.layers()[t].margin(), net.layers()[t].margin());
    }
    const Vec x = testing::random_vec(rng, n);
    EXPECT_EQ(back.forward(x), net.forward(x));
  }
}

TEST(ModelIo, EmptyNet) {
  const DiffeoNet net(3);
  const DiffeoNet back = deserialize(serialize(net));
  EXPECT_EQ(back.dim(), 3);
  EXPECT_EQ(back.depth(), 0);
}

TEST(ModelIo, OptionalFieldsRoundTrip) {
  std::mt19937_64 rng(32);
  ModelFile model{testing::random_net(rng, 2, 2, 3), BaseFunction::limit_cycle_ring(2, 1.25, 0.5),
                  Normalization{(Vec(2) << 0.1, -3.0).finished(), (Vec(2) << 0.02, 0.5).finished()}};
  const std::string text = serialize(model);
  const ModelFile back = deserialize_model(text);
  EXPECT_EQ(serialize(back), text);
  ASSERT_TRUE(back.base.has_value());
  EXPECT_EQ(back.base->kind(), BaseKind::kLimitCycleRing);
  ASSERT_TRUE(back.normalization.has_value());
  EXPECT_EQ(back.normalization->offset, model.normalization->offset);
}

TEST(ModelIo, RejectsBoxViolation) {
  const double rho = weight_bound(1, 1, KernelSpec::isotropic(1, 1.0), 0);
  std::ostringstream text;
  text.precision(17);
  text << R"({"version": 1, "dim": 1, "layers": [{"margin": 0.99, "sigma": [[1]], "centers": [[0]], "weights": [[)"
       << 1.01 * rho << "]]}]}";
  try {
    (void)deserialize(text.str());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("layer 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(0, 0)"), std::string::npos) << msg;
  }
}

TEST(ModelIo, RejectsMalformed) {
  EXPECT_THROW((void)deserialize("{not json"), ParseError);
  EXPECT_THROW((void)deserialize(R"({"version": 99, "dim": 1, "layers": []})"), ParseError);
  EXPECT_THROW((void)deserialize(R"({"version": 1, "layers": []})"), ParseError);
  EXPECT_THROW(
      (void)deserialize(R"({"version": 1, "dim": 2, "layers": [{"margin": 0.99, "sigma": [[1]], "centers": [[0]], "weights": [[0]]}]})"),
      ParseError);
}

TEST(ModelIo, SaveAndLoad) {
  std::mt19937_64 rng(33);
  const auto dir = std::filesystem::temp_directory_path() / "ddrbf_model_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.json";
  const ModelFile model{testing::random_net(rng, 2, 3, 4), BaseFunction::point_attractor(2), std::nullopt};
  save_model(path, model);
  EXPECT_EQ(serialize(load_model(path)), serialize(model));
  EXPECT_FALSE(std::filesystem::exists(dir / "model.json.tmp"));
  EXPECT_THROW((void)load_model(dir / "missing.json"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace ddrbf
