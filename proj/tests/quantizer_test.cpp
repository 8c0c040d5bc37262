#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "soskit/quantizer.hpp"

using namespace soskit;

TEST(Templates, PublishedExamples) {
  const TemplateSet& ts = templates();
  EXPECT_EQ(ts.limb[symbol_id("Right-Middle", BodyPart::LA)], Vec3(1, 0, 0));
  const Vec3 ft = ts.limb[symbol_id("Forward-Top", BodyPart::LA)];
  EXPECT_NEAR(ft.x(), 0.0, 1e-12);
  EXPECT_NEAR(ft.y(), 1.0 / std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(ft.z(), 3.0 / std::sqrt(10.0), 1e-12);
}

TEST(Templates, UnitNormAndDistinct) {
  const TemplateSet& ts = templates();
  for (const Vec3& u : ts.limb) EXPECT_NEAR(u.norm(), 1.0, 1e-12);
  for (const Vec3& u : ts.root) EXPECT_NEAR(u.norm(), 1.0, 1e-12);
  for (int a = 0; a < kNumLimbSymbols; ++a)
    for (int b = a + 1; b < kNumLimbSymbols; ++b) EXPECT_GT((ts.limb[a] - ts.limb[b]).norm(), 0.1);
  for (int d = 0; d < kNumDirections; ++d) EXPECT_EQ(ts.root[d], ts.limb[symbol_index(Level::Middle, d)]);
}

TEST(Symbols, CanonicalIds) {
  EXPECT_EQ(symbol_name(25, BodyPart::LA), "Place-High");
  EXPECT_EQ(symbol_name(24, BodyPart::SP), "Place-Low");
  EXPECT_EQ(symbol_id("Right-Middle", BodyPart::RA), 10);
  EXPECT_EQ(symbol_id("Forward", BodyPart::RT), 0);
  EXPECT_EQ(symbol_id("BackLeft-Low", BodyPart::LL), 5);
  EXPECT_EQ(symbol_name(2, BodyPart::RT), "Right");
}

TEST(Symbols, NameIdBijection) {
  for (BodyPart p : kAllParts) {
    std::set<std::string> names;
    for (int id = 0; id < num_symbols(p); ++id) {
      const std::string n = symbol_name(id, p);
      EXPECT_TRUE(names.insert(n).second);
      EXPECT_EQ(symbol_id(n, p), id);
    }
  }
}

TEST(Symbols, UnknownNameListsValid) {
  try {
    symbol_id("Up", BodyPart::LA);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Forward-Top"), std::string::npos);
  }
  EXPECT_THROW(symbol_id("Forward-Top", BodyPart::RT), ValidationError);
  EXPECT_THROW(symbol_name(8, BodyPart::RT), ValidationError);
}

TEST(SoftQuantize, AxisInputSharpBeta) {
  const auto u = templates().for_part(BodyPart::LA);
  const Vec3 q = soft_quantize_vector<double>(Vec3(1, 0, 0), u, 50.0);
  EXPECT_EQ(hard_symbol(Vec3(1, 0, 0), u), symbol_id("Right-Middle", BodyPart::LA));
  // Independent evaluation of the softmax.
  double z = 0.0;
  Vec3 acc = Vec3::Zero();
  for (const Vec3& t : u) {
    const double w = std::exp(50.0 * t.x());
    z += w;
    acc += w * t;
  }
  EXPECT_LE((q - acc / z).norm(), 1e-12);
  EXPECT_LE((q - Vec3(1, 0, 0)).norm(), 1e-3);
}

TEST(SoftQuantize, UniformLogitsGiveTemplateMean) {
  // Direction orthogonal to every template is impossible in 3D; use beta -> 0.
  const auto u = templates().for_part(BodyPart::LA);
  Vec3 mean = Vec3::Zero();
  for (const Vec3& t : u) mean += t;
  mean /= static_cast<double>(u.size());
  const Vec3 q = soft_quantize_direction<double>(Vec3(0.3, -0.2, 0.9).normalized(), u, 1e-12);
  EXPECT_LE((q - mean).norm(), 1e-10);
}

TEST(SoftQuantize, PlaceLowAtAnyBeta) {
  for (double beta : {0.1, 1.0, 10.0, 1000.0})
    EXPECT_EQ(hard_symbol(Vec3(0, 0, -beta), BodyPart::LA), kPlaceLow);
}

TEST(SoftQuantize, ArgmaxScaleInvariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 500; ++i) {
    const Vec3 o(g(rng), g(rng), g(rng));
    const double c = scale(rng);
    EXPECT_EQ(hard_symbol(Vec3(c * o), BodyPart::LA), hard_symbol(o, BodyPart::LA));
    EXPECT_EQ(hard_symbol(Vec3(c * Vec3(o.x(), o.y(), 0)), BodyPart::RT), hard_symbol(Vec3(o.x(), o.y(), 0), BodyPart::RT));
  }
}

TEST(SoftQuantize, ConvergesToArgmaxAtHighBeta) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  int checked = 0;
  for (int i = 0; i < 2000 && checked < 200; ++i) {
    const Vec3 dir = Vec3(g(rng), g(rng), g(rng)).normalized();
    const auto u = templates().for_part(BodyPart::LA);
    std::vector<double> logits;
    for (const Vec3& t : u) logits.push_back(dir.dot(t));
    std::vector<double> sorted = logits;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] < 0.05) continue;
    ++checked;
    const Vec3 q = soft_quantize_direction<double>(dir, u, 100.0);
    EXPECT_LE((q - u[hard_symbol(dir, u)]).norm(), 1e-2);
  }
  EXPECT_EQ(checked, 200);
}

TEST(SoftQuantize, GradientMatchesFiniteDifferences) {
  using AD = Eigen::AutoDiffScalar<Eigen::Vector3d>;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  const auto u = templates().for_part(BodyPart::LA);
  int checked = 0;
  while (checked < 100) {
    const Vec3 o = Vec3(g(rng), g(rng), g(rng));
    const Vec3 dir = o.normalized();
    std::vector<double> logits;
    for (const Vec3& t : u) logits.push_back(dir.dot(t));
    std::sort(logits.rbegin(), logits.rend());
    if (logits[0] - logits[1] < 0.05) continue;
    ++checked;
    Vec3T<AD> x;
    for (int k = 0; k < 3; ++k) x[k] = AD(o[k], 3, k);
    const Vec3T<AD> q = soft_quantize_vector<AD>(x, u, 10.0);
    for (int out = 0; out < 3; ++out) {
      for (int k = 0; k < 3; ++k) {
        const double h = 1e-5;
        Vec3 plus = o, minus = o;
        plus[k] += h;
        minus[k] -= h;
        const double fd = (soft_quantize_vector<double>(plus, u, 10.0)[out] -
                           soft_quantize_vector<double>(minus, u, 10.0)[out]) / (2 * h);
        const double an = q[out].derivatives()[k];
        if (std::max(std::abs(fd), std::abs(an)) < 1e-8) continue;
        EXPECT_LE(std::abs(fd - an) / std::max(std::abs(fd), std::abs(an)), 1e-4);
      }
    }
  }
}

TEST(SoftQuantize, MirrorSymmetry) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int i = 0; i < 500; ++i) {
    const Vec3 o(g(rng), g(rng), g(rng));
    const Vec3 mirrored(-o.x(), o.y(), o.z());
    const int a = hard_symbol(o, BodyPart::LA);
    EXPECT_EQ(hard_symbol(mirrored, BodyPart::LA), mirror_symbol(a, BodyPart::LA));
    const Vec3 h(o.x(), o.y(), 0.0);
    EXPECT_EQ(hard_symbol(Vec3(-h.x(), h.y(), 0.0), BodyPart::RT), mirror_symbol(hard_symbol(h, BodyPart::RT), BodyPart::RT));
  }
  EXPECT_EQ(symbol_name(mirror_symbol(symbol_id("ForwardRight-Top", BodyPart::LA), BodyPart::LA), BodyPart::LA),
            "ForwardLeft-Top");
}

TEST(SoftQuantize, FeatureArrayUsesPerPartSets) {
  OrientationFeatures f;
  f.o = {{Vec3(1, 0, 0), Vec3(0, 0, -2), Vec3(0, 0, -1), Vec3(0, 0, -1), Vec3(0, 1, 3), Vec3(0, 0, 1)}};
  f.degenerate = {{}};
  const auto q = soft_quantize(f, 10.0);
  EXPECT_EQ(q.hard_ids[0][index(BodyPart::RT)], symbol_id("Right", BodyPart::RT));
  EXPECT_EQ(q.hard_ids[0][index(BodyPart::LA)], kPlaceLow);
  EXPECT_EQ(q.hard_ids[0][index(BodyPart::RA)], symbol_id("Forward-Top", BodyPart::RA));
  EXPECT_EQ(q.hard_ids[0][index(BodyPart::SP)], kPlaceHigh);
  EXPECT_THROW(soft_quantize(f, 0.0), ValidationError);
}
