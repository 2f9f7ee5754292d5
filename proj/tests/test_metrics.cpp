#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "poseref/datagen.hpp"
#include "poseref/metrics.hpp"
#include "support/test_util.hpp"

using namespace poseref;
using namespace poseref::testutil;

namespace {

// Direct-summation oracles.
double brute_add(const PointCloud& model, const RigidTransform& gt, const RigidTransform& est) {
  double sum = 0.0;
  for (const Vec3& m : model.points) sum += (est.apply(m) - gt.apply(m)).norm();
  return sum / static_cast<double>(model.size());
}

double brute_adi(const PointCloud& model, const RigidTransform& gt, const RigidTransform& est) {
  double sum = 0.0;
  for (const Vec3& m1 : model.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& m2 : model.points) best = std::min(best, (est.apply(m1) - gt.apply(m2)).norm());
    sum += best;
  }
  return sum / static_cast<double>(model.size());
}

}  // namespace

TEST_CASE("add basics and oracle") {
  Rng rng(3);
  const PointCloud model = random_cloud(rng, 200, 0.05);
  const RigidTransform gt = random_transform(rng);
  CHECK(add_distance(model, gt, gt) == 0.0);

  RigidTransform shifted = gt;
  shifted.translation += Vec3(0.01, 0, 0);
  CHECK(add_distance(model, gt, shifted) == doctest::Approx(0.01).epsilon(1e-12));

  for (int i = 0; i < 50; ++i) {
    const RigidTransform a = random_transform(rng);
    const RigidTransform b = random_transform(rng);
    CHECK(add_distance(model, a, b) == doctest::Approx(brute_add(model, a, b)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(add_distance(PointCloud{}, gt, gt), std::invalid_argument);
}

TEST_CASE("adi basics, rotational invariance, oracle") {
  const TriangleMesh cyl = make_cylinder(0.03, 0.08, 96);
  const ObjectModel model = build_object_model(cyl, {SymmetryVariant::kCylindrical, 5.0}, 0, 4096, 7);

  Rng rng(5);
  const RigidTransform gt = random_transform(rng);
  CHECK(adi_distance(model.target_cloud, gt, gt) == 0.0);

  // Rotating a cylinder about its axis leaves ADI near sampling noise.
  const RigidTransform spun(gt.rotation * Rotation::rot_z(rng.uniform(0.0, 2 * M_PI)), gt.translation);
  const double adi = adi_distance(model.target_cloud, gt, spun);
  const double add = add_distance(model.target_cloud, gt, spun);
  CHECK(adi < 0.004);  // mean sample spacing scale
  CHECK(add > 10.0 * adi);

  const PointCloud small = random_cloud(rng, 60, 0.05);
  for (int i = 0; i < 30; ++i) {
    const RigidTransform a = random_transform(rng);
    const RigidTransform b = random_transform(rng);
    CHECK(adi_distance(small, a, b) == doctest::Approx(brute_adi(small, a, b)).epsilon(1e-12));
  }
}

TEST_CASE("adi <= add and common-transform invariance") {
  Rng rng(7);
  const PointCloud model = random_cloud(rng, 100, 0.05);
  for (int i = 0; i < 1000; ++i) {
    const RigidTransform a = random_transform(rng);
    const RigidTransform b = random_transform(rng);
    const double add = add_distance(model, a, b);
    const double adi = adi_distance(model, a, b);
    CHECK(adi <= add + 1e-12);
  }
  for (int i = 0; i < 50; ++i) {
    const RigidTransform a = random_transform(rng);
    const RigidTransform b = random_transform(rng);
    const RigidTransform common = random_transform(rng);
    CHECK(add_distance(model, compose(common, a), compose(common, b)) ==
          doctest::Approx(add_distance(model, a, b)).epsilon(1e-9));
    CHECK(adi_distance(model, compose(common, a), compose(common, b)) ==
          doctest::Approx(adi_distance(model, a, b)).epsilon(1e-9));
  }
}

TEST_CASE("recall_at examples and monotonicity") {
  std::vector<EvalRecord> records;
  for (int i = 0; i < 10; ++i) {
    EvalRecord r;
    r.add = r.adi = 0.0;
    r.diameter = 0.1;
    records.push_back(r);
  }
  CHECK(recall_at(records, 0.1) == 1.0);

  std::vector<EvalRecord> single(1);
  single[0].add = single[0].adi = 0.05 * 0.1;
  single[0].diameter = 0.1;
  CHECK(recall_at(single, 0.02) == 0.0);
  CHECK(recall_at(single, 0.05) == 1.0);

  // Mixed set vs hand count: errors k*0.01 of diameter 0.1, k = 0..9.
  std::vector<EvalRecord> mixed;
  for (int k = 0; k < 10; ++k) {
    EvalRecord r;
    r.add = r.adi = k * 0.01;
    r.diameter = 0.1;
    mixed.push_back(r);
  }
  // threshold 0.5d = 0.05: errors 0.00..0.05 pass -> 6/10.
  CHECK(recall_at(mixed, 0.5) == doctest::Approx(0.6));
  double prev = 0.0;
  for (double th : {0.0, 0.1, 0.2, 0.5, 0.9}) {
    const double r = recall_at(mixed, th);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK_THROWS_AS(recall_at({}, 0.1), std::invalid_argument);
}

TEST_CASE("recall uses ADI for symmetric objects only") {
  EvalRecord r;
  r.add = 0.09;
  r.adi = 0.01;
  r.diameter = 0.2;
  r.symmetric = false;
  CHECK(recall_at({r}, 0.1) == 0.0);  // ADD 0.09 > 0.02
  r.symmetric = true;
  CHECK(recall_at({r}, 0.1) == 1.0);  // ADI 0.01 <= 0.02
}

TEST_CASE("auc examples and refinement convergence") {
  std::vector<EvalRecord> zeros(5);
  for (auto& r : zeros) r.diameter = 0.1;
  CHECK(auc(zeros, 0.1, 100) == 1.0);

  std::vector<EvalRecord> half(1);
  half[0].add = half[0].adi = 0.05;
  half[0].diameter = 0.1;
  const double a = auc(half, 0.1, 100);
  CHECK(std::abs(a - 0.5) <= 1.0 / 100 + 1e-12);

  // Step-function integral converges with bin refinement.
  Rng rng(11);
  std::vector<EvalRecord> rand_records;
  for (int i = 0; i < 50; ++i) {
    EvalRecord r;
    r.add = r.adi = rng.uniform(0.0, 0.15);
    r.diameter = 0.1;
    rand_records.push_back(r);
  }
  const double coarse = auc(rand_records, 0.1, 100);
  const double fine = auc(rand_records, 0.1, 10000);
  CHECK(std::abs(coarse - fine) < 1e-2);
  CHECK(fine >= 0.0);
  CHECK(fine <= 1.0);
  CHECK_THROWS_AS(auc(rand_records, 0.1, 0), std::invalid_argument);
}
