#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "lipgan/media.hpp"
#include "lipgan/metrics.hpp"
#include "test_util.hpp"

using namespace lipgan;

TEST_CASE("psnr substitution cases") {
  const ImageD a = testutil::random_crop<double>(48, 1);
  CHECK(psnr(a, a) == 100.0);
  ImageD b = a;
  b.data.array() += 0.1;
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(psnr(a, b) == psnr(b, a));
  CHECK_THROWS_AS(psnr(a, ImageD(24, 24, 3)), std::invalid_argument);
}

TEST_CASE("ssim identity and symmetry") {
  const ImageD a = testutil::random_crop<double>(48, 2);
  const ImageD b = testutil::random_crop<double>(48, 3);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  CHECK(ssim(a, b) >= -1.0);
  CHECK(ssim(a, b) <= 1.0);
  CHECK_THROWS_AS(ssim(ImageD(8, 8, 3), ImageD(8, 8, 3)), std::invalid_argument);
}

TEST_CASE("psnr/ssim match scikit-image references on 20 frozen pairs") {
  std::ifstream f("fixtures/metrics/reference.json");
  REQUIRE(f.good());
  const nlohmann::json records = nlohmann::json::parse(f);
  REQUIRE(records.size() == 20);
  for (const auto& rec : records) {
    const ImageD a =
        frame_to_image<double>(read_png("fixtures/metrics/" + rec.at("a").get<std::string>()));
    const ImageD b =
        frame_to_image<double>(read_png("fixtures/metrics/" + rec.at("b").get<std::string>()));
    CHECK(std::abs(psnr(a, b) - rec.at("psnr_db").get<double>()) < 1e-3);
    CHECK(std::abs(ssim(a, b) - rec.at("ssim").get<double>()) < 1e-3);
  }
}

TEST_CASE("lmd substitution cases and symmetry") {
  LandmarkSet a, b, c;
  for (int i = 0; i < 10; ++i) {
    a.push_back({i * 1.0, i * 2.0});
    b.push_back({i * 1.0 + 3.0, i * 2.0 + 4.0});
    c.push_back({i * 0.5, i * 1.5});
  }
  CHECK(lmd(a, a) == 0.0);
  CHECK(lmd(a, b) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(lmd(a, b) == lmd(b, a));
  // triangle inequality on fixed orderings
  CHECK(lmd(a, c) <= lmd(a, b) + lmd(b, c) + 1e-12);
  LandmarkSet short_set(3, {0.0, 0.0});
  CHECK_THROWS_AS(lmd(a, short_set), std::invalid_argument);
  // per-frame average overload
  CHECK(lmd(std::vector<LandmarkSet>{a, a}, std::vector<LandmarkSet>{b, b}) ==
        doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("sync_score: perfect separation, permutation baseline, single-class error") {
  std::vector<double> d{0.1, 0.2, 0.3, 2.0, 2.5, 3.0};
  std::vector<int> y{0, 0, 0, 1, 1, 1};
  const auto s = sync_score_from_distances(d, y, 1.0);
  CHECK(s.roc_auc == 1.0);
  CHECK(s.accuracy == 1.0);

  std::mt19937_64 rng(5);
  std::vector<double> dr;
  std::vector<int> yr;
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < 4000; ++i) {
    dr.push_back(dist(rng));
    yr.push_back(static_cast<int>(rng() & 1));
  }
  const auto base = sync_score_from_distances(dr, yr, 0.5);
  CHECK(base.roc_auc == doctest::Approx(0.5).epsilon(0.1));

  CHECK_THROWS_AS(sync_score_from_distances({1.0, 2.0}, {1, 1}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(sync_score_from_distances({}, {}, 0.5), std::invalid_argument);
}

TEST_CASE("sync_score AUC is invariant under strictly monotone transforms of d") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> dist(0.0, 3.0);
  std::vector<double> d, dt;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    const double v = dist(rng);
    d.push_back(v);
    dt.push_back(std::exp(0.7 * v) + 1.0);  // strictly increasing
    y.push_back(static_cast<int>(rng() % 2));
  }
  y[0] = 0;
  y[1] = 1;  // both classes present
  CHECK(sync_score_from_distances(d, y, 1.0).roc_auc ==
        doctest::Approx(sync_score_from_distances(dt, y, 1.0).roc_auc).epsilon(1e-12));
}

TEST_CASE("untrained discriminator scores near chance on toy pairs") {
  const auto cfg = testutil::tiny_arch();
  const auto params = init_params<double>(cfg, 8);
  std::vector<SyncSample<double>> pairs;
  for (int i = 0; i < 24; ++i)
    pairs.push_back({testutil::random_crop<double>(32, 500 + i),
                     testutil::random_heatmap(12, 35, 600 + i), i % 2});
  const auto s = sync_score(params, pairs, 1.0, cfg);
  CHECK(s.roc_auc > 0.15);
  CHECK(s.roc_auc < 0.85);
}

TEST_CASE("activation_heatmap is H x H, min 0, max 1; constant input maps to zeros") {
  const auto cfg = testutil::tiny_arch();
  const auto params = init_params<double>(cfg, 9);
  const auto gi = GeneratorInput<double>::make(testutil::random_crop<double>(32, 700),
                                              testutil::random_crop<double>(32, 701));
  const auto map = activation_heatmap(params, gi, testutil::random_heatmap(12, 35, 702), cfg);
  CHECK(map.height == cfg.face_size);
  CHECK(map.width == cfg.face_size);
  CHECK(map.data.minCoeff() == doctest::Approx(0.0));
  CHECK(map.data.maxCoeff() == doctest::Approx(1.0));
  const double mass = lower_half_mass(map);
  CHECK(mass >= 0.0);
  CHECK(mass <= 1.0);

  // all-zero weights give constant activations -> all-zero map by convention
  auto zero_params = params;
  for (auto& [name, m] : zero_params.tensors) m.setZero();
  const auto flat = activation_heatmap(zero_params, gi, testutil::random_heatmap(12, 35, 703), cfg);
  CHECK(flat.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pearson basics") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y{2, 4, 6, 8, 10};
  std::vector<double> z{5, 4, 3, 2, 1};
  CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(x, z) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(pearson(x, std::vector<double>{1, 1, 1, 1, 1}) == 0.0);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1.0}), std::invalid_argument);
}
