#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gcv/mle.hpp"
#include "gcv/rng.hpp"

using namespace gcv;

TEST_CASE("fit recovers the truth on a large sample") {
  const auto data = sample({1, 1, 0.1}, 10000, 42);
  const auto box = default_box(data);
  const MleResult r = fit(data, box);
  CHECK(r.converged);
  CHECK(!r.on_boundary);
  CHECK(std::abs(r.theta_hat.mu - 1.0) <= 4 * 0.0111);
  CHECK(std::abs(r.theta_hat.sigma - 1.0) <= 4 * 0.0109);
  CHECK(std::abs(r.theta_hat.gamma - 0.1) <= 4 * 0.0070);
  CHECK(r.gradient_norm <= 1e-8 * (1.0 + std::abs(r.loglik / 10000.0)));
}

TEST_CASE("fit on mirrored data pins mu at the mirror point") {
  auto data = sample({0, 1, 0.5}, 600, 9);
  const double c = 2.5;
  std::vector<double> mirrored;
  for (double y : data) {
    mirrored.push_back(c + y);
    mirrored.push_back(c - y);
  }
  const auto box = default_box(mirrored);
  const MleResult r = fit(mirrored, box);
  CHECK(r.theta_hat.mu == doctest::Approx(c).epsilon(1e-7));
}

TEST_CASE("pure Cauchy data drives sigma to its boundary") {
  Rng rng(33, 0);
  std::vector<double> data(500);
  for (auto& y : data) y = rng.cauchy(1.0);
  ParamBox box;
  box.mu_max = 50.0;
  box.sigma_min = 0.01;
  box.sigma_max = 10.0;
  box.gamma_min = 0.01;
  box.gamma_max = 10.0;
  const MleResult r = fit(data, box);
  CHECK(r.on_boundary);
  CHECK(r.theta_hat.sigma == doctest::Approx(box.sigma_min).epsilon(1e-6));

  // oracle: the likelihood improves monotonically toward sigma -> 0 on a
  // coarse lattice at the fitted gamma
  auto loglik = [&](double sig, double gam) {
    double acc = 0.0;
    for (double y : data) acc += log_pdf(y, {r.theta_hat.mu, sig, gam});
    return acc;
  };
  double prev = -1e300;
  for (double sig : {1.0, 0.5, 0.25, 0.1, 0.05, 0.01}) {
    const double ll = loglik(sig, r.theta_hat.gamma);
    CHECK(ll >= prev);
    prev = ll;
  }
}

TEST_CASE("fit input validation") {
  CHECK_THROWS_AS((void)fit({1.0, 2.0}, ParamBox{1, 0.1, 1, 0.1, 1}, std::nullopt),
                  std::invalid_argument);
  std::vector<double> same(50, 3.0);
  CHECK_THROWS_AS((void)fit(same, default_box(same), std::nullopt), std::invalid_argument);
  std::vector<double> bad(50, 0.0);
  for (size_t i = 0; i < bad.size(); ++i) bad[i] = static_cast<double>(i);
  bad[7] = std::nan("");
  CHECK_THROWS_AS((void)fit(bad, ParamBox{100, 0.01, 100, 0.01, 100}, std::nullopt),
                  std::invalid_argument);
}

TEST_CASE("location-scale equivariance") {
  const auto data = sample({0.3, 0.8, 0.4}, 2500, 1234);
  const auto box = default_box(data);
  const MleResult r0 = fit(data, box);
  const double a = 2.5, b = -1.75;
  std::vector<double> scaled(data.size());
  for (size_t i = 0; i < data.size(); ++i) scaled[i] = a * data[i] + b;
  const MleResult r1 = fit(scaled, default_box(scaled));
  CHECK(r1.theta_hat.mu == doctest::Approx(a * r0.theta_hat.mu + b).epsilon(2e-5));
  CHECK(r1.theta_hat.sigma == doctest::Approx(a * r0.theta_hat.sigma).epsilon(2e-5));
  CHECK(r1.theta_hat.gamma == doctest::Approx(a * r0.theta_hat.gamma).epsilon(2e-5));
}

TEST_CASE("information-matrix equality at the estimate") {
  const auto data = sample({1, 1, 1}, 4000, 88);
  const auto r = fit(data, default_box(data));
  const FisherInfo fi = fisher_information(r.theta_hat);
  CHECK(fi.equality_gap <= 1e-5);
}

TEST_CASE("mc_study with reps = 1 reduces to a single fit on the stream-0 sample") {
  const VoigtParams truth{1, 1, 0.5};
  ParamBox box{20, 1e-3, 100, 1e-3, 100};
  const McSummary s = mc_study(truth, 500, 1, box, 2020);
  REQUIRE(s.reps_used == 1);
  Rng rng(2020, 0);
  std::vector<double> data(500);
  for (auto& y : data) y = truth.mu + truth.sigma * rng.normal() + rng.cauchy(truth.gamma);
  const MleResult direct = fit(data, box);
  CHECK(s.mean[0] == direct.theta_hat.mu);
  CHECK(s.mean[1] == direct.theta_hat.sigma);
  CHECK(s.mean[2] == direct.theta_hat.gamma);
}

TEST_CASE("mc_study small run stays near the truth") {
  ParamBox box{20, 1e-4, 100, 1e-4, 100};
  const McSummary s = mc_study({1, 1, 0.1}, 1000, 60, box, 31);
  CHECK(s.reps_failed <= 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(s.alpha_left[j] >= 0.0);
    CHECK(s.alpha_left[j] <= 1.0);
    CHECK(s.alpha_right[j] >= 0.0);
    CHECK(s.alpha_right[j] <= 1.0);
  }
  const double truth[3] = {1.0, 1.0, 0.1};
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(s.mean[j] - truth[j]) <=
          5.0 * s.std_dev[j] / std::sqrt(static_cast<double>(s.reps_used)) + 0.003);
  CHECK_THROWS_AS((void)mc_study({1, 1, 0.1}, 1000, 0, box, 1), std::invalid_argument);
}
