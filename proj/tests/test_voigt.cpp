#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "gcv/quadrature.hpp"
#include "gcv/rng.hpp"
#include "gcv/voigt.hpp"

using namespace gcv;

namespace {

// Independent convolution oracle: f(y) = int phi_sigma(y - x) cauchy_gamma(x) dx
// by tan-substituted quadrature, never touching the erfcx representation.
double pdf_by_convolution(double y, const VoigtParams& p) {
  const double yt = y - p.mu;
  auto integrand = [&](double x) {
    const double g = std::exp(-0.5 * (yt - x) * (yt - x) / (p.sigma * p.sigma)) /
                     (p.sigma * std::sqrt(2.0 * M_PI));
    const double c = p.gamma / (M_PI * (x * x + p.gamma * p.gamma));
    return g * c;
  };
  return tan_integrate(integrand, 0.0, p.gamma + p.sigma, 1e-12);
}

VoigtParams random_params(Rng& rng) {
  return {rng.normal(), std::exp(rng.uniform() * 2.0 - 1.0),
          std::exp(rng.uniform() * 2.0 - 1.0)};
}

} // namespace

TEST_CASE("pdf against the independent convolution oracle") {
  // frozen spot value first
  CHECK(pdf(0.0, {0, 1, 1}) == doctest::Approx(0.20870928052036769).epsilon(1e-13));

  std::ifstream in(std::string(GCV_FIXTURE_DIR) + "/voigt_pdf_oracle.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double y, mu, sig, gam, want;
    ss >> y >> mu >> sig >> gam >> want;
    CHECK(pdf(y, {mu, sig, gam}) == doctest::Approx(want).epsilon(1e-12));
  }

  Rng rng(101, 0);
  for (int i = 0; i < 25; ++i) {
    const VoigtParams p = random_params(rng);
    const double y = p.mu + rng.cauchy(p.gamma) + p.sigma * rng.normal();
    const double direct = pdf(y, p);
    const double conv = pdf_by_convolution(y, p);
    CHECK(direct == doctest::Approx(conv).epsilon(1e-10));
  }
}

TEST_CASE("pdf limits: Gaussian and Cauchy") {
  for (double y : {0.0, 1.0, 2.0}) {
    const double g = std::exp(-0.5 * y * y) / std::sqrt(2.0 * M_PI);
    CHECK(std::abs(pdf(y, {0, 1, 1e-8}) - g) < 1e-6);
  }
  for (double y : {0.0, 1.0, 5.0}) {
    const double c = 1.0 / (M_PI * (1.0 + y * y));
    CHECK(std::abs(pdf(y, {0, 1e-6, 1}) - c) < 1e-5);
  }
}

TEST_CASE("pdf_mills agrees with pdf everywhere tested") {
  CHECK(pdf_mills(0.0, {0, 1, 1}) == doctest::Approx(0.20870928052036769).epsilon(1e-13));
  Rng rng(102, 0);
  for (int i = 0; i < 300; ++i) {
    const VoigtParams p = random_params(rng);
    const double y = p.mu + (rng.uniform() * 2 - 1) * 15.0 * (p.sigma + p.gamma);
    CHECK(pdf_mills(y, p) == doctest::Approx(pdf(y, p)).epsilon(1e-10));
  }
  // center value equals erfcx(gamma/(sigma sqrt 2)) / sqrt(2 pi sigma^2)
  const VoigtParams p{2.0, 0.7, 1.9};
  const double want = erfcx_real(p.gamma / (p.sigma * std::sqrt(2.0))) /
                      std::sqrt(2.0 * M_PI * p.sigma * p.sigma);
  CHECK(pdf_mills(p.mu, p) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("log_pdf: center, symmetry, and deep tails") {
  CHECK(log_pdf(0.0, {0, 1, 1}) ==
        doctest::Approx(std::log(0.20870928052036769)).epsilon(1e-13));
  const VoigtParams p{0.4, 1.1, 0.6};
  for (double r : {0.1, 3.0, 42.0}) {
    CHECK(log_pdf(p.mu + r, p) == doctest::Approx(log_pdf(p.mu - r, p)).epsilon(1e-13));
  }
  // Cauchy tail dominance at y = 1e6: log f ~ log(gamma/(pi y^2))
  const double lf = log_pdf(1e6, {0, 1, 1});
  CHECK(std::abs(lf - std::log(1.0 / (M_PI * 1e12))) < 1e-6);
  // stays finite out to |y - mu|/sigma = 1e8
  CHECK(std::isfinite(log_pdf(1e8, {0, 1, 1})));
  CHECK(std::isfinite(log_pdf(1e8, {0, 1, 1e-8})));
}

TEST_CASE("score matches finite differences of log_pdf") {
  Rng rng(103, 0);
  for (int i = 0; i < 200; ++i) {
    const VoigtParams p = random_params(rng);
    const double y = p.mu + (rng.uniform() * 2 - 1) * 10.0 * (p.sigma + p.gamma);
    const ScoreVector s = score(y, p);
    const double hm = 1e-6 * (1.0 + std::abs(p.mu));
    const double hs = 1e-6 * p.sigma;
    const double hg = 1e-6 * p.gamma;
    const double fd_mu = (log_pdf(y, {p.mu + hm, p.sigma, p.gamma}) -
                          log_pdf(y, {p.mu - hm, p.sigma, p.gamma})) /
                         (2 * hm);
    const double fd_sig = (log_pdf(y, {p.mu, p.sigma + hs, p.gamma}) -
                           log_pdf(y, {p.mu, p.sigma - hs, p.gamma})) /
                          (2 * hs);
    const double fd_gam = (log_pdf(y, {p.mu, p.sigma, p.gamma + hg}) -
                           log_pdf(y, {p.mu, p.sigma, p.gamma - hg})) /
                          (2 * hg);
    CHECK(s.s_mu == doctest::Approx(fd_mu).epsilon(1e-5));
    CHECK(s.s_sigma == doctest::Approx(fd_sig).epsilon(1e-5));
    CHECK(s.s_gamma == doctest::Approx(fd_gam).epsilon(1e-5));
  }
}

TEST_CASE("score center and tail behavior") {
  const VoigtParams p{1.5, 0.8, 1.2};
  CHECK(std::abs(score(p.mu, p).s_mu) <= 1e-13);
  // s_mu ~ 2/(y - mu) far out
  const ScoreVector s100 = score(100.0, {0, 1, 1});
  CHECK(s100.s_mu == doctest::Approx(0.02).epsilon(5e-3));
  // s_gamma -> 1/gamma
  Rng rng(104, 0);
  for (int i = 0; i < 50; ++i) {
    const VoigtParams q = random_params(rng);
    const double y = q.mu + 1e4 * std::max(q.sigma, q.gamma);
    CHECK(score(y, q).s_gamma == doctest::Approx(1.0 / q.gamma).epsilon(1e-3));
  }
}

TEST_CASE("scale homogeneity identity") {
  Rng rng(105, 0);
  double worst = 0.0;
  for (int i = 0; i < 600; ++i) {
    const VoigtParams p = random_params(rng);
    const double y = p.mu + (rng.uniform() * 2 - 1) * 25.0 * (p.sigma + p.gamma);
    const ScoreVector s = score(y, p);
    worst = std::max(worst, std::abs(p.sigma * s.s_sigma + p.gamma * s.s_gamma -
                                     (y - p.mu) * s.s_mu + 1.0));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("hessian: constructive identities and finite differences") {
  Rng rng(106, 0);
  for (int i = 0; i < 100; ++i) {
    const VoigtParams p = random_params(rng);
    const double y = p.mu + (rng.uniform() * 2 - 1) * 8.0 * (p.sigma + p.gamma);
    const ScoreVector s = score(y, p);
    const HessianMatrix H = hessian(y, p);
    // heat identity holds exactly by construction
    CHECK(H.mm == s.s_sigma / p.sigma - s.s_mu * s.s_mu);
    // Laplace identity
    CHECK(std::abs(H.mm + s.s_mu * s.s_mu + H.gg + s.s_gamma * s.s_gamma) <= 1e-10);
    // all entries against score finite differences
    auto sc = [&](VoigtParams q) { return score(y, q); };
    const double hm = 1e-6 * (1.0 + std::abs(p.mu)), hs = 1e-6 * p.sigma,
                 hg = 1e-6 * p.gamma;
    const ScoreVector smp = sc({p.mu + hm, p.sigma, p.gamma});
    const ScoreVector smm = sc({p.mu - hm, p.sigma, p.gamma});
    const ScoreVector ssp = sc({p.mu, p.sigma + hs, p.gamma});
    const ScoreVector ssm = sc({p.mu, p.sigma - hs, p.gamma});
    const ScoreVector sgp = sc({p.mu, p.sigma, p.gamma + hg});
    const ScoreVector sgm = sc({p.mu, p.sigma, p.gamma - hg});
    auto near = [](double a, double b) {
      return std::abs(a - b) <= 1e-4 * (1.0 + std::max(std::abs(a), std::abs(b)));
    };
    CHECK(near(H.mm, (smp.s_mu - smm.s_mu) / (2 * hm)));
    CHECK(near(H.ms, (ssp.s_mu - ssm.s_mu) / (2 * hs)));
    CHECK(near(H.mg, (sgp.s_mu - sgm.s_mu) / (2 * hg)));
    CHECK(near(H.ss, (ssp.s_sigma - ssm.s_sigma) / (2 * hs)));
    CHECK(near(H.sg, (sgp.s_sigma - sgm.s_sigma) / (2 * hg)));
    CHECK(near(H.gg, (sgp.s_gamma - sgm.s_gamma) / (2 * hg)));
  }
}

TEST_CASE("conditional moments: landmarks for V(0,1,1)") {
  const VoigtParams p{0, 1, 1};
  // scan for the maximum of the conditional mean
  double best_y = 0, best_m = -1;
  for (double y = 2.0; y <= 3.0; y += 1e-4) {
    const double m = conditional_moments(y, p).mean;
    if (m > best_m) {
      best_m = m;
      best_y = y;
    }
  }
  CHECK(best_m == doctest::Approx(0.7486).epsilon(1.5e-3));
  CHECK(best_y == doctest::Approx(2.4637).epsilon(1e-3));
  CHECK(conditional_moments(0.0, p).variance == doctest::Approx(0.5251).epsilon(1e-3));
  double best_vy = 0, best_v = -1;
  for (double y = 3.0; y <= 4.5; y += 1e-4) {
    const double v = conditional_moments(y, p).variance;
    if (v > best_v) {
      best_v = v;
      best_vy = y;
    }
  }
  CHECK(best_v == doctest::Approx(1.1603).epsilon(1e-3));
  CHECK(best_vy == doctest::Approx(3.6621).epsilon(1e-3));
  // at the mean's argmax the conditional variance equals sigma^2
  CHECK(conditional_moments(best_y, p).variance == doctest::Approx(1.0).epsilon(1e-5));
  // antisymmetric mean
  CHECK(conditional_moments(p.mu, p).mean == 0.0);
}

TEST_CASE("Tweedie consistency against the score/Hessian route") {
  Rng rng(107, 0);
  double worst_m = 0.0, worst_v = 0.0;
  for (int i = 0; i < 600; ++i) {
    const VoigtParams p = random_params(rng);
    const double y = p.mu + (rng.uniform() * 2 - 1) * 20.0 * (p.sigma + p.gamma);
    const ConditionalMoments cm = conditional_moments(y, p);
    const ScoreVector s = score(y, p);
    const HessianMatrix H = hessian(y, p);
    const double sig2 = p.sigma * p.sigma;
    worst_m = std::max(worst_m, std::abs(cm.mean - sig2 * s.s_mu));
    worst_v = std::max(worst_v, std::abs(cm.variance - (sig2 + sig2 * sig2 * H.mm)));
  }
  CHECK(worst_m <= 1e-11);
  CHECK(worst_v <= 1e-11);
}

TEST_CASE("conditional variance positive everywhere including extreme tails") {
  Rng rng(108, 0);
  for (int i = 0; i < 2000; ++i) {
    const VoigtParams p = random_params(rng);
    const double scale = std::pow(10.0, rng.uniform() * 8.0); // up to 1e8
    const double y = p.mu + (rng.uniform() < 0.5 ? -1 : 1) * scale * (p.sigma + p.gamma);
    CHECK(conditional_moments(y, p).variance > 0.0);
  }
}

TEST_CASE("conditional density integrates to one and reproduces the moments") {
  const VoigtParams p{0, 1, 1};
  for (double y : {0.0, 1.0, 5.0}) {
    auto f = [&](double z) { return conditional_density_z_given_y(z, y, p); };
    const double mass = simpson_adaptive(f, -12.0, 12.0, 1e-11);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    auto zf = [&](double z) { return z * conditional_density_z_given_y(z, y, p); };
    const double mean = simpson_adaptive(zf, -12.0, 12.0, 1e-11);
    CHECK(mean == doctest::Approx(conditional_moments(y, p).mean).epsilon(1e-7));
  }
  // far tail: conditional law converges to the unconditional Gaussian
  double sup = 0.0;
  for (double z = -5.0; z <= 5.0; z += 0.01) {
    const double fz = conditional_density_z_given_y(z, 1e4, p);
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    sup = std::max(sup, std::abs(fz - phi));
  }
  CHECK(sup <= 1e-4);
}

TEST_CASE("conditional cumulants: symmetry, recursion, quadrature") {
  const VoigtParams p{0, 1, 1};
  CHECK(std::abs(conditional_cumulants(0.0, p, 3)[2]) <= 1e-12);

  // kappa_{r+1} = -sigma^2 d kappa_r / dy at r = 2
  for (double y : {0.5, 1.7, 3.0}) {
    const double h = 1e-5;
    const double k2p = conditional_cumulants(y + h, p, 3)[1];
    const double k2m = conditional_cumulants(y - h, p, 3)[1];
    const double k3 = conditional_cumulants(y, p, 3)[2];
    CHECK(k3 == doctest::Approx(-(k2p - k2m) / (2 * h)).epsilon(1e-4));
  }

  // kappa_3, kappa_4 against the quadrature cumulants of the conditional density
  for (double y : {0.0, 2.0}) {
    auto moment = [&](int k) {
      auto f = [&](double z) {
        return std::pow(z, k) * conditional_density_z_given_y(z, y, p);
      };
      return simpson_adaptive(f, -14.0, 14.0, 1e-12);
    };
    const double m1 = moment(1), m2 = moment(2), m3 = moment(3), m4 = moment(4);
    const double c3 = m3 - 3 * m2 * m1 + 2 * m1 * m1 * m1;
    const double c4 = m4 - 4 * m3 * m1 - 3 * m2 * m2 + 12 * m2 * m1 * m1 - 6 * std::pow(m1, 4);
    const auto kappa = conditional_cumulants(y, p, 4);
    CHECK(std::abs(kappa[2] - c3) <= 1e-5);
    CHECK(std::abs(kappa[3] - c4) <= 1e-5);
  }
  CHECK_THROWS_AS((void)conditional_cumulants(0.0, p, 5), std::invalid_argument);
}

TEST_CASE("normalization over a tail-compensated grid") {
  Rng rng(109, 0);
  for (int i = 0; i < 20; ++i) {
    const VoigtParams p = random_params(rng);
    auto f = [&](double y) { return pdf(y, p); };
    const double mass = tan_integrate(f, p.mu, p.sigma + p.gamma, 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("law of total variance direction: E[V(Z|Y)] <= sigma^2") {
  const VoigtParams p{0, 1, 1};
  auto f = [&](double y) { return conditional_moments(y, p).variance * pdf(y, p); };
  const double ev = tan_integrate(f, 0.0, 2.0, 1e-9);
  CHECK(ev <= 1.0 + 1e-6);
}

TEST_CASE("sampling: determinism, median, KS against the quadrature CDF") {
  const VoigtParams p{0, 1, 1};
  const auto s1 = sample(p, 1000, 77);
  const auto s2 = sample(p, 1000, 77);
  CHECK(s1 == s2);
  const auto s3 = sample(p, 1000, 78);
  CHECK(s1 != s3);

  auto big = sample(p, 1000000, 5150);
  std::sort(big.begin(), big.end());
  const double med = big[big.size() / 2];
  const double iqr = big[static_cast<size_t>(0.75 * big.size())] -
                     big[static_cast<size_t>(0.25 * big.size())];
  CHECK(std::abs(med) <= 4.0 * iqr / std::sqrt(1e6));

  // KS statistic on a subsample of CDF evaluations (CDF is monotone smooth;
  // evaluate on quantile-spaced points and interpolate the empirical CDF)
  double ks = 0.0;
  const size_t n = big.size();
  for (int k = 1; k < 400; ++k) {
    const size_t idx = static_cast<size_t>(n * (k / 400.0));
    const double x = big[idx];
    const double F = gcv::detail::cdf_by_quadrature(x, p);
    const double Femp = static_cast<double>(idx + 1) / static_cast<double>(n);
    ks = std::max(ks, std::abs(F - Femp));
  }
  CHECK(ks <= 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("best approximations to V(0,1,1) and the Gaussian limit") {
  const auto ba = best_approximations({0, 1, 1});
  CHECK(ba.student_t.scale == doctest::Approx(1.45).epsilon(0.02 / 1.45));
  CHECK(ba.student_t.dof == doctest::Approx(1.22).epsilon(0.02 / 1.22));
  CHECK(ba.pseudo_voigt.eta == doctest::Approx(0.65).epsilon(0.03 / 0.65));
  CHECK(ba.pseudo_voigt.sigma == doctest::Approx(1.62).epsilon(0.03 / 1.62));
  CHECK(ba.pseudo_voigt.gamma == doctest::Approx(1.65).epsilon(0.03 / 1.65));

  const auto lim = best_approximations({0, 1, 1e-6});
  CHECK(lim.student_t.dof > 50.0);
  CHECK(lim.student_t.scale == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((void)pdf(0.0, {0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS((void)pdf(0.0, {0, 1, -2}), std::invalid_argument);
  CHECK_THROWS_AS((void)pdf(0.0, {std::nan(""), 1, 1}), std::invalid_argument);
}
