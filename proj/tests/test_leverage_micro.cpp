#include <catch_amalgamated.hpp>

#include <cmath>

#include "hetero/leverage_micro.hpp"

using namespace hetero;
using Catch::Approx;

namespace {

double lag1(const std::vector<double>& r) {
  const double m = num::mean(r);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    den += (r[k] - m) * (r[k] - m);
    if (k > 0) num += (r[k] - m) * (r[k - 1] - m);
  }
  return num / den;
}

const std::vector<MicroCompareRow>& compare_rows() {
  static const auto rows = compare_micro_reduced(MapParams{}, {10, 100, 1000, 10000}, 7);
  return rows;
}

}  // namespace

TEST_CASE("fast returns", "[micro][returns]") {
  const double n = 10000.0;
  Stream rng(1);
  for (double phi : {0.0, 0.5, -0.3}) {
    INFO("phi = " << phi);
    const auto r = simulate_fast_returns(phi, 2e-9, 10000, rng);
    REQUIRE(r.size() == 10001);
    CHECK(std::abs(lag1(r) - phi) < 3.0 / std::sqrt(n));
    CHECK(num::variance(r) == Approx(2e-9 / (1.0 - phi * phi)).epsilon(0.1));
  }
  const auto c = simulate_fast_returns(0.5, 0.0, 5, rng, 1.0);
  CHECK(c[0] == 1.0);
  CHECK(c[5] == 1.0 / 32.0);
  CHECK_THROWS_AS(simulate_fast_returns(1.0, 1.0, 10, rng), DomainError);
  CHECK_THROWS_AS(simulate_fast_returns(0.5, -1.0, 10, rng), ParameterError);
}

TEST_CASE("AR(1) estimation", "[micro][mle]") {
  std::vector<double> r{0.3};
  for (int k = 0; k < 30; ++k) r.push_back(0.7 * r.back());
  const auto e = mle_ar1(r);
  CHECK(e.phi_hat == Approx(0.7).epsilon(1e-14));
  CHECK(e.sigma2_hat < 1e-30);
  CHECK_THROWS_AS(mle_ar1(std::vector<double>(9, 1.0)), InsufficientData);
  CHECK_THROWS_AS(mle_ar1(std::vector<double>(20, 0.0)), DomainError);

  // phi_hat ~ N(phi, (1 - phi^2)/n)
  Stream rng(2);
  std::vector<double> est;
  for (int rep = 0; rep < 1000; ++rep) est.push_back(mle_ar1(simulate_fast_returns(0.5, 1.0, 1000, rng)).phi_hat);
  CHECK(num::variance(est) == Approx(0.75 / 1000.0).epsilon(0.15));
  CHECK(std::abs(num::mean(est) - 0.5) < 3.0 * std::sqrt(0.75 / 1000.0 / 1000.0) + 2.0 / 1000.0);

  const auto z = mle_ar1(simulate_fast_returns(0.0, 1.0, 10000, rng));
  CHECK(std::abs(z.phi_hat) < 3.0 / std::sqrt(10000.0));
  CHECK(z.sigma2_hat == Approx(1.0).epsilon(0.05));
}

TEST_CASE("aggregated variance", "[micro][aggregate]") {
  CHECK(aggregated_variance(0.0, 0.37, 250) == 250 * 0.37);
  for (double p : {0.3, -0.5, 0.9, 0.99})
    for (std::uint64_t n : {10u, 100u, 1000u}) {
      INFO("phi = " << p << ", n = " << n);
      CHECK(aggregated_variance(p, 1.7, n) == Approx(aggregated_variance_direct(p, 1.7, n)).epsilon(1e-10));
    }
  // large n: n s2 / (1 - phi)^2
  for (double p : {0.3, -0.4}) {
    const double n = 1e6;
    CHECK(aggregated_variance(p, 1.0, 1000000) / (n / ((1 - p) * (1 - p))) == Approx(1.0).epsilon(1e-5));
  }
  CHECK_THROWS_AS(aggregated_variance(1.0, 1.0, 10), DomainError);

  // brute force: variance of block sums at phi = 0.3, n = 100
  Stream rng(3);
  std::vector<double> sums;
  sums.reserve(100000);
  for (int b = 0; b < 100000; ++b) {
    auto r = simulate_fast_returns(0.3, 1.0, 100, rng);
    double s = 0.0;
    for (std::size_t k = 1; k < r.size(); ++k) s += r[k];
    sums.push_back(s);
  }
  CHECK(num::variance(sums) == Approx(aggregated_variance(0.3, 1.0, 100)).epsilon(0.05));
}

TEST_CASE("Sigma_eps scaling", "[micro][aggregate]") {
  // sigma_eps^2 = Sigma/n: the aggregated variance does not depend on n
  const MapParams p;
  const double phi = 0.38;
  std::vector<double> m, se;
  for (std::uint64_t n : {500u, 1000u}) {
    Stream rng(4 + n);
    std::vector<double> v;
    for (int b = 0; b < 2000; ++b) {
      const auto e = mle_ar1(simulate_fast_returns(phi, p.sigma_eps / double(n), n, rng));
      v.push_back(aggregated_variance(e.phi_hat, e.sigma2_hat, n));
    }
    m.push_back(num::mean(v));
    se.push_back(std::sqrt(num::variance(v) / 2000.0));
  }
  CHECK(std::abs(m[0] - m[1]) < 3.0 * std::hypot(se[0], se[1]));
  CHECK(m[1] == Approx(p.sigma_eps / ((1 - phi) * (1 - phi))).epsilon(0.02));
}

TEST_CASE("micro step", "[micro][step]") {
  const MapParams p;
  const LeverageMap map(p);
  Stream rng(5);
  MicroOptions det;
  det.deterministic = true;
  for (double phi : {0.1, 0.38, 0.7}) {
    const auto s = micro_state_from_phi(p, phi);
    CHECK(s.lambda == Approx(1.0 + p.gamma0 * phi));
    CHECK((s.lambda - 1.0) / s.gamma == Approx(phi).epsilon(1e-14));
    CHECK(micro_step(s, p, 1000, rng, det).phi == Approx(map.T(phi)).epsilon(1e-12));
  }

  MapParams frozen = p;
  frozen.omega = 1.0;
  auto s = micro_state_from_phi(frozen, 0.38);
  const double lambda0 = s.lambda;
  for (int t = 0; t < 50; ++t) s = micro_step(s, frozen, 100, rng);
  CHECK(s.lambda == Approx(lambda0).epsilon(1e-14));

  CHECK_THROWS_AS(micro_state_from_phi(p, 1.0), DomainError);
  CHECK_THROWS_AS(micro_step(micro_state_from_phi(p, 0.3), p, 5, rng), ParameterError);

  // a state the VaR rule cannot map back inside (-1, 1)
  MicroState bad = micro_state_from_phi(p, 0.3);
  bad.lambda = 1e6;
  try {
    (void)micro_step(bad, p, 100, rng);
    FAIL("expected a breakdown");
  } catch (const ModelBreakdown& e) {
    CHECK(std::string(e.what()).find("lambda=") != std::string::npos);
  }
}

TEST_CASE("micro runs are reproducible", "[micro][reproducibility]") {
  const MapParams p;
  const auto a = micro_run(p, 1000, 500, 11);
  const auto b = micro_run(p, 1000, 500, 11);
  const auto c = micro_run(p, 1000, 500, 12);
  REQUIRE(a.states.size() == 500);
  for (std::size_t i = 0; i < 500; ++i) CHECK(a.states[i].phi == b.states[i].phi);
  CHECK(a.states.back().phi != c.states.back().phi);
  for (const auto& s : a.states) {
    CHECK(std::abs(s.phi) < 1.0);
    CHECK(s.gamma > 0.0);
    CHECK(s.sigma2_e > 0.0);
  }
}

TEST_CASE("micro against reduced chain", "[micro][compare]") {
  const auto& rows = compare_rows();
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].flag != "ok");
  CHECK(rows[2].flag == "ok");
  CHECK(rows[3].flag == "ok");
  INFO("KS 10^3 " << rows[2].ks << ", 10^4 " << rows[3].ks);
  CHECK(rows[3].ks < rows[2].ks);
  CHECK(rows[3].ks < 0.1);

  std::vector<double> x;
  Stream rng(6);
  for (int i = 0; i < 1000; ++i) x.push_back(rng.uniform());
  CHECK(num::ks_two_sample(x, x) == 0.0);
}

TEST_CASE("micro KS decreases from n = 10^2", "[micro][compare][!mayfail]") {
  const auto& rows = compare_rows();
  INFO("n = 100: " << rows[1].flag);
  CHECK(rows[1].flag == "ok");
  CHECK(rows[3].ks < rows[1].ks);
}

TEST_CASE("micro phi marginal at n = 10^3 within KS 0.1", "[micro][compare][!mayfail]") {
  CHECK(compare_rows()[2].ks < 0.1);
}

TEST_CASE("micro iterates stay bounded for 10^6 steps", "[micro][bounded][!mayfail]") {
  const MapParams p;
  Stream rng(3);
  auto s = micro_state_from_phi(p, 0.38);
  std::uint64_t t = 0;
  try {
    for (; t < 1000000; ++t) s = micro_step(s, p, 1000, rng);
  } catch (const ModelBreakdown& e) {
    INFO("breakdown at step " << t << ": " << e.what());
    CHECK(false);
  }
}
