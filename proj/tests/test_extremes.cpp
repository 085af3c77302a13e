#include <catch_amalgamated.hpp>

#include <cmath>

#include "hetero/extremes.hpp"
#include "hetero/noise_kernel.hpp"

using namespace hetero;
using Catch::Approx;

namespace {

// x0 = 0.38, z = 0.80, tau = log 10, n = 10^3
struct Setup {
  LeverageMap map{MapParams{}};
  MapGeometry geo = find_geometry(map);
  ExtendedMap ext{map, geo};
  Chain chain{ext, NoiseSpec(admissible_a(map, geo, 1000.0).a, 1000.0), OrbitMode::random_paper};
  EvtConfig cfg;
  DensityEstimate mu = evt_density(chain, cfg, 10000000, 200000, 1);
  std::vector<BoundaryLevel> levels = boundary_levels(cfg, mu);
  std::vector<double> orbit = stationary_orbit(chain, cfg.x0, cfg.burn_in, 10000000, 2);
};

const Setup& setup() {
  static const Setup s;
  return s;
}

}  // namespace

TEST_CASE("config checks", "[evt]") {
  const LeverageMap m(MapParams{});
  const MapGeometry g = find_geometry(m);
  EvtConfig c;
  CHECK_NOTHROW(c.validate(g));
  c.tau = 0.0;
  CHECK_THROWS_AS(c.validate(g), ParameterError);
  c.tau = 1.0;
  c.z = g.core_hi + 0.01;
  CHECK_THROWS_AS(c.validate(g), ParameterError);
  c.z = 0.8;
  c.t_grid.clear();
  CHECK_THROWS_AS(c.validate(g), ParameterError);
  CHECK(required_bins(0.0, 1.0, 1e-4) == 100000);
}

TEST_CASE("boundary levels", "[evt][levels]") {
  const auto& s = setup();
  REQUIRE(s.levels.size() == s.cfg.t_grid.size());
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    const auto& b = s.levels[i];
    INFO("t = " << b.t);
    CHECK(b.mass * double(b.t) == Approx(s.cfg.tau).epsilon(0.01));
    CHECK(b.radius == Approx(std::exp(-b.u)).epsilon(1e-14));
    CHECK(b.min_density > 0.0);
    CHECK(s.mu.width() < b.radius / 10.0);
    if (i > 0) {
      CHECK(b.u > s.levels[i - 1].u);
      // a continuous positive density gives r_t ~ 1/t, so u_t grows like log t
      const double slope = (b.u - s.levels[i - 1].u) / std::log(double(b.t) / double(s.levels[i - 1].t));
      CHECK(slope == Approx(1.0).margin(0.05));
    }
  }
}

TEST_CASE("boundary levels refuse a coarse density", "[evt][levels]") {
  const auto& s = setup();
  const auto coarse = stream_histogram(s.chain, 0.38, 200000, 1000, 3, s.geo.support_lo, s.geo.support_hi, 1000)
                          .to_density();
  try {
    (void)boundary_levels(s.cfg, coarse);
    FAIL("expected a refusal");
  } catch (const InsufficientData& e) {
    CHECK(std::string(e.what()).find("need at least") != std::string::npos);
  }
}

TEST_CASE("block maxima", "[evt][maxima]") {
  const auto& s = setup();
  const auto bm = block_maxima_prob(s.cfg, s.levels, s.orbit);
  REQUIRE(bm.size() == s.levels.size());
  for (const auto& b : bm) {
    INFO("t = " << b.t << ", p = " << b.p_hat);
    CHECK(b.mismatches == 0);
    CHECK(b.blocks == s.orbit.size() / b.t);
    CHECK(b.std_error == Approx(std::sqrt(b.p_hat * (1 - b.p_hat) / double(b.blocks))));
  }
  CHECK(std::abs(bm.back().p_hat - 0.1) <= 0.03);

  // twice the blocks, standard error down by sqrt(2)
  const std::span<const double> all(s.orbit);
  const auto half = block_maxima_prob(s.cfg, {s.levels[3]}, all.subspan(0, all.size() / 2));
  const auto full = block_maxima_prob(s.cfg, {s.levels[3]}, all);
  CHECK(half[0].std_error / full[0].std_error == Approx(std::sqrt(2.0)).epsilon(0.1));

  CHECK_THROWS_AS(block_maxima_prob(s.cfg, s.levels, all.subspan(0, 50)), InsufficientData);
}

TEST_CASE("tiny tau leaves nearly every block below the level", "[evt][maxima]") {
  const auto& s = setup();
  EvtConfig c = s.cfg;
  c.tau = 0.01;
  c.t_grid = {100};
  const auto lv = boundary_levels(c, s.mu);
  const auto bm = block_maxima_prob(c, lv, s.orbit);
  CHECK(bm[0].p_hat > 0.98);
}

TEST_CASE("extremal index", "[evt][extremal]") {
  const auto& s = setup();
  const auto ei = extremal_index(s.cfg, s.levels, s.orbit);
  REQUIRE(ei.size() == s.levels.size());
  double prev_sum = 2.0;
  for (const auto& e : ei) {
    INFO("t = " << e.t << ", theta = " << e.theta);
    REQUIRE_FALSE(e.censored);
    CHECK(e.q.size() == 21);
    const double sum = 1.0 - e.theta;
    CHECK(sum < prev_sum);
    prev_sum = sum;
  }
  CHECK(ei.back().theta >= 0.9);
  CHECK(ei.back().theta <= 1.0);

  const std::span<const double> all(s.orbit);
  const auto few = extremal_index(s.cfg, {s.levels.back()}, all.subspan(0, 20000));
  CHECK(few[0].censored);
  CHECK(std::isnan(few[0].theta));
}

TEST_CASE("periodic target clusters", "[evt][extremal]") {
  MapParams p;
  p.c = 0.15;
  const LeverageMap m(p);
  const MapGeometry g = find_geometry(m);
  const Chain det{ExtendedMap(m, g)};
  const auto orbit = stationary_orbit(det, 0.38, 10000, 5000, 1);
  // period two: the orbit alternates between two points
  REQUIRE(std::abs(orbit[2] - orbit[0]) < 1e-9);
  REQUIRE(std::abs(orbit[1] - orbit[0]) > 1e-3);
  EvtConfig c;
  c.z = orbit[0];
  BoundaryLevel lv;
  lv.t = 1000;
  lv.radius = 1e-6;
  lv.u = -std::log(lv.radius);
  const auto ei = extremal_index(c, {lv}, orbit);
  REQUIRE_FALSE(ei[0].censored);
  CHECK(ei[0].theta < 0.5);
  CHECK(ei[0].q[1] == Approx(1.0));
}

TEST_CASE("Poisson visit counts", "[evt][poisson]") {
  const auto& s = setup();
  const auto pc = poisson_counts(s.cfg, s.levels.back(), {0.5, 1.0, 2.0}, s.orbit);
  REQUIRE(pc.size() == 3);
  for (const auto& t : pc) {
    INFO("s = " << t.s);
    CHECK(t.mean == Approx(t.s).epsilon(0.05));
    double tot = 0.0, ptot = 0.0;
    for (std::size_t k = 0; k < t.p_hat.size(); ++k) tot += t.p_hat[k], ptot += t.pmf[k];
    CHECK(tot == Approx(1.0));
    CHECK(ptot == Approx(1.0).epsilon(1e-12));
    CHECK(t.pmf[0] == Approx(std::exp(-t.s)).epsilon(1e-14));
  }
  CHECK(std::abs(pc[1].p_hat[0] - std::exp(-1.0)) < 0.03);

  // a window shorter than one step is dropped
  CHECK(poisson_counts(s.cfg, s.levels.back(), {1e-9}, s.orbit).empty());
}
