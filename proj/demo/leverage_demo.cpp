// Walk through the main objects at the default parameters: map geometry,
// admissible noise, a chain orbit, the Ulam stationary density and the
// Lyapunov exponent from both estimators.

#include <cstdio>

#include "hetero/core_maps.hpp"
#include "hetero/lyapunov.hpp"
#include "hetero/noise_kernel.hpp"
#include "hetero/orbit_engine.hpp"
#include "hetero/transfer_operator.hpp"

int main() {
  using namespace hetero;
  const LeverageMap map(MapParams{});
  const MapGeometry g = find_geometry(map);
  std::printf("critical point  %.10f\n", g.crit);
  std::printf("Delta = T(crit) %.10f\n", g.delta);
  std::printf("b (T(b) = 0)    %.10f\n", g.b);
  std::printf("Gamma           %.6f\n", g.gamma_gap);
  std::printf("core            [%.6f, %.6f]\n", g.core_lo, g.core_hi);

  const double n = 1000;
  const AdmissibleBound bound = admissible_a(map, g, n);
  std::printf("\nn = %g: admissible a = %.6f (sigma_max %.6f at phi = %.4f)\n", n, bound.a, bound.sigma_max,
              bound.argmax);

  const ExtendedMap ext(map, g);
  const NoiseSpec spec(bound.a, n);
  const Chain chain(ext, spec, OrbitMode::random_paper);
  const Trajectory tr = random_orbit(chain, 0.38, 10, 1);
  std::printf("\norbit from 0.38:");
  for (double x : tr.states) std::printf(" %.4f", x);
  std::printf("\n");

  const UlamOperator op = build_ulam(ext, spec, 512);
  const StationaryResult st = stationary_density(op);
  const SpectralGap gap = spectral_gap(op, st.density.masses);
  std::printf("\nUlam m = 512: %zu iterations, |lambda_2| = %.4f, unique = %s\n", st.iterations, gap.lambda2_abs,
              st.unique ? "yes" : "no");

  const auto det = deterministic_lyapunov(map, 0.38, 1000000, 1000, g.crit);
  const auto avg = average_lyapunov(chain, 1000000, 2);
  std::printf("\nLyapunov: deterministic %.5f (se %.5f)\n", det.estimate, det.std_error);
  std::printf("          chain n = %g   %.5f (se %.5f), from density %.5f\n", n, avg.estimate, avg.std_error,
              lyapunov_from_density(op, st.density.masses, ext));
}
