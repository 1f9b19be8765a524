// Parisian exit and ruin for a standard Brownian motion, checked against a
// Monte Carlo run.

#include <cstdio>

#include "snlp/montecarlo.hpp"
#include "snlp/parisian.hpp"

int main() {
  const auto bm = snlp::LevyModel::brownian(0.0, 1.0);
  const snlp::ParisianQuery pq{bm, 0.5, 0.0, 1.0, -1.0, 0.5, 0.5, 0.5};

  const auto v = snlp::parisian_all(pq);
  std::printf("formula      up %.5f  ruin %.5f (shifted %.5f)  down %.5f\n", v.up, v.ruin.raw, v.ruin.shifted,
              v.down);

  snlp::PathConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_paths = 20000;
  const auto mc = snlp::simulate_parisian(pq, cfg);
  std::printf("monte carlo  up %.5f  ruin %.5f (shifted %.5f)  down %.5f  (stderr ~%.4f, %s)\n", mc.up.mean,
              mc.ruin_raw.mean, mc.ruin_shifted.mean, mc.down.mean, mc.up.std_error, mc.up.bias_note.c_str());
}
