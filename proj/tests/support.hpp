#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "vpdisp/core_model.hpp"

namespace testing_support {

inline vpdisp::Ensemble make_ensemble(const std::vector<double>& r, const std::vector<double>& mass,
                                      const std::vector<double>& w = {}, const std::vector<double>& ell = {}) {
  std::vector<vpdisp::ShellParticle> ps;
  for (std::size_t i = 0; i < r.size(); ++i)
    ps.push_back({r[i], w.empty() ? 0.0 : w[i], ell.empty() ? 0.0 : ell[i], mass[i], vpdisp::Group::none});
  return vpdisp::Ensemble(ps);
}

inline vpdisp::Ensemble random_ensemble(std::mt19937_64& rng, int n, double r_max = 3.0) {
  std::uniform_real_distribution<double> ur(0.05, r_max), um(0.1, 1.0), uw(-1.0, 1.0), ul(0.0, 0.5);
  std::vector<vpdisp::ShellParticle> ps;
  for (int i = 0; i < n; ++i) ps.push_back({ur(rng), uw(rng), ul(rng), um(rng), vpdisp::Group::none});
  return vpdisp::Ensemble(ps);
}

}  // namespace testing_support
