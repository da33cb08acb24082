// Ernst point for the three example relaxation pairs, and how the
// shaped-pulse structures compare at a few other M points.

#include <cstdio>

#include "spinsnr/spinsnr.hpp"

int main() {
  using namespace spinsnr;
  const RelaxationPair pairs[] = {{1.90, 0.5}, {1.80, 1.0}, {1.69, 1.5}};
  for (const auto& p : pairs) {
    const auto e = ernst_solution(p);
    std::printf("Gamma=%.2f gamma=%.2f  regime %s  M=(%.6f, %.6f)  flip=%.6f rad  Q=%.6f\n", p.gamma_t2,
                p.gamma_t1, std::string(to_string(regime(p))).c_str(), e.m.y, e.m.z, e.flip, e.q);
  }

  const RelaxationPair p{1.8, 1.0};
  const BlochState probes[] = {{0.95, 0.0}, {0.6, 0.3}, {0.3, 0.1}, {0.2, -0.8}};
  for (const auto& m : probes) {
    const auto q = q_value(m, p);
    std::printf("M=(%.2f, %.2f)  %-10s T_c=%.6f  Q=%.6f\n", m.y, m.z,
                std::string(to_string(q.structure)).c_str(), q.t_control, q.q);
  }
}
