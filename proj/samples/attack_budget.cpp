// Compares a time-restricted attack with its unrestricted limit and a
// Monte Carlo estimate for a few attack windows.
#include <iostream>

#include "trdsa/trdsa.hpp"

int main() {
  using namespace trdsa;
  const HashShare share = HashShare::parse("0.3");
  const long depth = 6;
  std::cout << "window,p_tr,p_tu,p_hat,stderr\n";
  for (long window : {1, 5, 20, 100}) {
    const AttackParams params{share, depth, window};
    const auto exact = analytics::tr_success_probability<double>(params);
    const auto limit = analytics::tu_success_probability<double>(share, depth);
    const auto mc = sim::simulate_attack(params, {.runs = 100000, .seed = 7, .parallelism = 4});
    std::cout << window << ',' << sweep::format_number(exact.to_double()) << ','
              << sweep::format_number(limit.to_double()) << ',' << sweep::format_number(mc.p_hat) << ','
              << sweep::format_number(mc.std_error) << '\n';
  }
}
