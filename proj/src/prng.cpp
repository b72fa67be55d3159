#include "metriclab/prng.hpp"

#include <cmath>

namespace metriclab {

double CounterRng::normal() {
  double u1 = uniform_open_low();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace metriclab
