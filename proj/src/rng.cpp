#include "kinex/rng.hpp"

#include <cmath>

namespace kinex {

double RngStream::polar_factor(double s) { return std::sqrt(-2.0 * std::log(s) / s); }

}  // namespace kinex
