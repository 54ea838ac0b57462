#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bmhd/field.hpp"
#include "bmhd/log.hpp"
#include "bmhd/random.hpp"

namespace testing {

using namespace bmhd;

/// Random complex coefficients on every lattice mode except the mean.
inline SpectralVectorField random_field(const GridSpec& g, std::uint64_t seed) {
  SpectralVectorField s(g);
  Rng rng(seed);
  for (std::size_t i = 1; i < g.size(); ++i) {
    s.set(i, {complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal()),
              complex(rng.normal(), rng.normal())});
  }
  return s;
}

inline double max_modulus(const ComponentArrays& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, modulus(a.at(i)));
  return m;
}

inline double max_diff(const ComponentArrays& a, const ComponentArrays& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const CVec3 x = a.at(i), y = b.at(i);
    m = std::max(m, modulus(CVec3{x[0] - y[0], x[1] - y[1], x[2] - y[2]}));
  }
  return m;
}

inline double rel_diff(const ComponentArrays& a, const ComponentArrays& b) {
  const double s = std::max(max_modulus(a), max_modulus(b));
  return s == 0.0 ? 0.0 : max_diff(a, b) / s;
}

/// Collects warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture() {
    prev_ = set_warning_sink([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { set_warning_sink(prev_); }
  std::vector<std::string> messages;

 private:
  WarningSink prev_;
};

inline bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace testing
