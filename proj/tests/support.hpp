#pragma once

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sfa/error.hpp"
#include "sfa/rng.hpp"
#include "sfa/sfa.hpp"

namespace testing {

/// Code of the sfa::Error thrown by `f`; fails the test if nothing is thrown.
inline sfa::ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const sfa::Error& e) {
    return e.code();
  }
  FAIL("expected an sfa::Error");
  return sfa::ErrorCode::InvalidInput;
}

/// AR(1) minisequences whose smoothness depends on the class: class c has
/// persistence 0.9 − 0.25·c, so higher classes move faster.
inline std::vector<sfa::Minisequence> ar_minisequences(std::size_t per_class, std::size_t classes,
                                                       std::size_t length, std::size_t dim, std::uint64_t seed,
                                                       std::size_t regions = 1) {
  std::mt19937_64 rng(seed);
  std::vector<sfa::Minisequence> out;
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      const double rho = 0.9 - 0.25 * double(c);
      sfa::Minisequence m{sfa::Matrix(length, dim), std::int32_t(c), std::int32_t(i % regions)};
      for (std::size_t j = 0; j < dim; ++j) m.data(0, j) = sfa::standard_normal(rng);
      for (std::size_t t = 1; t < length; ++t)
        for (std::size_t j = 0; j < dim; ++j)
          m.data(t, j) = rho * m.data(t - 1, j) + 0.5 * sfa::standard_normal(rng) + 0.1 * double(j % 3);
      out.push_back(std::move(m));
    }
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sfa_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
