#pragma once

#include "dlneb/common.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace dlneb {

std::uint64_t splitmix64(std::uint64_t x);

// Independent seed for a named consumer ("instance", "init", "sweep", ...).
std::uint64_t substream(std::uint64_t seed, std::string_view name);

Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& gen, double sd = 1.0);
Matrix gaussian_matrix(int rows, int cols, std::uint64_t seed, double sd = 1.0);
Matrix uniform_matrix(int rows, int cols, double bound, std::mt19937_64& gen);

} // namespace dlneb
