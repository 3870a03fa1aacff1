#pragma once

#include <filesystem>
#include <vector>

#include "d2dstore/app/config.hpp"

namespace d2dstore::app {

// Writes the plot-ready datasets into dir and returns the files written.
// The network section of base supplies M, lambda, mu, rho_d2d and F; each
// dataset sets its own omega, rho_bs and lambda_c.
std::vector<std::filesystem::path> write_figures(const Config& base, const std::filesystem::path& dir,
                                                 bool force);

}  // namespace d2dstore::app
