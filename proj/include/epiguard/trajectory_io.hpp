#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "epiguard/sim.hpp"

namespace epiguard {

/// CSV with header `t,<compartments...>,u_raw,u,h_<constraint>...,d`, one row per
/// sample, numbers printed with 17 significant digits.
std::string trajectory_csv(const Trajectory& trajectory);
void export_trajectory(const Trajectory& trajectory, const std::filesystem::path& path);

/// Inverse of trajectory_csv. Compartment columns must match `spec`'s labels.
Trajectory import_trajectory_text(std::string_view text, const ModelSpec& spec,
                                  const std::string& source = "<trajectory>");
Trajectory import_trajectory(const std::filesystem::path& path, const ModelSpec& spec);

/// Plot-ready long format: `t,series,value` for every compartment, u_raw, u, d
/// and barrier column.
std::string trajectory_long_csv(const Trajectory& trajectory);

}  // namespace epiguard
