#pragma once

#include <string>

#include "chid/forward.hpp"
#include "chid/observation.hpp"

namespace chid::io {

/// Binary layout, all fields little-endian:
///   magic      8 bytes  "CHIDTRJ1" (trajectory) or "CHIDOBS1" (observation)
///   version    u32
///   basis      u32      0 = P2 elements, 1 = periodic cubic splines
///   n_cells    u64
///   n_states   u64
///   n_dofs     u64
///   tau        f64
///   times      f64[n_states]
///   phi        f64[n_states][n_dofs]
/// trajectory:  mu f64[n_states][n_dofs]
/// observation: noise_level, interpolation_discrepancy f64, provenance u32,
///              h3_max, h1_max, dt_hm1_max, dt_hm1_l2 f64
/// A JSON manifest with the same dimensions is written next to the file
/// (path + ".json").
inline constexpr std::uint32_t kContainerVersion = 1;

void write_trajectory(const std::string& path, const Trajectory& traj,
                      const std::string& manifest_extra = "{}");
Trajectory read_trajectory(const std::string& path);

void write_observation(const std::string& path, const ObservationData& data,
                       const std::string& manifest_extra = "{}");
ObservationData read_observation(const std::string& path);

}  // namespace chid::io
