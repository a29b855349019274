#pragma once

namespace radalloc {

using RadarId = int;
using TargetId = int;

// Sentinel for "no radar assigned / no winner known".
inline constexpr RadarId kNoRadar = -1;

}  // namespace radalloc
