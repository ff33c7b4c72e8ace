// Copyright 2026 The phononwalk Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <numbers>

namespace phononwalk::constants {

// Fixed to 6 significant digits so golden outputs do not move with CODATA revisions.

/// e^2 / (4 pi eps0) in J*m.
inline constexpr double coulomb_k = 2.30708e-28;
/// Atomic mass unit in kg.
inline constexpr double amu = 1.66054e-27;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double mhz_to_rad_s(double mhz) { return two_pi * mhz * 1e6; }
inline constexpr double khz_to_rad_s(double khz) { return two_pi * khz * 1e3; }
inline constexpr double rad_s_to_khz(double w) { return w / two_pi * 1e-3; }
inline constexpr double rad_s_to_hz(double w) { return w / two_pi; }

} // namespace phononwalk::constants
