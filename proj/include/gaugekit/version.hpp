// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

namespace gaugekit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gaugekit
