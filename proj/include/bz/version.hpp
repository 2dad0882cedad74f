#pragma once

#define BZ_VERSION_MAJOR 0
#define BZ_VERSION_MINOR 1
#define BZ_VERSION_PATCH 0

namespace bz {

inline constexpr const char* version_string = "0.1.0";

} // namespace bz
