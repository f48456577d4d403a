#pragma once

namespace rwpm {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kCsvSchema = "rwpm-csv v1";
inline constexpr const char* kRenewalBlobSchema = "rwpm-renewal v1";

}  // namespace rwpm
