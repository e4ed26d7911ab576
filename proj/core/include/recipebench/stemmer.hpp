#pragma once

#include <string>
#include <string_view>

namespace recipebench::metrics {

/// Porter (1980) stemmer over lowercase ASCII words; non-alphabetic input
/// is returned unchanged. Used by the stem stage of the METEOR matcher.
std::string porter_stem(std::string_view word);

} // namespace recipebench::metrics
