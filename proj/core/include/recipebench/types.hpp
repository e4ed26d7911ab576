#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace recipebench {

using TokenId = std::uint32_t;

/// Error raised by malformed inputs: bad record files, ungrammatical
/// serialized recipes, misaligned evaluation files, unloadable models.
/// The CLI maps it to exit code 2; programmer errors (violated
/// preconditions) throw std::invalid_argument instead.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace recipebench
