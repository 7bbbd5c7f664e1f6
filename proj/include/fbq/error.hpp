#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbq {

// Serialization / file-parsing failure. Carries the byte offset at which the
// input stopped making sense.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

} // namespace fbq
