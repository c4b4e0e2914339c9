#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace isden {

// CRC-64/XZ (ECMA-182 polynomial, reflected, init and xorout all ones).
// crc64(span of "123456789") == 0x995DC9BBDF1939FA.
std::uint64_t crc64(std::span<const std::uint8_t> bytes, std::uint64_t crc = 0);

}  // namespace isden
