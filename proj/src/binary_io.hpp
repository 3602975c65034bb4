#ifndef BEATNOTE_BINARY_IO_HPP
#define BEATNOTE_BINARY_IO_HPP

#include <bit>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "beatnote/dataset_io.hpp"

// Internal little-endian stream helpers shared by the file formats.

namespace beatnote::detail {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559,
              "IEEE-754 binary32 required");

template <typename T>
void put_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
            std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        }
    }
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw IoError("binary read: truncated stream");
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
            std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        }
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace beatnote::detail

#endif  // BEATNOTE_BINARY_IO_HPP
