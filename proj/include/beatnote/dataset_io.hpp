#ifndef BEATNOTE_DATASET_IO_HPP
#define BEATNOTE_DATASET_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "beatnote/signal.hpp"

namespace beatnote {

// Dataset container, format "BNDS" version 1, all little-endian:
//   magic "BNDS" | version u16 | n_samples u16 | sample_rate f32 |
//   record count u64 | per record: noisy f32 x n, clean f32 x n, frequency f32

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Dataset {
    int n_samples = 50;
    double sample_rate_hz = 5000.0;
    std::vector<DatasetRecord> records;
};

constexpr std::uint16_t kDatasetFormatVersion = 1;

void write_dataset(std::ostream& out, const Dataset& ds);
void write_dataset_file(const std::string& path, const Dataset& ds);

Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);

}  // namespace beatnote

#endif  // BEATNOTE_DATASET_IO_HPP
