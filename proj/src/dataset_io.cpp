#include "beatnote/dataset_io.hpp"

#include <cstring>
#include <fstream>

#include "binary_io.hpp"

namespace beatnote {

using detail::get_le;
using detail::put_le;

namespace {

void put_samples(std::ostream& out, const std::vector<float>& samples) {
    for (float v : samples) put_le(out, v);
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& ds) {
    if (ds.n_samples < 2 || ds.n_samples > 0xFFFF) {
        throw IoError("dataset: n_samples out of range");
    }
    out.write("BNDS", 4);
    put_le<std::uint16_t>(out, kDatasetFormatVersion);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(ds.n_samples));
    put_le<float>(out, static_cast<float>(ds.sample_rate_hz));
    put_le<std::uint64_t>(out, ds.records.size());
    const auto n = static_cast<std::size_t>(ds.n_samples);
    for (const DatasetRecord& rec : ds.records) {
        if (rec.noisy.samples.size() != n || rec.clean.samples.size() != n) {
            throw IoError("dataset: record length mismatch");
        }
        put_samples(out, rec.noisy.samples);
        put_samples(out, rec.clean.samples);
        put_le<float>(out, static_cast<float>(rec.frequency_hz));
    }
    if (!out) throw IoError("dataset: write failed");
}

void write_dataset_file(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("dataset: cannot open for writing: " + path);
    write_dataset(out, ds);
}

Dataset read_dataset(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "BNDS", 4) != 0) {
        throw IoError("dataset: bad magic");
    }
    const auto version = get_le<std::uint16_t>(in);
    if (version != kDatasetFormatVersion) {
        throw IoError("dataset: unsupported format version " + std::to_string(version));
    }
    Dataset ds;
    ds.n_samples = get_le<std::uint16_t>(in);
    if (ds.n_samples < 2) throw IoError("dataset: invalid n_samples");
    ds.sample_rate_hz = get_le<float>(in);
    const auto count = get_le<std::uint64_t>(in);
    if (count > (1ULL << 32)) throw IoError("dataset: implausible record count");
    ds.records.resize(count);
    const auto n = static_cast<std::size_t>(ds.n_samples);
    for (DatasetRecord& rec : ds.records) {
        rec.noisy.sample_rate_hz = ds.sample_rate_hz;
        rec.clean.sample_rate_hz = ds.sample_rate_hz;
        rec.noisy.samples.resize(n);
        rec.clean.samples.resize(n);
        for (float& v : rec.noisy.samples) v = get_le<float>(in);
        for (float& v : rec.clean.samples) v = get_le<float>(in);
        rec.frequency_hz = get_le<float>(in);
    }
    return ds;
}

Dataset read_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("dataset: cannot open: " + path);
    return read_dataset(in);
}

}  // namespace beatnote
