#pragma once

#include <string>
#include <vector>

#include "oracle/baseband.hpp"
#include "oracle/cnn.hpp"

namespace oracle::io {

// Container layout (all integers little-endian):
//   magic "ORCL" | u8 version | u8 kind | u16 reserved | kind-specific header
//   | payload | metadata JSON.
// Dataset payload is interleaved 32-bit float I,Q pairs for all traces
// back to back; the header carries a (device_label, sample_count) table and
// a payload CRC32. Model files hold a JSON architecture descriptor plus a
// flat float32 weight blob described by a tensor manifest.
constexpr char kMagic[4] = {'O', 'R', 'C', 'L'};
constexpr uint8_t kFormatVersion = 1;
constexpr uint8_t kKindDataset = 1;
constexpr uint8_t kKindModel = 2;

struct LoadedDataset {
    std::vector<baseband::IqTrace> traces;
    std::string config_hash;
};

// Samples are stored as float32; doubles are quantized on save, so
// load(save(x)) == x holds bit-exactly on float32-representable samples
// (in particular, anything that has been through one save already).
void save_dataset(const std::string& path, const std::vector<baseband::IqTrace>& traces,
                  const std::string& config_hash);
LoadedDataset load_dataset(const std::string& path);

struct LoadedModel {
    cnn::CnnModel model;
    std::string config_hash;
};

void save_model(const std::string& path, const cnn::CnnModel& model,
                const std::string& config_hash);
LoadedModel load_model(const std::string& path);

uint32_t crc32(const uint8_t* data, size_t len);

}  // namespace oracle::io
