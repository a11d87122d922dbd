#pragma once

#include <string>

#include "clm/descriptors.hpp"
#include "clm/lrsvm.hpp"

namespace clm {

// CLMF descriptor container: magic "CLMF", version u32, N u32, k u32,
// then N*k float32 row-major, N*2 float32 positions, N float32 scales.
// Little-endian throughout.
void write_clmf(const std::string& path, const DescriptorSet& ds);
DescriptorSet read_clmf(const std::string& path);

// Model file: magic "CLMM", u32 JSON header length, JSON header, then
// little-endian float64 payload (projection blocks row-major, then per
// class w and b).
void save_model(const std::string& path, const lrsvm::LrsvmModel& model,
                const std::string& config_echo_json);
lrsvm::LrsvmModel load_model(const std::string& path, std::string* config_echo_json = nullptr);

// Pretty-printed JSON header of a model file.
std::string model_header_json(const std::string& path);

}  // namespace clm
