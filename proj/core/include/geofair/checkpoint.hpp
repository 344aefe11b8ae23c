#pragma once

#include <filesystem>
#include <string>

#include "geofair/mlp.hpp"

namespace geofair {

/// Model checkpoint file, format version 1:
///   bytes 0..10   magic "GEOFAIR-MLP"
///   u32           format version (1)
///   u32           input_dim
///   u32           hidden layer count H
///   u32 x H       hidden dims
///   u32           output_dim
///   f64           dropout_prob
///   u8  x H       per-hidden-layer ReLU flags
///   f64 ...       parameters in layer order: weights row-major, then bias
/// All integers and floats little-endian.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

std::string model_to_bytes(const MlpModel& model);
MlpModel model_from_bytes(std::string_view bytes);

}  // namespace geofair
