#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "isden/prior.hpp"

namespace isden {

// Model container, version 1. Little-endian integers, IEEE-754 binary64
// floats, matrices row-major.
//
//   offset  size  field
//   0       8     magic "ISDNMODL"
//   8       4     u32 format version (1)
//   12      4     u32 flags (0)
//   --- metadata
//           8     u64 M (clusters)
//           8     u64 p (patch dimension)
//           8     u64 patch_side
//           8     f64 beta
//           8     u64 N (patches in the store)
//           8     u64 dataset hash (FNV-1a, see hash_patches)
//           4     u32 outer iterations
//           4     u32 reserved (0)
//           8     i64 training start, unix seconds (0 = not recorded)
//           8     i64 training end, unix seconds (0 = not recorded)
//           8     u64 K, length of the log-likelihood trace
//           8K    f64 trace
//   --- M cluster blocks
//           8     f64 generalized Gaussian beta
//           8p    f64 gg mean
//           8p^2  f64 gg scatter
//           8p    f64 gaussian mean
//           8p^2  f64 gaussian covariance
//           8     u64 member count C
//           8C    u64 member indices
//   --- patch store
//           8Np   f64 patches
//   --- trailer
//           8     u64 CRC-64/XZ of every preceding byte
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const ClusterModel& model);

// Throws ModelMagicError, ModelVersionError, ModelTruncatedError,
// ModelChecksumError or ModelLoadError (inconsistent contents).
ClusterModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ClusterModel& model, const std::filesystem::path& path);
ClusterModel load_model(const std::filesystem::path& path);

}  // namespace isden
