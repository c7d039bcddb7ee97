#pragma once

#include "tiglab/autograd.hpp"
#include "tiglab/training.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tiglab {

/// Hex SHA-1 of raw bytes.
std::string sha1_hex(std::string_view bytes);
/// Git-style content hash: SHA-1 of "blob <size>\0" followed by the bytes.
std::string content_hash(std::string_view bytes);
std::string content_hash_file(const std::filesystem::path& path);

struct ArchiveTensor {
  std::string name;
  Mat value;
};

/// Self-describing tensor archive:
///   "TIGLABAR" | uint32 version | uint64 header length | JSON header | row-major doubles.
struct Archive {
  static constexpr std::uint32_t kVersion = 1;

  std::string kind;  // "backbone" or "downstream"
  std::string tag;
  std::string config_hash;
  std::string rng_state;
  std::vector<ArchiveTensor> tensors;

  const Mat* find(const std::string& name) const;
};

std::string encode_archive(const Archive& archive);
Archive decode_archive(std::string_view bytes);
void write_archive(const std::filesystem::path& path, const Archive& archive);
Archive read_archive(const std::filesystem::path& path);

/// Archive bytes of a parameter list in order; equal bytes mean bit-identical values.
std::string serialize_parameters(const ag::ParamList& params);

/// Copies archived tensors into `params` by name; shapes must match.
void load_parameters(const Archive& archive, const ag::ParamList& params);

/// Hash of everything that fixes the backbone's parameter shapes.
std::string backbone_config_hash(const BackboneSpec& spec, int d_n, int d_e);

/// Theta, time encoder and flushed memory (memory rows plus last-update column).
void save_checkpoint(const std::filesystem::path& path, Artifacts& artifacts, const BackboneSpec& spec, int d_n,
                     int d_e, const std::string& rng_state = {});

/// Rebuilds a backbone and its memory. A config-hash mismatch throws unless `force`.
Artifacts load_checkpoint(const std::filesystem::path& path, const BackboneSpec& spec, int d_n, int d_e,
                          bool force = false);

}  // namespace tiglab
