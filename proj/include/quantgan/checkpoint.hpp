#pragma once

// Binary checkpoints. Layout:
//   8 bytes  magic "QGANCKPT"
//   u32 LE   format version
//   u64 LE   header length in bytes
//   header   UTF-8 JSON: architectures, GAN config, pipeline state, step,
//            architecture hash and a manifest of {name, shape, offset}
//   data     little-endian float64 values of every parameter tensor in
//            declaration order, generator first; offsets count from the
//            start of this section

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "quantgan/generators.hpp"
#include "quantgan/preprocessing.hpp"
#include "quantgan/training.hpp"

namespace quantgan {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stored architectures do not match the ones the caller expects.
class ArchitectureMismatch : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// FNV-1a over the canonical JSON of both architectures plus every parameter
/// name and shape.
std::uint64_t architecture_hash(const Generator& gen, const Discriminator& disc);

struct Checkpoint {
  Generator generator;
  Discriminator discriminator;
  GanConfig config;
  std::optional<PipelineState> pipeline;
  std::size_t step = 0;
};

void save_checkpoint(std::ostream& out, const Generator& gen, const Discriminator& disc, const GanConfig& cfg,
                     const std::optional<PipelineState>& pipeline, std::size_t step);
void save_checkpoint(const std::filesystem::path& path, const Generator& gen, const Discriminator& disc,
                     const GanConfig& cfg, const std::optional<PipelineState>& pipeline, std::size_t step);

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws ArchitectureMismatch unless `ckpt` was written for exactly these architectures.
void require_architecture(const Checkpoint& ckpt, GeneratorKind kind, const TcnSkipSpec& generator_tcn,
                          const TcnSkipSpec& discriminator_tcn);

}  // namespace quantgan
