#include "quantgan/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace quantgan {

namespace {

constexpr std::array<char, 8> kMagic{'Q', 'G', 'A', 'N', 'C', 'K', 'P', 'T'};

template <class U>
void write_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> b;
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), b.size());
}

template <class U>
U read_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> b;
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) throw CheckpointError("checkpoint: truncated file");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json architecture_json(const Generator& gen, const Discriminator& disc) {
  return {{"generator", to_json(gen)}, {"discriminator", to_json(disc.tcn)}};
}

std::uint64_t hash_parts(const nlohmann::json& arch, const ParamStore& g, const ParamStore& d) {
  std::uint64_t h = fnv1a(arch.dump());
  for (const auto* store : {&g, &d})
    for (const auto& e : store->entries()) {
      h = fnv1a(e.name, h);
      h = fnv1a(ad::shape_string(e.tensor.shape()), h);
    }
  return h;
}

std::string hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace

std::uint64_t architecture_hash(const Generator& gen, const Discriminator& disc) {
  return hash_parts(architecture_json(gen, disc), gen.params, disc.params);
}

void save_checkpoint(std::ostream& out, const Generator& gen, const Discriminator& disc, const GanConfig& cfg,
                     const std::optional<PipelineState>& pipeline, std::size_t step) {
  nlohmann::json manifest = nlohmann::json::array();
  std::uint64_t offset = 0;
  auto list = [&](const ParamStore& store, const std::string& prefix) {
    for (const auto& e : store.entries()) {
      manifest.push_back({{"name", prefix + e.name}, {"shape", e.tensor.shape()}, {"offset", offset}});
      offset += 8 * e.tensor.numel();
    }
  };
  list(gen.params, "generator/");
  list(disc.params, "discriminator/");

  nlohmann::json header = architecture_json(gen, disc);
  header["gan_config"] = to_json(cfg);
  header["pipeline"] = pipeline ? to_json(*pipeline) : nlohmann::json(nullptr);
  header["step"] = step;
  header["architecture_hash"] = hex(architecture_hash(gen, disc));
  header["manifest"] = manifest;
  header["data_bytes"] = offset;
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* store : {&gen.params, &disc.params})
    for (const auto& e : store->entries())
      for (double v : e.tensor.data()) write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw CheckpointError("checkpoint: write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Generator& gen, const Discriminator& disc,
                     const GanConfig& cfg, const std::optional<PipelineState>& pipeline, std::size_t step) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
  save_checkpoint(out, gen, disc, cfg, pipeline, step);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::array<char, 8> magic;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw CheckpointError("checkpoint: bad magic");
  const auto version = read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  const auto length = read_le<std::uint64_t>(in);
  if (length > (std::uint64_t{1} << 32)) throw CheckpointError("checkpoint: implausible header length");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw CheckpointError("checkpoint: truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: header is not valid JSON: ") + e.what());
  }

  Rng unused(0);
  Checkpoint ck{generator_from_json(header.at("generator"), unused),
                Discriminator::create(tcn_spec_from_json(header.at("discriminator")), unused),
                gan_config_from_json(header.at("gan_config")),
                std::nullopt,
                header.at("step").get<std::size_t>()};
  if (!header.at("pipeline").is_null()) ck.pipeline = pipeline_from_json(header.at("pipeline"));

  if (header.at("architecture_hash").get<std::string>() != hex(architecture_hash(ck.generator, ck.discriminator)))
    throw ArchitectureMismatch("checkpoint: architecture hash does not match the stored architecture");

  const auto& manifest = header.at("manifest");
  std::size_t k = 0;
  std::uint64_t offset = 0;
  for (auto [store, prefix] : {std::pair{&ck.generator.params, "generator/"}, {&ck.discriminator.params, "discriminator/"}})
    for (const auto& e : store->entries()) {
      if (k >= manifest.size()) throw CheckpointError("checkpoint: manifest is shorter than the architecture");
      const auto& m = manifest[k++];
      if (m.at("name").get<std::string>() != prefix + e.name || m.at("shape").get<ad::Shape>() != e.tensor.shape() ||
          m.at("offset").get<std::uint64_t>() != offset)
        throw ArchitectureMismatch("checkpoint: manifest entry " + m.dump() + " does not match parameter " + e.name);
      ad::Tensor t = e.tensor;
      for (double& v : t.mutable_data()) v = std::bit_cast<double>(read_le<std::uint64_t>(in));
      offset += 8 * t.numel();
    }
  if (k != manifest.size()) throw CheckpointError("checkpoint: manifest lists extra tensors");
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  return load_checkpoint(in);
}

void require_architecture(const Checkpoint& ckpt, GeneratorKind kind, const TcnSkipSpec& generator_tcn,
                          const TcnSkipSpec& discriminator_tcn) {
  if (ckpt.generator.kind != kind || !(ckpt.generator.tcn == generator_tcn) ||
      !(ckpt.discriminator.tcn == discriminator_tcn)) {
    Rng unused(0);
    const auto expected = architecture_hash(Generator::create(kind, generator_tcn, unused),
                                            Discriminator::create(discriminator_tcn, unused));
    throw ArchitectureMismatch("checkpoint: architecture hash " +
                               hex(architecture_hash(ckpt.generator, ckpt.discriminator)) +
                               " does not match the configured " + hex(expected));
  }
}

}  // namespace quantgan
