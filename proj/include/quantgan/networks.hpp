#pragma once

// Network topologies built on the autodiff engine: multilayer perceptrons,
// vanilla TCNs, temporal blocks and TCNs with skip connections.
//
// Parameters live in a ParamStore keyed by hierarchical names such as
// "block3.conv1.weight". Declaration order is stable and is the order used for
// optimizer state and checkpoint serialization.

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "quantgan/autodiff.hpp"
#include "quantgan/random.hpp"

namespace quantgan {

enum class Activation { PReLU, ReLU, Tanh };

std::string to_string(Activation a);
Activation activation_from_string(std::string_view name);

class ParamStore {
 public:
  struct Entry {
    std::string name;
    ad::Tensor tensor;
  };

  ad::Tensor& add(std::string name, ad::Tensor tensor);
  bool contains(std::string_view name) const;
  const ad::Tensor& get(std::string_view name) const;
  ad::Tensor& get(std::string_view name);

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<ad::Tensor> tensors() const;
  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;

  void zero_grad();
  /// Deep copy with fresh leaves.
  ParamStore clone() const;
  /// Overwrites values in place; names and shapes must match.
  void assign_values(const ParamStore& other);
  /// Appends every entry of `other` with the given name prefix.
  void merge(const ParamStore& other, const std::string& prefix);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Multilayer perceptron

struct MlpSpec {
  /// N_0 (input) .. N_{L+1} (output); at least one hidden layer.
  std::vector<std::size_t> dims;
  Activation activation = Activation::PReLU;

  void validate() const;
};

ParamStore init_mlp(const MlpSpec& spec, Rng& rng);
/// aff_{L+1} o phi o aff_L o ... o phi o aff_1. x is [N_0] or [B x N_0].
ad::Tensor mlp_forward(const MlpSpec& spec, const ParamStore& params, const ad::Tensor& x);

// ---------------------------------------------------------------------------
// Vanilla TCN: causal convolutional layers each followed by an activation,
// then a 1x1 output convolution.

struct ConvLayerSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t dilation = 1;

  std::size_t shrinkage() const { return dilation * (kernel - 1); }
};

struct VanillaTcnSpec {
  std::vector<ConvLayerSpec> layers;
  std::size_t output_channels = 1;
  Activation activation = Activation::PReLU;

  /// Layers with kernel K and dilations D^0, D^1, ..., D^{L-1}.
  static VanillaTcnSpec with_dilation_factor(std::size_t input_channels, std::size_t hidden,
                                             std::size_t output_channels, std::size_t layers,
                                             std::size_t kernel, std::size_t dilation_factor);
  void validate() const;
};

ParamStore init_vanilla_tcn(const VanillaTcnSpec& spec, Rng& rng);
ad::Tensor vanilla_tcn_forward(const VanillaTcnSpec& spec, const ParamStore& params,
                               const ad::Tensor& X);

// ---------------------------------------------------------------------------
// Temporal blocks and TCN with skip connections

struct TemporalBlockSpec {
  std::size_t in_channels = 1;
  std::size_t hidden_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t dilation = 1;

  /// Time steps removed by the two convolutions: 2 D (K - 1).
  std::size_t shrinkage() const { return 2 * dilation * (kernel - 1); }
  void validate() const;
  bool operator==(const TemporalBlockSpec&) const = default;
};

struct TcnSkipSpec {
  std::vector<TemporalBlockSpec> blocks;
  std::size_t skip_channels = 1;
  std::size_t output_channels = 1;

  std::size_t input_channels() const { return blocks.front().in_channels; }
  void validate() const;
  bool operator==(const TcnSkipSpec&) const = default;

  /// The reported architecture: a K=1 feature-lift block followed by K=2
  /// blocks with dilations 1, 2, 4, 8, 16, 32 (receptive field 127). The skip
  /// width equals the hidden width.
  static TcnSkipSpec reference(std::size_t input_channels, std::size_t hidden,
                               std::size_t output_channels);
  /// Same layout with a configurable number of dilated K=2 blocks
  /// (dilations 1 .. 2^{levels-1}); receptive field 2^{levels+1} - 1.
  static TcnSkipSpec dilated(std::size_t input_channels, std::size_t hidden,
                             std::size_t output_channels, std::size_t levels);
};

std::size_t receptive_field_size(const TcnSkipSpec& spec);
std::size_t receptive_field_size(const VanillaTcnSpec& spec);

void init_temporal_block(const TemporalBlockSpec& spec, Rng& rng, const std::string& prefix,
                         ParamStore& params);
/// phi_2 o w_2 o phi_1 o w_1 applied to X [N_I x T] or [B x N_I x T].
ad::Tensor temporal_block_forward(const TemporalBlockSpec& spec, const ParamStore& params,
                                  const ad::Tensor& X, const std::string& prefix = "");

ParamStore init_tcn(const TcnSkipSpec& spec, Rng& rng);
/// Output is [N_out x T_L] (or batched) with T_L = T_0 - RFS + 1.
ad::Tensor tcn_skip_forward(const TcnSkipSpec& spec, const ParamStore& params,
                            const ad::Tensor& X);

/// Directional derivative of the TCN output at X along the input direction V.
/// The primal pass is not recorded; the returned tangent is differentiable
/// with respect to the parameters. Because every activation is piecewise
/// linear, this gradient is exact almost everywhere.
ad::Tensor tcn_skip_tangent(const TcnSkipSpec& spec, const ParamStore& params,
                            const ad::Tensor& X, const ad::Tensor& V);

// ---------------------------------------------------------------------------
// Serialization of architectures (module name + argument tuple per row).

nlohmann::json to_json(const TcnSkipSpec& spec);
TcnSkipSpec tcn_spec_from_json(const nlohmann::json& j);

}  // namespace quantgan
