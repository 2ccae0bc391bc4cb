#include "quantgan/networks.hpp"

#include <cmath>
#include <stdexcept>

namespace quantgan {

using ad::Tensor;

namespace {

constexpr double kInitialSlope = 0.25;

Tensor uniform_tensor(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  const double half_width = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> values(ad::numel(shape));
  for (auto& v : values) v = (2.0 * rng.uniform() - 1.0) * half_width;
  return Tensor::from(std::move(shape), std::move(values), true);
}

void add_conv(ParamStore& params, const std::string& name, std::size_t kernel, std::size_t in,
              std::size_t out, Rng& rng) {
  params.add(name + ".weight", uniform_tensor({kernel, in, out}, kernel * in, rng));
  params.add(name + ".bias", Tensor::zeros({out}, true));
}

Tensor apply_activation(Activation a, const Tensor& x, const ParamStore& params,
                        const std::string& slope_name) {
  switch (a) {
    case Activation::PReLU:
      return ad::prelu(x, params.get(slope_name));
    case Activation::ReLU:
      return ad::relu(x);
    case Activation::Tanh:
      return ad::tanh(x);
  }
  throw std::logic_error("unknown activation");
}

std::string join(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

Tensor conv(const ParamStore& params, const std::string& name, const Tensor& X,
            std::size_t dilation) {
  return ad::dilated_causal_conv(X, params.get(name + ".weight"), params.get(name + ".bias"),
                                 dilation);
}

Tensor conv_tangent(const ParamStore& params, const std::string& name, const Tensor& V,
                    std::size_t dilation) {
  return ad::dilated_causal_conv(V, params.get(name + ".weight"), Tensor(), dilation);
}

Tensor crop_last(const Tensor& x, std::size_t length) {
  const std::size_t T = x.shape().back();
  return T == length ? x : ad::slice_time(x, T - length, length);
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::PReLU:
      return "prelu";
    case Activation::ReLU:
      return "relu";
    case Activation::Tanh:
      return "tanh";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view name) {
  if (name == "prelu") return Activation::PReLU;
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

// ---------------------------------------------------------------------------
// ParamStore

Tensor& ParamStore::add(std::string name, Tensor tensor) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(tensor)});
  return entries_.back().tensor;
}

bool ParamStore::contains(std::string_view name) const {
  return index_.count(std::string(name)) > 0;
}

const Tensor& ParamStore::get(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + std::string(name));
  return entries_[it->second].tensor;
}

Tensor& ParamStore::get(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const ParamStore&>(*this).get(name));
}

std::vector<Tensor> ParamStore::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.tensor);
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

ParamStore ParamStore::clone() const {
  ParamStore copy;
  for (const auto& e : entries_) copy.add(e.name, e.tensor.clone());
  return copy;
}

void ParamStore::assign_values(const ParamStore& other) {
  if (other.size() != size()) throw std::invalid_argument("assign_values: size mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& src = other.entries_[i];
    auto& dst = entries_[i];
    if (src.name != dst.name || src.tensor.shape() != dst.tensor.shape()) {
      throw std::invalid_argument("assign_values: layout mismatch at " + dst.name);
    }
    auto values = dst.tensor.mutable_data();
    std::copy(src.tensor.data().begin(), src.tensor.data().end(), values.begin());
  }
}

void ParamStore::merge(const ParamStore& other, const std::string& prefix) {
  for (const auto& e : other.entries_) add(join(prefix, e.name), e.tensor);
}

// ---------------------------------------------------------------------------
// MLP

void MlpSpec::validate() const {
  if (dims.size() < 3) throw std::invalid_argument("MlpSpec: needs at least one hidden layer");
  for (auto d : dims)
    if (d == 0) throw std::invalid_argument("MlpSpec: dimensions must be positive");
}

ParamStore init_mlp(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  ParamStore params;
  for (std::size_t l = 0; l + 1 < spec.dims.size(); ++l) {
    const std::string name = "layer" + std::to_string(l + 1);
    const std::size_t in = spec.dims[l], out = spec.dims[l + 1];
    params.add(name + ".weight", uniform_tensor({out, in}, in, rng));
    params.add(name + ".bias", Tensor::zeros({out}, true));
    const bool hidden = l + 2 < spec.dims.size();
    if (hidden && spec.activation == Activation::PReLU) {
      params.add(name + ".slope", Tensor::scalar(kInitialSlope, true));
    }
  }
  return params;
}

Tensor mlp_forward(const MlpSpec& spec, const ParamStore& params, const Tensor& x) {
  spec.validate();
  Tensor h = x;
  const std::size_t layers = spec.dims.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string name = "layer" + std::to_string(l + 1);
    h = ad::affine(h, params.get(name + ".weight"), params.get(name + ".bias"));
    if (l + 1 < layers) h = apply_activation(spec.activation, h, params, name + ".slope");
  }
  return h;
}

// ---------------------------------------------------------------------------
// Vanilla TCN

VanillaTcnSpec VanillaTcnSpec::with_dilation_factor(std::size_t input_channels,
                                                    std::size_t hidden,
                                                    std::size_t output_channels,
                                                    std::size_t layers, std::size_t kernel,
                                                    std::size_t dilation_factor) {
  VanillaTcnSpec spec;
  std::size_t dilation = 1;
  for (std::size_t l = 0; l < layers; ++l) {
    spec.layers.push_back({l == 0 ? input_channels : hidden, hidden, kernel, dilation});
    dilation *= dilation_factor;
  }
  spec.output_channels = output_channels;
  return spec;
}

void VanillaTcnSpec::validate() const {
  if (layers.empty()) throw std::invalid_argument("VanillaTcnSpec: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& c = layers[l];
    if (!c.in_channels || !c.out_channels || !c.kernel || !c.dilation) {
      throw std::invalid_argument("VanillaTcnSpec: layer arguments must be positive");
    }
    if (l > 0 && c.in_channels != layers[l - 1].out_channels) {
      throw std::invalid_argument("VanillaTcnSpec: channel mismatch between layers");
    }
  }
  if (!output_channels) throw std::invalid_argument("VanillaTcnSpec: output channels");
}

ParamStore init_vanilla_tcn(const VanillaTcnSpec& spec, Rng& rng) {
  spec.validate();
  ParamStore params;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& c = spec.layers[l];
    const std::string name = "layer" + std::to_string(l + 1);
    add_conv(params, name, c.kernel, c.in_channels, c.out_channels, rng);
    if (spec.activation == Activation::PReLU) {
      params.add(name + ".slope", Tensor::scalar(kInitialSlope, true));
    }
  }
  add_conv(params, "output", 1, spec.layers.back().out_channels, spec.output_channels, rng);
  return params;
}

Tensor vanilla_tcn_forward(const VanillaTcnSpec& spec, const ParamStore& params,
                           const Tensor& X) {
  Tensor h = X;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const std::string name = "layer" + std::to_string(l + 1);
    h = conv(params, name, h, spec.layers[l].dilation);
    h = apply_activation(spec.activation, h, params, name + ".slope");
  }
  return conv(params, "output", h, 1);
}

std::size_t receptive_field_size(const VanillaTcnSpec& spec) {
  std::size_t rfs = 1;
  for (const auto& c : spec.layers) rfs += c.shrinkage();
  return rfs;
}

// ---------------------------------------------------------------------------
// Temporal block / TCN with skip connections

void TemporalBlockSpec::validate() const {
  if (!in_channels || !hidden_channels || !out_channels || !kernel || !dilation) {
    throw std::invalid_argument("TemporalBlockSpec: arguments must be positive");
  }
}

void TcnSkipSpec::validate() const {
  if (blocks.empty()) throw std::invalid_argument("TcnSkipSpec: no blocks");
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    blocks[l].validate();
    if (l > 0 && blocks[l].in_channels != blocks[l - 1].out_channels) {
      throw std::invalid_argument("TcnSkipSpec: channel mismatch between blocks " +
                                  std::to_string(l) + " and " + std::to_string(l + 1));
    }
  }
  if (!skip_channels || !output_channels) {
    throw std::invalid_argument("TcnSkipSpec: skip/output channels must be positive");
  }
}

TcnSkipSpec TcnSkipSpec::dilated(std::size_t input_channels, std::size_t hidden,
                                 std::size_t output_channels, std::size_t levels) {
  TcnSkipSpec spec;
  spec.blocks.push_back({input_channels, hidden, hidden, 1, 1});
  std::size_t dilation = 1;
  for (std::size_t l = 0; l < levels; ++l) {
    spec.blocks.push_back({hidden, hidden, hidden, 2, dilation});
    dilation *= 2;
  }
  spec.skip_channels = hidden;
  spec.output_channels = output_channels;
  return spec;
}

TcnSkipSpec TcnSkipSpec::reference(std::size_t input_channels, std::size_t hidden,
                                   std::size_t output_channels) {
  return dilated(input_channels, hidden, output_channels, 6);
}

std::size_t receptive_field_size(const TcnSkipSpec& spec) {
  std::size_t rfs = 1;
  for (const auto& b : spec.blocks) rfs += b.shrinkage();
  return rfs;
}

void init_temporal_block(const TemporalBlockSpec& spec, Rng& rng, const std::string& prefix,
                         ParamStore& params) {
  spec.validate();
  add_conv(params, join(prefix, "conv1"), spec.kernel, spec.in_channels, spec.hidden_channels,
           rng);
  params.add(join(prefix, "prelu1.slope"), Tensor::scalar(kInitialSlope, true));
  add_conv(params, join(prefix, "conv2"), spec.kernel, spec.hidden_channels, spec.out_channels,
           rng);
  params.add(join(prefix, "prelu2.slope"), Tensor::scalar(kInitialSlope, true));
}

Tensor temporal_block_forward(const TemporalBlockSpec& spec, const ParamStore& params,
                              const Tensor& X, const std::string& prefix) {
  const std::size_t T = X.shape().back();
  if (T < spec.shrinkage() + 1) {
    throw ad::ShapeError("temporal block input length " + std::to_string(T) +
                         " shorter than its window " + std::to_string(spec.shrinkage() + 1));
  }
  Tensor h = conv(params, join(prefix, "conv1"), X, spec.dilation);
  h = ad::prelu(h, params.get(join(prefix, "prelu1.slope")));
  h = conv(params, join(prefix, "conv2"), h, spec.dilation);
  return ad::prelu(h, params.get(join(prefix, "prelu2.slope")));
}

ParamStore init_tcn(const TcnSkipSpec& spec, Rng& rng) {
  spec.validate();
  ParamStore params;
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    const std::string block = "block" + std::to_string(l + 1);
    init_temporal_block(spec.blocks[l], rng, block, params);
    add_conv(params, block + ".skip", 1, spec.blocks[l].out_channels, spec.skip_channels, rng);
  }
  add_conv(params, "output", 1, spec.skip_channels, spec.output_channels, rng);
  return params;
}

Tensor tcn_skip_forward(const TcnSkipSpec& spec, const ParamStore& params, const Tensor& X) {
  spec.validate();
  const std::size_t T0 = X.shape().back();
  const std::size_t rfs = receptive_field_size(spec);
  if (T0 < rfs) {
    throw ad::ShapeError("TCN input length " + std::to_string(T0) +
                         " shorter than receptive field " + std::to_string(rfs));
  }
  const std::size_t TL = T0 - (rfs - 1);
  Tensor h = X;
  Tensor skip_sum;
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    const std::string block = "block" + std::to_string(l + 1);
    h = temporal_block_forward(spec.blocks[l], params, h, block);
    Tensor skip = crop_last(conv(params, block + ".skip", h, 1), TL);
    skip_sum = skip_sum.defined() ? ad::add(skip_sum, skip) : skip;
  }
  return conv(params, "output", skip_sum, 1);
}

Tensor tcn_skip_tangent(const TcnSkipSpec& spec, const ParamStore& params, const Tensor& X,
                        const Tensor& V) {
  spec.validate();
  if (X.shape() != V.shape()) throw ad::ShapeError("tcn_skip_tangent: X and V shapes differ");
  const std::size_t T0 = X.shape().back();
  const std::size_t rfs = receptive_field_size(spec);
  if (T0 < rfs) throw ad::ShapeError("tcn_skip_tangent: input shorter than receptive field");
  const std::size_t TL = T0 - (rfs - 1);

  auto primal = [](auto&& f) {
    ad::NoGradGuard guard;
    return f();
  };

  Tensor h = X;
  Tensor dh = V;
  Tensor skip_sum;
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    const std::string block = "block" + std::to_string(l + 1);
    const auto& b = spec.blocks[l];
    const Tensor& a1 = params.get(block + ".prelu1.slope");
    const Tensor& a2 = params.get(block + ".prelu2.slope");

    Tensor z1 = primal([&] { return conv(params, block + ".conv1", h, b.dilation); });
    Tensor dz1 = conv_tangent(params, block + ".conv1", dh, b.dilation);
    Tensor h1 = primal([&] { return ad::prelu(z1, a1); });
    Tensor dh1 = ad::prelu_tangent(dz1, z1, a1);

    Tensor z2 = primal([&] { return conv(params, block + ".conv2", h1, b.dilation); });
    Tensor dz2 = conv_tangent(params, block + ".conv2", dh1, b.dilation);
    h = primal([&] { return ad::prelu(z2, a2); });
    dh = ad::prelu_tangent(dz2, z2, a2);

    Tensor dskip = crop_last(conv_tangent(params, block + ".skip", dh, 1), TL);
    skip_sum = skip_sum.defined() ? ad::add(skip_sum, dskip) : dskip;
  }
  return conv_tangent(params, "output", skip_sum, 1);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const TcnSkipSpec& spec) {
  nlohmann::json modules = nlohmann::json::array();
  for (const auto& b : spec.blocks) {
    modules.push_back({{"module", "temporal_block"},
                       {"args", {b.in_channels, b.hidden_channels, b.out_channels, b.kernel,
                                 b.dilation}}});
  }
  modules.push_back(
      {{"module", "conv1x1"}, {"args", {spec.skip_channels, spec.output_channels, 1, 1}}});
  return {{"type", "tcn_skip"},
          {"skip_channels", spec.skip_channels},
          {"output_channels", spec.output_channels},
          {"receptive_field_size", receptive_field_size(spec)},
          {"modules", modules}};
}

TcnSkipSpec tcn_spec_from_json(const nlohmann::json& j) {
  TcnSkipSpec spec;
  if (j.value("type", "tcn_skip") != "tcn_skip") {
    throw std::invalid_argument("architecture: unsupported type " + j.at("type").dump());
  }
  bool have_output = false;
  for (const auto& m : j.at("modules")) {
    const auto name = m.at("module").get<std::string>();
    const auto args = m.at("args").get<std::vector<std::size_t>>();
    if (name == "temporal_block") {
      if (args.size() != 5) throw std::invalid_argument("temporal_block expects 5 arguments");
      spec.blocks.push_back({args[0], args[1], args[2], args[3], args[4]});
    } else if (name == "conv1x1") {
      if (args.size() != 4 || args[2] != 1 || args[3] != 1) {
        throw std::invalid_argument("conv1x1 expects arguments (N_in, N_out, 1, 1)");
      }
      spec.skip_channels = args[0];
      spec.output_channels = args[1];
      have_output = true;
    } else {
      throw std::invalid_argument("architecture: unknown module " + name);
    }
  }
  if (!have_output) throw std::invalid_argument("architecture: missing conv1x1 output module");
  spec.validate();
  if (j.contains("receptive_field_size") &&
      j.at("receptive_field_size").get<std::size_t>() != receptive_field_size(spec)) {
    throw std::invalid_argument("architecture: receptive_field_size does not match modules");
  }
  return spec;
}

}  // namespace quantgan
