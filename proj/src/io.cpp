#include "quantgan/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace quantgan {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

bool valid_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  auto num = [&](std::size_t a, std::size_t n) {
    int v = 0;
    for (std::size_t i = a; i < a + n; ++i) v = 10 * v + (s[i] - '0');
    return v;
  };
  const std::chrono::year_month_day ymd{std::chrono::year(num(0, 4)), std::chrono::month(static_cast<unsigned>(num(5, 2))),
                                        std::chrono::day(static_cast<unsigned>(num(8, 2)))};
  return ymd.ok();
}

struct Header {
  std::vector<std::string> names;
  std::size_t index_of(const std::string& name, const std::string& source) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw DataError(source, 1, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }
};

Header read_header(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source, 0, "file is empty");
  Header h;
  for (auto f : split(line)) h.names.emplace_back(f);
  return h;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError(p.string(), 0, "cannot open file");
  return in;
}

}  // namespace

DataError::DataError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what), line_(line) {}

PriceDataset load_csv(std::istream& in, const std::string& source) {
  const auto header = read_header(in, source);
  const std::size_t di = header.index_of("date", source), ci = header.index_of("close", source);
  PriceDataset d;
  d.source = source;
  std::string line;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    auto f = split(line);
    if (f.size() != header.names.size())
      throw DataError(source, lineno,
                      "expected " + std::to_string(header.names.size()) + " fields, got " + std::to_string(f.size()));
    if (!valid_iso_date(f[di])) throw DataError(source, lineno, "unparseable date '" + std::string(f[di]) + "'");
    auto close = parse_double(f[ci]);
    if (!close || !std::isfinite(*close)) throw DataError(source, lineno, "unparseable close '" + std::string(f[ci]) + "'");
    if (*close <= 0.0) throw DataError(source, lineno, "close must be positive, got " + std::string(f[ci]));
    if (!d.dates.empty() && !(d.dates.back() < f[di]))
      throw DataError(source, lineno, "date " + std::string(f[di]) + " does not follow " + d.dates.back() +
                                          "; dates must be strictly increasing");
    d.dates.emplace_back(f[di]);
    d.closes.push_back(*close);
  }
  return d;
}

PriceDataset load_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return load_csv(in, path.string());
}

void write_price_csv(std::ostream& out, const PriceDataset& data) {
  out << "date,close\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) out << data.dates[i] << ',' << data.closes[i] << '\n';
  out.precision(old);
}

std::vector<double> read_csv_column(std::istream& in, const std::string& column, const std::string& source) {
  const auto header = read_header(in, source);
  const auto idx = header.index_of(column, source);
  std::vector<double> out;
  std::string line;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    auto f = split(line);
    if (f.size() != header.names.size()) throw DataError(source, lineno, "wrong number of fields");
    auto v = parse_double(f[idx]);
    if (!v) throw DataError(source, lineno, "unparseable " + column + " '" + std::string(f[idx]) + "'");
    out.push_back(*v);
  }
  return out;
}

std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column) {
  auto in = open_in(path);
  return read_csv_column(in, column, path.string());
}

void write_series_csv(std::ostream& out, const std::vector<double>& values, const std::string& name) {
  out << "t," << name << '\n';
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) out << i + 1 << ',' << values[i] << '\n';
  out.precision(old);
}

std::vector<std::vector<double>> read_paths_csv(std::istream& in, const std::string& column, const std::string& source) {
  const auto header = read_header(in, source);
  const auto pi = header.index_of("path_id", source), vi = header.index_of(column, source);
  std::map<std::size_t, std::vector<double>> paths;
  std::string line;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    auto f = split(line);
    if (f.size() != header.names.size()) throw DataError(source, lineno, "wrong number of fields");
    auto id = parse_double(f[pi]);
    auto v = parse_double(f[vi]);
    if (!id || *id < 0 || *id != std::floor(*id) || !v) throw DataError(source, lineno, "unparseable row");
    paths[static_cast<std::size_t>(*id)].push_back(*v);
  }
  std::vector<std::vector<double>> out;
  for (auto& [id, p] : paths) out.push_back(std::move(p));
  return out;
}

void write_price_paths_csv(std::ostream& out, const std::vector<std::vector<double>>& prices) {
  out << "path_id,t,price\n";
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < prices.size(); ++k)
    for (std::size_t t = 0; t < prices[k].size(); ++t) out << k << ',' << t << ',' << prices[k][t] << '\n';
  out.precision(old);
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::PureTcn: return "pure_tcn";
    case ModelKind::ConstrainedSvnn: return "c_svnn";
    case ModelKind::Garch: return "garch";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "pure_tcn") return ModelKind::PureTcn;
  if (name == "c_svnn") return ModelKind::ConstrainedSvnn;
  if (name == "garch") return ModelKind::Garch;
  throw std::invalid_argument("unknown model kind '" + name + "' (expected pure_tcn, c_svnn or garch)");
}

void RunConfig::validate() const {
  generator.validate();
  discriminator.validate();
  gan.validate();
  metrics.validate();
  if (threads == 0) throw std::invalid_argument("config: threads must be >= 1");
  if (generator.input_channels() == 0) throw std::invalid_argument("config: generator needs noise channels");
  const std::size_t want_out = model == ModelKind::ConstrainedSvnn ? 2 : 1;
  if (model != ModelKind::Garch && generator.output_channels != want_out)
    throw std::invalid_argument("config: " + to_string(model) + " generator needs " + std::to_string(want_out) +
                                " output channels");
  if (discriminator.input_channels() != 1 || discriminator.output_channels != 1)
    throw std::invalid_argument("config: discriminator needs one input and one output channel");
  if (generate.s0 && !(*generate.s0 > 0.0)) throw std::invalid_argument("config: generate.s0 must be positive");
}

TcnSkipSpec architecture_from_json(const nlohmann::json& j, std::size_t input_channels, std::size_t output_channels) {
  if (j.contains("modules")) {
    auto spec = tcn_spec_from_json(j);
    spec.validate();
    return spec;
  }
  return TcnSkipSpec::dilated(input_channels, j.value("hidden", std::size_t{80}), output_channels,
                              j.value("levels", std::size_t{6}));
}

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  if (!j.contains("seed")) throw std::invalid_argument("config: 'seed' is required");
  RunConfig c;
  c.model = model_kind_from_string(j.value("model", std::string("pure_tcn")));
  c.seed = j.at("seed").get<std::uint64_t>();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  if (j.contains("data")) c.data = resolve(j.at("data").get<std::string>());
  if (j.contains("out")) c.out = resolve(j.at("out").get<std::string>());
  if (j.contains("checkpoint") && !j.at("checkpoint").is_null())
    c.checkpoint = resolve(j.at("checkpoint").get<std::string>());
  c.threads = j.value("threads", c.threads);

  const std::size_t gen_hidden = c.model == ModelKind::ConstrainedSvnn ? 50 : 80;
  const std::size_t gen_out = c.model == ModelKind::ConstrainedSvnn ? 2 : 1;
  const std::size_t noise = j.value("noise_dim", std::size_t{3});
  c.generator = architecture_from_json(j.value("generator", nlohmann::json{{"hidden", gen_hidden}}), noise, gen_out);
  c.discriminator = architecture_from_json(j.value("discriminator", nlohmann::json::object()), 1, 1);
  c.gan = gan_config_from_json(j.value("gan", nlohmann::json::object()));
  if (!j.contains("gan") || !j.at("gan").contains("seed")) c.gan.seed = c.seed;
  c.metrics = metric_config_from_json(j.value("metrics", nlohmann::json::object()));

  const auto g = j.value("generate", nlohmann::json::object());
  c.generate.num_paths = g.value("paths", c.generate.num_paths);
  c.generate.length = g.value("length", c.generate.length);
  if (g.contains("s0") && !g.at("s0").is_null()) c.generate.s0 = g.at("s0").get<double>();
  c.generate.diagnostics = g.value("diagnostics", c.generate.diagnostics);

  if (!c.data.empty() && !std::filesystem::exists(c.data))
    throw std::invalid_argument("config: data file " + c.data.string() + " does not exist");
  if (c.checkpoint && !std::filesystem::exists(*c.checkpoint))
    throw std::invalid_argument("config: checkpoint " + c.checkpoint->string() + " does not exist");
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json gen = {{"paths", c.generate.num_paths},
                        {"length", c.generate.length},
                        {"s0", c.generate.s0 ? nlohmann::json(*c.generate.s0) : nlohmann::json(nullptr)},
                        {"diagnostics", c.generate.diagnostics}};
  return {{"model", to_string(c.model)},
          {"seed", c.seed},
          {"data", c.data.string()},
          {"out", c.out.string()},
          {"checkpoint", c.checkpoint ? nlohmann::json(c.checkpoint->string()) : nlohmann::json(nullptr)},
          {"threads", c.threads},
          {"noise_dim", c.generator.input_channels()},
          {"generator", to_json(c.generator)},
          {"discriminator", to_json(c.discriminator)},
          {"gan", to_json(c.gan)},
          {"metrics", to_json(c.metrics)},
          {"generate", gen}};
}

}  // namespace quantgan
