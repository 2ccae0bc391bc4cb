#pragma once

// Data ingestion, run configuration and CSV persistence.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quantgan/evaluation.hpp"
#include "quantgan/generators.hpp"
#include "quantgan/networks.hpp"
#include "quantgan/training.hpp"

namespace quantgan {

/// Malformed input file; `line` is 1-based (the header is line 1), 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct PriceDataset {
  std::vector<std::string> dates;
  std::vector<double> closes;
  std::string source;

  std::size_t size() const { return closes.size(); }
};

/// Header must contain `date` and `close`; other columns are ignored. Dates
/// are ISO yyyy-mm-dd and strictly increasing; closes are positive.
PriceDataset load_csv(std::istream& in, const std::string& source = "<stream>");
PriceDataset load_csv(const std::filesystem::path& path);
void write_price_csv(std::ostream& out, const PriceDataset& data);

/// One numeric column of a headed CSV.
std::vector<double> read_csv_column(std::istream& in, const std::string& column, const std::string& source = "<stream>");
std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column);
/// Columns t,value with t starting at 1.
void write_series_csv(std::ostream& out, const std::vector<double>& values, const std::string& name = "value");

/// Paths back from the CSV written by write_paths_csv (log_return column), grouped by path_id.
std::vector<std::vector<double>> read_paths_csv(std::istream& in, const std::string& column = "log_return",
                                                const std::string& source = "<stream>");

/// Columns path_id,t,price with t = 0 for the initial spot.
void write_price_paths_csv(std::ostream& out, const std::vector<std::vector<double>>& prices);

enum class ModelKind { PureTcn, ConstrainedSvnn, Garch };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct GenerateOptions {
  std::size_t num_paths = 500;
  std::size_t length = 4000;
  /// Initial spot for price paths; defaults to the last observed close.
  std::optional<double> s0;
  /// Adds sigma, mu and epsilon columns for the constrained SVNN.
  bool diagnostics = false;
};

struct RunConfig {
  ModelKind model = ModelKind::PureTcn;
  std::uint64_t seed = 0;
  std::filesystem::path data;
  std::filesystem::path out = "run";
  std::optional<std::filesystem::path> checkpoint;
  std::size_t threads = 1;
  TcnSkipSpec generator;
  TcnSkipSpec discriminator;
  GanConfig gan;
  MetricConfig metrics;
  GenerateOptions generate;

  void validate() const;
};

/// Architecture from either the full module list or the short form
/// {"hidden": H, "levels": L} (pointwise block then L dilated blocks).
TcnSkipSpec architecture_from_json(const nlohmann::json& j, std::size_t input_channels, std::size_t output_channels);

/// Missing keys take defaults except `seed`, which is required. Relative
/// paths resolve against `base_dir`. Referenced input files must exist.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
/// Every field including defaults, so a run directory describes itself.
nlohmann::json to_json(const RunConfig& c);

}  // namespace quantgan
