#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "isochron/catalog.hpp"
#include "isochron/flow.hpp"

namespace isochron {

/// Resolved settings of one CLI run. Every field has a default so a report
/// can always echo the full configuration.
struct RunConfig {
  std::string system = "s2star";
  /// First-order coefficients as exact rationals ("1/3", "-2", "0.25").
  std::vector<std::string> coeffs;
  std::vector<double> ladder = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  std::vector<double> confirm_eps = {1e-3, 1e-4};
  int grid = 256;
  int order = 3;
  int k = 0;
  double tol = 1e-12;
  double dropout = 0.05;
  std::string section = "auto";
  std::string catalog_file;
  std::string out_dir;
  bool full = false;
};

nlohmann::json to_json(const RunConfig &c);

/// Coefficients of the config, zero-filled to the arity of the template.
RationalVector config_coeffs(const RunConfig &c, Template t);

/// Envelope shared by all reports: schema, command, resolved config, catalog
/// checksum, tolerances and, for a single system, the truncation region and
/// conventions.
nlohmann::json report_envelope(const std::string &command, const RunConfig &c,
                               const IsochroneSpec *spec);

/// The output directory: the explicit setting, else ISOCHRON_OUT_DIR, else
/// none (stdout only).
std::optional<std::filesystem::path> output_dir(const RunConfig &c);

/// Writes through a temporary sibling and a rename, so readers never see a
/// partial file.
void write_atomic(const std::filesystem::path &path, const std::string &content);

/// Specs from a catalog file holding one record or an array of records.
std::vector<IsochroneSpec> load_catalog_file(const std::filesystem::path &path);

} // namespace isochron
