#include "isochron/report.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "isochron/errors.hpp"

namespace isochron {

using json = nlohmann::json;

json to_json(const RunConfig &c) {
  return {{"system", c.system},         {"coeffs", c.coeffs},
          {"ladder", c.ladder},         {"confirm_eps", c.confirm_eps},
          {"grid", c.grid},             {"order", c.order},
          {"k", c.k},                   {"tol", c.tol},
          {"dropout", c.dropout},       {"section", c.section},
          {"catalog_file", c.catalog_file}, {"full", c.full}};
}

RationalVector config_coeffs(const RunConfig &c, Template t) {
  const size_t n = static_cast<size_t>(arity(t));
  if (c.coeffs.size() > n)
    throw std::invalid_argument("expected at most " + std::to_string(n) + " coefficients");
  RationalVector out(n, Rational(0));
  for (size_t i = 0; i < c.coeffs.size(); ++i)
    out[i] = parse_rational(c.coeffs[i]);
  return out;
}

json report_envelope(const std::string &command, const RunConfig &c,
                     const IsochroneSpec *spec) {
  json j;
  j["schema"] = 1;
  j["command"] = command;
  j["config"] = to_json(c);
  j["catalog_checksum"] = catalog_checksum();
  j["tolerances"] = {{"integration", c.tol}, {"dropout_threshold", c.dropout}};
  if (spec) {
    const ValidatedRegion r = validated_region(*spec);
    j["truncation"] = {{"description", r.description}, {"x_lo", r.x_lo}, {"x_hi", r.x_hi}};
    std::string section = spec->u0 ? "commutator flow from the positive x-axis"
                                   : "x-axis ray parameterized by x";
    if (c.section == "ray")
      section = "x-axis ray parameterized by x";
    j["conventions"] = {{"orientation", "counterclockwise ovals"},
                        {"section", section},
                        {"period_derivative", "dT/ds along the section"}};
  }
  return j;
}

std::optional<std::filesystem::path> output_dir(const RunConfig &c) {
  if (!c.out_dir.empty())
    return std::filesystem::path(c.out_dir);
  if (const char *env = std::getenv("ISOCHRON_OUT_DIR"); env && *env)
    return std::filesystem::path(env);
  return std::nullopt;
}

void write_atomic(const std::filesystem::path &path, const std::string &content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out)
      throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<IsochroneSpec> load_catalog_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read catalog file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception &e) {
    throw ParseError("catalog file: " + std::string(e.what()));
  }
  std::vector<IsochroneSpec> out;
  if (j.is_array()) {
    for (const auto &rec : j)
      out.push_back(spec_from_json(rec.dump()));
  } else {
    out.push_back(spec_from_json(j.dump()));
  }
  return out;
}

} // namespace isochron
