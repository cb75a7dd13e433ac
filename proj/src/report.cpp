#include "df/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "df/errors.hpp"
#include "df/version.hpp"

namespace df::report {

namespace {

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

} // namespace

Json make_manifest(const std::string& command, const Json& parameters,
                   std::optional<std::uint64_t> model_checksum,
                   std::optional<std::uint64_t> seed) {
  Json m;
  m["tool"] = "diracfock";
  m["version"] = kVersion;
  m["command"] = command;
  m["parameters"] = parameters;
  if (model_checksum) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(*model_checksum));
    m["model_checksum"] = buf;
  }
  if (seed) m["seed"] = *seed;
  m["timestamp"] = iso_timestamp();
  return m;
}

std::string render(const Json& doc) { return doc.dump(2) + "\n"; }

void write_report(const std::string& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << render(doc);
  if (!out) throw IoError("write failed: " + path);
}

std::string output_path(const std::string& filename) {
  const char* dir = std::getenv("DIRACFOCK_OUTDIR");
  if (dir && *dir) return std::string(dir) + "/" + filename;
  return filename;
}

Json to_json(const core::FeasibilityRow& row) {
  return Json{{"alpha", row.alpha},       {"z", row.z},
              {"q", row.q},               {"kappa", row.kappa},
              {"lambda0", row.lambda0},   {"margin", row.margin},
              {"cond2_lhs", row.cond2_lhs}, {"cond2_rhs", row.cond2_rhs},
              {"cond1_ok", row.cond1_ok}, {"cond2_ok", row.cond2_ok},
              {"margin_ok", row.margin_ok}, {"feasible", row.feasible}};
}

Json to_json(const core::ConstantsReport& c) {
  return Json{{"kappa_mode", core::to_string(c.mode)},
              {"r", c.r},
              {"r_fraction", c.r_fraction},
              {"kappa", c.kappa},
              {"lambda0", c.lambda0},
              {"kappa_r", c.kappa_r},
              {"lambda_r", c.lambda_r},
              {"a_r", c.a_r},
              {"r_max", c.r_max},
              {"r_chosen", c.r_chosen},
              {"k", c.k},
              {"a_big", c.a_big},
              {"condition", to_json(c.condition)},
              {"feasible", c.feasible}};
}

Json to_json(const core::HardyReport& h) {
  Json rows = Json::array();
  for (const auto& row : h.rows)
    rows.push_back(Json{{"name", row.name},
                        {"worst_ratio", row.worst_ratio},
                        {"asserted", row.asserted},
                        {"ok", row.ok}});
  return Json{{"samples", h.samples},
              {"rows", rows},
              {"all_asserted_ok", h.all_asserted_ok}};
}

} // namespace df::report
