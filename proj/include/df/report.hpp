#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "df/dfcore.hpp"

namespace df::report {

using Json = nlohmann::ordered_json;

// Run provenance block embedded in every report.  The timestamp is the only
// field allowed to differ between reruns of the same command.
Json make_manifest(const std::string& command, const Json& parameters,
                   std::optional<std::uint64_t> model_checksum,
                   std::optional<std::uint64_t> seed);

// Serializes with a fixed layout (2-space indent, insertion order, trailing
// newline) so identical payloads are identical bytes.
std::string render(const Json& doc);
void write_report(const std::string& path, const Json& doc);

// Default output directory: $DIRACFOCK_OUTDIR if set, else the working
// directory.
std::string output_path(const std::string& filename);

Json to_json(const core::FeasibilityRow& row);
Json to_json(const core::ConstantsReport& c);
Json to_json(const core::HardyReport& h);

} // namespace df::report
