// Series ingestion and output.
#pragma once

#include "ssmgic/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace ssmgic {

/// Parses a one-column CSV: an optional non-numeric header on the first
/// non-blank line, blank lines ignored, LF or CRLF endings. With
/// `log_transform` every value is replaced by its natural logarithm.
/// Errors cite the 1-based line number.
[[nodiscard]] TimeSeries parse_csv(std::istream& in, bool log_transform = false);
[[nodiscard]] TimeSeries ingest_csv(const std::filesystem::path& path, bool log_transform = false);

/// Writes "value" followed by one observation per line, 17 significant digits.
void write_csv(const std::filesystem::path& path, const TimeSeries& y);

}  // namespace ssmgic
