#include "ssmgic/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <string_view>
#include <vector>

namespace ssmgic {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

}  // namespace

TimeSeries parse_csv(std::istream& in, bool log_transform) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto field = trim(line);
        if (field.empty()) continue;
        const auto value = parse_number(field);
        if (!value) {
            if (!seen_content) {  // header
                seen_content = true;
                continue;
            }
            throw InvalidInput("line " + std::to_string(line_no) + ": not a number: '" + std::string(field) + "'");
        }
        seen_content = true;
        if (!std::isfinite(*value)) {
            throw InvalidInput("line " + std::to_string(line_no) + ": value is not finite");
        }
        if (log_transform) {
            if (!(*value > 0.0)) {
                throw InvalidInput("line " + std::to_string(line_no) +
                                   ": non-positive value cannot be log-transformed");
            }
            values.push_back(std::log(*value));
        } else {
            values.push_back(*value);
        }
    }
    if (values.empty()) throw InvalidInput("no observations found");
    return TimeSeries(std::move(values));
}

TimeSeries ingest_csv(const std::filesystem::path& path, bool log_transform) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open data file " + path.string());
    try {
        return parse_csv(in, log_transform);
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

void write_csv(const std::filesystem::path& path, const TimeSeries& y) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << "value\n" << std::setprecision(17);
    for (double v : y.values()) out << v << '\n';
    if (!out) throw InvalidInput("failed writing " + path.string());
}

}  // namespace ssmgic
