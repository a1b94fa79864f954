#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace geoinv::csv {

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// "%.15g" text; identical inputs give byte-identical files.
std::string number(double value);

void write_metadata(std::ostream& out, std::span<const std::pair<std::string, std::string>> meta);

struct Document {
    Metadata metadata;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Reads "# key = value" comment lines, one header line and comma-separated rows.
Document read(std::istream& in);

}  // namespace geoinv::csv
