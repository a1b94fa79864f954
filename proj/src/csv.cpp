#include "geoinv/csv.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace geoinv::csv {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    return out;
}

}  // namespace

std::string number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", value);
    return buf;
}

void write_metadata(std::ostream& out, std::span<const std::pair<std::string, std::string>> meta) {
    for (const auto& [key, value] : meta) out << "# " << key << " = " << value << '\n';
}

Document read(std::istream& in) {
    Document doc;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            const auto body = t.substr(1);
            const auto eq = body.find('=');
            if (eq != std::string::npos)
                doc.metadata.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
            continue;
        }
        if (doc.header.empty())
            doc.header = split(t);
        else
            doc.rows.push_back(split(t));
    }
    return doc;
}

}  // namespace geoinv::csv
