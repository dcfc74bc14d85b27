#pragma once

#include <string>
#include <vector>

namespace suptask {

// RFC-4180-style CSV with a mandatory header row. Fields containing commas,
// quotes or newlines are quoted on emission; quotes are doubled.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text);
std::string emit_csv(const CsvTable& table);

}  // namespace suptask
