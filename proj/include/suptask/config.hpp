#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace suptask {

// INI-style configuration: [section] headers, `key = value` entries,
// full-line '#' comments, LF line endings. Duplicate keys within a section
// are rejected; unknown sections are preserved so consumers can ignore
// them (forward compatibility).
class Config {
public:
    struct Entry {
        std::string key;
        std::string value;
        std::size_t line = 0;
    };
    struct Section {
        std::string name;
        std::vector<Entry> entries;  // in file order
    };

    static Config parse(const std::string& text);

    // Canonical emission: sections and keys in original order.
    std::string emit() const;

    bool has_section(const std::string& name) const;
    const Section* section(const std::string& name) const;

    // Typed lookups; throw ConfigError when present but malformed.
    std::optional<std::string> get_string(const std::string& section,
                                          const std::string& key) const;
    std::optional<double> get_double(const std::string& section,
                                     const std::string& key) const;
    std::optional<long long> get_int(const std::string& section,
                                     const std::string& key) const;

    const std::vector<Section>& sections() const { return sections_; }

private:
    std::vector<Section> sections_;
};

}  // namespace suptask
