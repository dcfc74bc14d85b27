#include "suptask/config.hpp"

#include <charconv>
#include <cmath>

#include "suptask/errors.hpp"

namespace suptask {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    Section* cur = nullptr;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        if (pos == text.size() && line_no > 0) break;
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string ln = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!ln.empty() && ln.back() == '\r') ln.pop_back();
        const std::string t = trim(ln);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) {
                throw ConfigError("malformed section header", line_no);
            }
            const std::string name = trim(t.substr(1, t.size() - 2));
            if (name.empty()) {
                throw ConfigError("empty section name", line_no);
            }
            for (const Section& s : cfg.sections_) {
                if (s.name == name) {
                    throw ConfigError("duplicate section '" + name + "'",
                                      line_no);
                }
            }
            cfg.sections_.push_back(Section{name, {}});
            cur = &cfg.sections_.back();
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected 'key = value'", line_no);
        }
        if (cur == nullptr) {
            throw ConfigError("entry outside any section", line_no);
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("empty key", line_no);
        }
        for (const Entry& e : cur->entries) {
            if (e.key == key) {
                throw ConfigError("duplicate key '" + key + "' in section [" +
                                      cur->name + "]",
                                  line_no);
            }
        }
        cur->entries.push_back(Entry{key, value, line_no});
    }
    return cfg;
}

std::string Config::emit() const {
    std::string out;
    for (const Section& s : sections_) {
        out += '[';
        out += s.name;
        out += "]\n";
        for (const Entry& e : s.entries) {
            out += e.key;
            out += " = ";
            out += e.value;
            out += '\n';
        }
    }
    return out;
}

bool Config::has_section(const std::string& name) const {
    return section(name) != nullptr;
}

const Config::Section* Config::section(const std::string& name) const {
    for (const Section& s : sections_) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

std::optional<std::string> Config::get_string(const std::string& section_name,
                                              const std::string& key) const {
    const Section* s = section(section_name);
    if (!s) return std::nullopt;
    for (const Entry& e : s->entries) {
        if (e.key == key) return e.value;
    }
    return std::nullopt;
}

std::optional<double> Config::get_double(const std::string& section_name,
                                         const std::string& key) const {
    const Section* s = section(section_name);
    if (!s) return std::nullopt;
    for (const Entry& e : s->entries) {
        if (e.key != key) continue;
        double v = 0.0;
        const char* first = e.value.data();
        const char* last = first + e.value.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
            throw ConfigError("value of '" + key + "' is not a finite number",
                              e.line);
        }
        return v;
    }
    return std::nullopt;
}

std::optional<long long> Config::get_int(const std::string& section_name,
                                         const std::string& key) const {
    const Section* s = section(section_name);
    if (!s) return std::nullopt;
    for (const Entry& e : s->entries) {
        if (e.key != key) continue;
        long long v = 0;
        const char* first = e.value.data();
        const char* last = first + e.value.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) {
            throw ConfigError("value of '" + key + "' is not an integer",
                              e.line);
        }
        return v;
    }
    return std::nullopt;
}

}  // namespace suptask
