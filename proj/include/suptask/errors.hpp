#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace suptask {

// Base class for every error thrown by this library. Catching suptask::Error
// is sufficient to handle any malformed input or contract violation.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- geometry ---

class InvalidPolygon : public Error {
public:
    using Error::Error;
};

class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

// --- parsing ---

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : Error(msg + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line(line),
          column(column) {}
    std::size_t line;
    std::size_t column;
};

class HeaderError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
          line(line) {}
    std::size_t line;
};

class JsonSyntaxError : public Error {
public:
    JsonSyntaxError(const std::string& msg, std::size_t byte_offset)
        : Error(msg + " (byte " + std::to_string(byte_offset) + ")"),
          byte_offset(byte_offset) {}
    std::size_t byte_offset;
};

class GeoJsonError : public Error {
public:
    GeoJsonError(const std::string& msg, std::size_t feature_index)
        : Error(msg + " (feature " + std::to_string(feature_index) + ")"),
          feature_index(feature_index) {}
    std::size_t feature_index;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};

class CsvError : public Error {
public:
    CsvError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};

// --- classification / typology / demand ---

class InsufficientData : public Error {
public:
    using Error::Error;
};

class UnknownComponent : public Error {
public:
    using Error::Error;
};

class UnknownFootprintId : public Error {
public:
    explicit UnknownFootprintId(std::uint64_t id)
        : Error("unknown footprint id " + std::to_string(id)), id(id) {}
    std::uint64_t id;
};

class MissingTypologyRow : public Error {
public:
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

class ModelFormatError : public Error {
public:
    using Error::Error;
};

}  // namespace suptask
