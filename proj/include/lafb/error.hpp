#pragma once

#include <stdexcept>
#include <string>

namespace lafb {

// Every error carries a short kind tag so the CLI can print "error: <kind>: <message>".

/// Incompatible extents or ranks.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid parameter or flag combination.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Caller broke an API contract (missing level, non-scalar loss, empty dataset...).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// Filesystem or format failure; the message names the path.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline const char* error_kind(const std::exception& e)
{
    if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const ContractError*>(&e)) return "contract";
    if (dynamic_cast<const IoError*>(&e)) return "io";
    return "internal";
}

}  // namespace lafb
