#ifndef SCDT_SRC_YAML_UTIL_HPP
#define SCDT_SRC_YAML_UTIL_HPP

// Small helpers over yaml-cpp that convert its exceptions into scdt::Error
// with a module-qualified ParseError code.

#include "scdt/core.hpp"

#include <yaml-cpp/yaml.h>

#include <optional>
#include <string>
#include <vector>

namespace scdt::yaml {

[[noreturn]] void parse_error(const std::string& module, const std::string& message);

YAML::Node parse_document(const std::string& text, const std::string& module);

/// Throws `<module>.IoError` (ErrorKind::Io) when the file cannot be read.
std::string read_text_file(const std::string& path, const std::string& module);

std::string required_string(const YAML::Node& node, const char* key, const std::string& module);
std::optional<std::string> optional_string(const YAML::Node& node, const char* key, const std::string& module);
std::optional<bool> optional_bool(const YAML::Node& node, const char* key, const std::string& module);
std::optional<std::int64_t> optional_int(const YAML::Node& node, const char* key, const std::string& module);
std::int64_t required_int(const YAML::Node& node, const char* key, const std::string& module);
std::optional<Rational> optional_rational(const YAML::Node& node, const char* key, const std::string& module);
std::vector<std::string> string_list(const YAML::Node& node, const char* key, const std::string& module);

std::string scalar(const YAML::Node& node, const std::string& module, const std::string& what);
Rational rational_scalar(const YAML::Node& node, const std::string& module, const std::string& what);
std::int64_t int_scalar(const YAML::Node& node, const std::string& module, const std::string& what);

} // namespace scdt::yaml

#endif // SCDT_SRC_YAML_UTIL_HPP
