#include "yaml_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace scdt::yaml {

void parse_error(const std::string& module, const std::string& message) {
    throw Error(ErrorKind::Parse, module + ".ParseError", message);
}

YAML::Node parse_document(const std::string& text, const std::string& module) {
    try {
        return YAML::Load(text);
    } catch (const YAML::Exception& e) {
        parse_error(module, e.what());
    }
}

std::string read_text_file(const std::string& path, const std::string& module) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, module + ".IoError", "cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string scalar(const YAML::Node& node, const std::string& module, const std::string& what) {
    if (!node.IsScalar()) parse_error(module, what + " must be a scalar");
    return node.Scalar();
}

Rational rational_scalar(const YAML::Node& node, const std::string& module, const std::string& what) {
    const auto text = scalar(node, module, what);
    try {
        return parse_rational(text);
    } catch (const Error&) {
        parse_error(module, what + " is not a number: '" + text + "'");
    }
}

std::int64_t int_scalar(const YAML::Node& node, const std::string& module, const std::string& what) {
    const auto text = scalar(node, module, what);
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        parse_error(module, what + " is not an integer: '" + text + "'");
    }
    return out;
}

std::string required_string(const YAML::Node& node, const char* key, const std::string& module) {
    if (!node.IsMap()) parse_error(module, std::string("expected a mapping holding '") + key + "'");
    auto v = node[key];
    if (!v) parse_error(module, std::string("missing required key '") + key + "'");
    return scalar(v, module, key);
}

std::optional<std::string> optional_string(const YAML::Node& node, const char* key, const std::string& module) {
    if (!node.IsMap()) parse_error(module, std::string("expected a mapping holding '") + key + "'");
    auto v = node[key];
    if (!v || v.IsNull()) return std::nullopt;
    return scalar(v, module, key);
}

std::optional<bool> optional_bool(const YAML::Node& node, const char* key, const std::string& module) {
    auto text = optional_string(node, key, module);
    if (!text) return std::nullopt;
    if (*text == "true" || *text == "yes") return true;
    if (*text == "false" || *text == "no") return false;
    parse_error(module, std::string("'") + key + "' must be true or false");
}

std::optional<std::int64_t> optional_int(const YAML::Node& node, const char* key, const std::string& module) {
    if (!node.IsMap()) parse_error(module, std::string("expected a mapping holding '") + key + "'");
    auto v = node[key];
    if (!v || v.IsNull()) return std::nullopt;
    return int_scalar(v, module, key);
}

std::int64_t required_int(const YAML::Node& node, const char* key, const std::string& module) {
    auto v = optional_int(node, key, module);
    if (!v) parse_error(module, std::string("missing required key '") + key + "'");
    return *v;
}

std::optional<Rational> optional_rational(const YAML::Node& node, const char* key, const std::string& module) {
    if (!node.IsMap()) parse_error(module, std::string("expected a mapping holding '") + key + "'");
    auto v = node[key];
    if (!v || v.IsNull()) return std::nullopt;
    return rational_scalar(v, module, key);
}

std::vector<std::string> string_list(const YAML::Node& node, const char* key, const std::string& module) {
    std::vector<std::string> out;
    if (!node.IsMap()) return out;
    auto v = node[key];
    if (!v || v.IsNull()) return out;
    if (!v.IsSequence()) parse_error(module, std::string("'") + key + "' must be a list");
    for (const auto& item : v) out.push_back(scalar(item, module, key));
    return out;
}

} // namespace scdt::yaml
