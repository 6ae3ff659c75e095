#include "core/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include "core/binio.hpp"
#include "core/errors.hpp"

namespace bvoc {

namespace {

std::string trim(std::string_view s)
{
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value)
{
    if (key.empty())
        throw ConfigError("empty config key");
    kv[key] = value;
}

void RunConfig::set_line(const std::string& line)
{
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
        throw ConfigError("expected key=value, got '" + line + "'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
}

std::string RunConfig::get_str(const std::string& key, const std::string& fallback) const
{
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::string RunConfig::require_str(const std::string& key) const
{
    const auto it = kv.find(key);
    if (it == kv.end() || it->second.empty())
        throw ConfigError("missing required config key '" + key + "'");
    return it->second;
}

uint64_t RunConfig::get_u64(const std::string& key, uint64_t fallback) const
{
    const auto it = kv.find(key);
    if (it == kv.end())
        return fallback;
    const std::string& s = it->second;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size() || s.empty() || s[0] == '-')
        throw ConfigError("config key '" + key + "' is not a non-negative integer: '" +
                          s + "'");
    return v;
}

double RunConfig::get_f64(const std::string& key, double fallback) const
{
    const auto it = kv.find(key);
    if (it == kv.end())
        return fallback;
    const std::string& s = it->second;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end != s.c_str() + s.size() || s.empty())
        throw ConfigError("config key '" + key + "' is not a number: '" + s + "'");
    return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const
{
    const auto it = kv.find(key);
    if (it == kv.end())
        return fallback;
    const std::string& s = it->second;
    if (s == "1" || s == "true" || s == "yes")
        return true;
    if (s == "0" || s == "false" || s == "no")
        return false;
    throw ConfigError("config key '" + key + "' is not a boolean: '" + s + "'");
}

RunConfig read_config(const std::string& path)
{
    const std::string text = binio::read_text_file(path);
    RunConfig cfg;
    size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        const size_t nl = text.find('\n', pos);
        const std::string raw =
            text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        ++line_no;
        const std::string line = trim(raw);
        if (!line.empty() && line[0] != '#') {
            try {
                cfg.set_line(line);
            } catch (const ConfigError& e) {
                throw ConfigError(path + ":" + std::to_string(line_no) + ": " +
                                  e.what());
            }
        }
        if (nl == std::string::npos)
            break;
        pos = nl + 1;
    }
    return cfg;
}

void check_known_keys(const RunConfig& cfg, const std::vector<std::string_view>& allowed)
{
    for (const auto& [key, value] : cfg.kv) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown config key '" + key + "'");
    }
}

uint64_t fnv1a64(std::string_view bytes)
{
    uint64_t h = 0xcbf29ce484222325ull;
    for (const char ch : bytes) {
        h ^= static_cast<uint8_t>(ch);
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t config_hash(const RunConfig& cfg)
{
    std::string canon;
    for (const auto& [key, value] : cfg.kv) // std::map iterates sorted
        canon += key + '=' + value + '\n';
    return fnv1a64(canon);
}

std::string reproducibility_stamp(const RunConfig& cfg)
{
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    std::string out;
    out += "config_hash=";
    out += hash;
    out += '\n';
    for (const auto& [key, value] : cfg.kv)
        if (key.find("seed") != std::string::npos)
            out += key + '=' + value + '\n';
    out += "version=";
    out += kVersion;
    out += '\n';
    return out;
}

} // namespace bvoc
