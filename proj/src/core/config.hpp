#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bvoc {

inline constexpr const char* kVersion = "0.1.0";

/// Flat key=value settings for one command run. Keys are unique; later
/// set() calls overwrite. Lookups that fail to parse name the offending
/// key in a ConfigError.
struct RunConfig {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    void set(const std::string& key, const std::string& value);
    void set_line(const std::string& line); // "key=value"

    std::string get_str(const std::string& key, const std::string& fallback) const;
    std::string require_str(const std::string& key) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    double get_f64(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
};

/// key=value file, one pair per line; blank lines and '#' comments skipped.
RunConfig read_config(const std::string& path);

/// ConfigError naming the first key outside the allowed set. Catches typos
/// before a command touches the filesystem.
void check_known_keys(const RunConfig& cfg, const std::vector<std::string_view>& allowed);

uint64_t fnv1a64(std::string_view bytes);

/// Hash of the canonical "key=value\n" listing (keys sorted).
uint64_t config_hash(const RunConfig& cfg);

/// Text block identifying a run: config hash, every *seed* key, library
/// version. Deliberately no timestamps so reruns are byte-identical.
std::string reproducibility_stamp(const RunConfig& cfg);

} // namespace bvoc
