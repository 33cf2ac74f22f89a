#ifndef SBT_CONFIG_HPP
#define SBT_CONFIG_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sbt {

// Sectioned key/value text:  [section] lines, key = value pairs,
// '#' or ';' comments, blank lines ignored.  Keys keep file order within
// a section; duplicate keys are an error.
class Config {
public:
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
    };

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has_section(const std::string& section) const;
    std::vector<std::string> section_names() const;
    const std::vector<Entry>& section(const std::string& name) const;

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    long get_int(const std::string& section, const std::string& key,
                 long fallback) const;

    // Keys read through the getters are marked consumed; call this after
    // building a module's objects to reject typos and unknown keys.
    void ensure_consumed(const std::string& section) const;

    // Canonical text rendering used for digests: sections and keys in
    // original order, normalized whitespace.
    std::string canonical_text() const;

private:
    const Entry* find(const std::string& section, const std::string& key) const;

    std::vector<std::string> order_;
    std::map<std::string, std::vector<Entry>> sections_;
    mutable std::set<std::string> consumed_; // "section/key"
};

// FNV-1a 64-bit digest, rendered as 16 hex digits.
std::string fnv1a_digest(const std::string& text);

} // namespace sbt

#endif
