#include "sbt/config.hpp"

#include "sbt/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace sbt {

namespace {

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

Config Config::parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open configuration file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str());
}

Config Config::parse_string(const std::string& text)
{
    Config config;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos)
            line = line.substr(0, comment);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header", line_number);
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty())
                throw ConfigError("empty section name", line_number);
            if (!config.sections_.count(current)) {
                config.order_.push_back(current);
                config.sections_[current] = {};
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", line_number);
        if (current.empty())
            throw ConfigError("key outside of any section", line_number);
        Entry entry{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_number};
        if (entry.key.empty())
            throw ConfigError("empty key", line_number);
        auto& entries = config.sections_[current];
        for (const auto& existing : entries)
            if (existing.key == entry.key)
                throw ConfigError("duplicate key '" + entry.key + "' in section ["
                                      + current + "]",
                                  line_number);
        entries.push_back(std::move(entry));
    }
    return config;
}

bool Config::has_section(const std::string& section) const
{
    return sections_.count(section) != 0;
}

std::vector<std::string> Config::section_names() const
{
    return order_;
}

const std::vector<Config::Entry>& Config::section(const std::string& name) const
{
    const auto it = sections_.find(name);
    if (it == sections_.end())
        throw ConfigError("missing section [" + name + "]");
    return it->second;
}

const Config::Entry* Config::find(const std::string& section,
                                  const std::string& key) const
{
    const auto it = sections_.find(section);
    if (it == sections_.end())
        return nullptr;
    for (const auto& entry : it->second)
        if (entry.key == key) {
            consumed_.insert(section + "/" + key);
            return &entry;
        }
    return nullptr;
}

bool Config::has(const std::string& section, const std::string& key) const
{
    return find(section, key) != nullptr;
}

std::string Config::get_string(const std::string& section,
                               const std::string& key) const
{
    const Entry* entry = find(section, key);
    if (!entry)
        throw ConfigError("missing key '" + key + "' in section [" + section + "]");
    return entry->value;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const
{
    const Entry* entry = find(section, key);
    return entry ? entry->value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const
{
    const Entry* entry = find(section, key);
    if (!entry)
        throw ConfigError("missing key '" + key + "' in section [" + section + "]");
    try {
        std::size_t pos = 0;
        const double value = std::stod(entry->value, &pos);
        if (pos != entry->value.size())
            throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse '" + entry->value
                              + "' as a number",
                          entry->line);
    }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const
{
    return has(section, key) ? get_double(section, key) : fallback;
}

long Config::get_int(const std::string& section, const std::string& key,
                     long fallback) const
{
    if (!has(section, key))
        return fallback;
    const double value = get_double(section, key);
    const long rounded = static_cast<long>(value);
    if (static_cast<double>(rounded) != value)
        throw ConfigError("key '" + key + "' must be an integer");
    return rounded;
}

void Config::ensure_consumed(const std::string& section) const
{
    const auto it = sections_.find(section);
    if (it == sections_.end())
        return;
    for (const auto& entry : it->second)
        if (!consumed_.count(section + "/" + entry.key))
            throw ConfigError("unknown key '" + entry.key + "' in section ["
                                  + section + "]",
                              entry.line);
}

std::string Config::canonical_text() const
{
    std::ostringstream out;
    for (const auto& name : order_) {
        out << '[' << name << "]\n";
        for (const auto& entry : sections_.at(name))
            out << entry.key << " = " << entry.value << '\n';
    }
    return out.str();
}

std::string fnv1a_digest(const std::string& text)
{
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[hash & 0xF];
        hash >>= 4;
    }
    return out;
}

} // namespace sbt
