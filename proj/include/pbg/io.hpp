#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace pbg {

// configuration problems are reported distinctly from numeric failures so
// the CLI can map them to different exit codes
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// minimal INI: [section] headers, key = value pairs, # or ; comments
class IniConfig {
  public:
    static IniConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path);
    }

    static IniConfig parse_string(const std::string& text, const std::string& origin = "<string>") {
        IniConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
                section = strip(s.substr(1, s.size() - 2));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
                cfg.sections_[section]; // ensure section exists even if empty
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = strip(s.substr(0, eq));
            std::string val = s.substr(eq + 1);
            auto hash = val.find('#');
            if (hash != std::string::npos) val = val.substr(0, hash);
            val = strip(val);
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
            auto& sec = cfg.sections_[section];
            if (sec.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
            sec[key] = val;
        }
        return cfg;
    }

    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
    bool has(const std::string& s, const std::string& k) const {
        auto it = sections_.find(s);
        return it != sections_.end() && it->second.count(k);
    }
    std::string get(const std::string& s, const std::string& k) const {
        auto it = sections_.find(s);
        if (it == sections_.end() || !it->second.count(k))
            throw ConfigError("missing config key [" + s + "] " + k);
        return it->second.at(k);
    }
    std::string get_or(const std::string& s, const std::string& k, const std::string& dflt) const {
        return has(s, k) ? get(s, k) : dflt;
    }
    double get_double(const std::string& s, const std::string& k) const {
        return to_double(get(s, k), s, k);
    }
    double get_double_or(const std::string& s, const std::string& k, double dflt) const {
        return has(s, k) ? get_double(s, k) : dflt;
    }
    long get_int_or(const std::string& s, const std::string& k, long dflt) const {
        if (!has(s, k)) return dflt;
        std::string v = get(s, k);
        try {
            std::size_t pos = 0;
            long r = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (...) {
            throw ConfigError("config key [" + s + "] " + k + ": not an integer: '" + v + "'");
        }
    }
    std::vector<double> get_double_list(const std::string& s, const std::string& k) const {
        std::string v = get(s, k);
        std::vector<double> out;
        std::istringstream in(v);
        std::string item;
        while (std::getline(in, item, ',')) out.push_back(to_double(strip(item), s, k));
        if (out.empty()) throw ConfigError("config key [" + s + "] " + k + ": empty list");
        return out;
    }

    // schema enforcement: every present key must be in the allowlist
    void enforce_keys(const std::string& section,
                      const std::set<std::string>& allowed) const {
        auto it = sections_.find(section);
        if (it == sections_.end()) return;
        for (const auto& [k, v] : it->second)
            if (!allowed.count(k))
                throw ConfigError("unknown config key [" + section + "] " + k);
    }
    void enforce_sections(const std::set<std::string>& allowed) const {
        for (const auto& [s, kv] : sections_)
            if (!allowed.count(s)) throw ConfigError("unknown config section [" + s + "]");
    }

    void set(const std::string& s, const std::string& k, const std::string& v) {
        sections_[s][k] = v;
    }
    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

  private:
    static std::string strip(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }
    static double to_double(const std::string& v, const std::string& s, const std::string& k) {
        try {
            std::size_t pos = 0;
            double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (...) {
            throw ConfigError("config key [" + s + "] " + k + ": not a number: '" + v + "'");
        }
    }
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// CSV with '#'-prefixed self-describing header lines; fixed formatting so
// identical runs are byte-identical
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : path_(path), out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
    }
    void comment(const std::string& line) { out_ << "# " << line << "\n"; }
    void columns(const std::vector<std::string>& names) {
        out_ << "# columns:";
        for (const auto& n : names) out_ << " " << n;
        out_ << "\n";
    }
    void row(const std::vector<double>& vals) {
        char buf[64];
        for (std::size_t i = 0; i < vals.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", vals[i]);
            out_ << (i ? "," : "") << buf;
        }
        out_ << "\n";
    }
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ofstream out_;
};

// FNV-1a, used for output checksums in the run manifest
inline std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checksum: cannot open " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i)
            h = (h ^ (unsigned char)buf[i]) * 1099511628211ULL;
        if (!in) break;
    }
    return h;
}

inline nlohmann::json config_to_json(const IniConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [s, kv] : cfg.sections()) {
        nlohmann::json sec = nlohmann::json::object();
        for (const auto& [k, v] : kv) sec[k] = v;
        j[s] = sec;
    }
    return j;
}

} // namespace pbg
