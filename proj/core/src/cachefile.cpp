#include "fpresheaf/cachefile.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fpre::cache {

namespace {

using json = nlohmann::ordered_json;

std::string hex_encode(const std::string& raw) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(raw.size() * 2);
    for (unsigned char c : raw) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 15]);
    }
    return out;
}

std::string hex_decode(const std::string& hex) {
    auto val = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    std::string out;
    if (hex.size() % 2) return out;
    for (std::size_t i = 0; i + 1 < hex.size() || i + 1 == hex.size(); i += 2) {
        if (i + 1 >= hex.size()) break;
        int hi = val(hex[i]), lo = val(hex[i + 1]);
        if (hi < 0 || lo < 0) return {};
        out.push_back(static_cast<char>((hi << 4) | lo));
    }
    return out;
}

std::optional<json> load_checked(const std::string& path, const std::string& kind, unsigned p,
                                 int window) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (...) {
        return std::nullopt; // corrupt: rebuild silently
    }
    if (!doc.is_object() || doc.value("kind", "") != kind) return std::nullopt;
    if (doc.value("p", 0u) != p || doc.value("window", -1) != window) return std::nullopt;
    if (!doc.contains("entries") || !doc.contains("checksum")) return std::nullopt;
    std::string payload = doc["entries"].dump();
    char buf2[32];
    std::snprintf(buf2, sizeof buf2, "%016llx",
                  static_cast<unsigned long long>(fnv1a(payload)));
    if (doc["checksum"].get<std::string>() != buf2) return std::nullopt;
    return doc;
}

void save_checked(const std::string& path, const std::string& kind, unsigned p, int window,
                  json entries) {
    json doc;
    doc["kind"] = kind;
    doc["p"] = p;
    doc["window"] = window;
    std::string payload = entries.dump();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(payload)));
    doc["checksum"] = buf;
    doc["entries"] = std::move(entries);
    std::error_code ec;
    std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) return;
        out << doc.dump();
    }
    std::filesystem::rename(tmp, path, ec);
}

std::string factor_path(const std::string& dir, unsigned p, int window) {
    return dir + "/factor_p" + std::to_string(p) + "_w" + std::to_string(window) + ".json";
}

std::string act_path(const std::string& dir, const std::string& def_hash) {
    return dir + "/act_" + def_hash + ".json";
}

} // namespace

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string definition_hash(const std::string& expr, unsigned p, int window) {
    std::string key = expr + "|p=" + std::to_string(p) + "|w=" + std::to_string(window);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
    return buf;
}

void load_factor_cache(const site::TruncatedSite& s, const std::string& dir) {
    if (dir.empty()) return;
    auto doc = load_checked(factor_path(dir, s.prime(), s.window()), "factor", s.prime(), s.window());
    if (!doc) return;
    std::vector<std::pair<std::string, site::CanonicalFactorization>> entries;
    for (const auto& e : (*doc)["entries"]) {
        if (!e.is_object()) return;
        site::CanonicalFactorization cf;
        cf.rank = e.value("rank", 0u);
        auto get_word = [&](const char* name, site::Word& w) {
            for (const auto& v : e.value(name, json::array()))
                w.push_back(v.get<std::uint32_t>());
        };
        get_word("tau", cf.tau);
        get_word("incl", cf.incl);
        get_word("proj", cf.proj);
        get_word("sigma", cf.sigma);
        entries.emplace_back(hex_decode(e.value("key", "")), std::move(cf));
    }
    s.import_factor_cache(entries);
}

void save_factor_cache(const site::TruncatedSite& s, const std::string& dir) {
    if (dir.empty()) return;
    json entries = json::array();
    for (const auto& [key, cf] : s.export_factor_cache()) {
        json e;
        e["key"] = hex_encode(key);
        e["rank"] = cf.rank;
        e["tau"] = cf.tau;
        e["incl"] = cf.incl;
        e["proj"] = cf.proj;
        e["sigma"] = cf.sigma;
        entries.push_back(std::move(e));
    }
    save_checked(factor_path(dir, s.prime(), s.window()), "factor", s.prime(), s.window(),
                 std::move(entries));
}

void load_act_tables(const presheaf::SetPresheaf& x, const std::string& dir,
                     const std::string& def_hash) {
    if (dir.empty()) return;
    auto doc = load_checked(act_path(dir, def_hash), "act", x.site()->prime(), x.window());
    if (!doc) return;
    std::vector<std::pair<std::string, presheaf::ActTable>> entries;
    for (const auto& e : (*doc)["entries"]) {
        if (!e.is_object()) return;
        presheaf::ActTable t;
        for (const auto& v : e.value("table", json::array()))
            t.push_back(v.get<std::uint32_t>());
        entries.emplace_back(hex_decode(e.value("key", "")), std::move(t));
    }
    x.import_act_cache(entries);
}

void save_act_tables(const presheaf::SetPresheaf& x, const std::string& dir,
                     const std::string& def_hash) {
    if (dir.empty()) return;
    json entries = json::array();
    for (const auto& [key, table] : x.export_act_cache()) {
        json e;
        e["key"] = hex_encode(key);
        e["table"] = table;
        entries.push_back(std::move(e));
    }
    save_checked(act_path(dir, def_hash), "act", x.site()->prime(), x.window(), std::move(entries));
}

} // namespace fpre::cache
