#include <zonemem/error.hpp>
#include <zonemem/map_store.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace zonemem {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw Error(path.string() + ": write failed");
}

std::uint32_t parse_id_key(const std::string& key, const std::string& where) {
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
    if (ec != std::errc{} || ptr != key.data() + key.size() || key.empty()) {
        throw FormatError(where + ": key \"" + key + "\" is not a non-negative integer id");
    }
    return v;
}

Keyframe parse_keyframe_line(const std::string& line, const std::string& where) {
    nlohmann::json row;
    try {
        row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(where + ": invalid JSON: " + e.what());
    }
    if (!row.is_object()) throw FormatError(where + ": expected a JSON object");
    auto field = [&](const char* name) -> const nlohmann::json& {
        if (!row.contains(name)) throw FormatError(where + ": missing field " + name);
        return row[name];
    };
    auto number = [&](const char* name) {
        const auto& v = field(name);
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
            throw FormatError(where + ": field " + name + " must be a finite number");
        }
        return v.get<double>();
    };
    const auto& id = field("id");
    if (!id.is_number_unsigned() || id.get<std::uint64_t>() > UINT32_MAX) {
        throw FormatError(where + ": field id must be a non-negative integer");
    }
    const auto& bytes = field("payload_bytes");
    if (!bytes.is_number_integer() || bytes.is_number_float() ||
        (bytes.is_number_unsigned() ? bytes.get<std::uint64_t>() == 0 : bytes.get<std::int64_t>() <= 0)) {
        throw FormatError(where + ": field payload_bytes must be a positive integer");
    }
    const auto& seed = field("payload_seed");
    if (!seed.is_number_unsigned()) {
        throw FormatError(where + ": field payload_seed must be a non-negative 64-bit integer");
    }
    Keyframe kf;
    kf.id = KeyframeId{id.get<std::uint32_t>()};
    kf.pose = Pose({number("x"), number("y")}, number("theta"));
    kf.payload_bytes = bytes.get<std::uint64_t>();
    kf.payload_seed = seed.get<std::uint64_t>();
    return kf;
}

std::vector<Keyframe> parse_keyframes(const std::string& text, const std::string& source) {
    std::vector<Keyframe> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(lineno);
        Keyframe kf = parse_keyframe_line(line, where);
        if (!out.empty() && !(out.back().id < kf.id)) {
            throw FormatError(where + ": field id must be strictly ascending by line");
        }
        out.push_back(kf);
    }
    if (out.empty()) throw FormatError(source + ": no keyframes");
    return out;
}

void verify_index(const std::string& text, const ZoneIndex& expected, const std::string& source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(source + ": invalid JSON: " + e.what());
    }
    for (const char* name : {"kf_to_zone", "zone_counts"}) {
        if (!doc.is_object() || !doc.contains(name) || !doc[name].is_object()) {
            throw FormatError(source + ": missing object field " + std::string(name));
        }
    }
    std::map<KeyframeId, ZoneId> kf_to_zone;
    for (const auto& [key, value] : doc["kf_to_zone"].items()) {
        const std::string where = source + ": kf_to_zone[" + key + "]";
        if (!value.is_number_unsigned()) throw FormatError(where + ": expected zone id");
        kf_to_zone[KeyframeId{parse_id_key(key, where)}] = ZoneId{value.get<std::uint32_t>()};
    }
    std::map<ZoneId, std::size_t> zone_counts;
    for (const auto& [key, value] : doc["zone_counts"].items()) {
        const std::string where = source + ": zone_counts[" + key + "]";
        if (!value.is_number_unsigned()) throw FormatError(where + ": expected count");
        zone_counts[ZoneId{parse_id_key(key, where)}] = value.get<std::size_t>();
    }
    for (const auto& [kf, zone] : expected.kf_to_zone) {
        const auto it = kf_to_zone.find(kf);
        if (it == kf_to_zone.end()) {
            throw FormatError(source + ": kf_to_zone lacks keyframe " + std::to_string(kf.value));
        }
        if (it->second != zone) {
            throw FormatError(source + ": kf_to_zone[" + std::to_string(kf.value) + "] = " +
                              std::to_string(it->second.value) + " but keyframe lies in zone " +
                              std::to_string(zone.value));
        }
    }
    if (kf_to_zone.size() != expected.kf_to_zone.size()) {
        throw FormatError(source + ": kf_to_zone lists keyframes absent from keyframes.jsonl");
    }
    if (zone_counts != expected.zone_counts) {
        throw FormatError(source + ": zone_counts inconsistent with keyframes and zones");
    }
}

}  // namespace

std::string serialize_keyframes(std::span<const Keyframe> keyframes) {
    std::string out;
    for (const Keyframe& kf : keyframes) {
        ordered_json row;
        row["id"] = kf.id.value;
        row["x"] = kf.pose.position.x;
        row["y"] = kf.pose.position.y;
        row["theta"] = kf.pose.heading;
        row["payload_bytes"] = kf.payload_bytes;
        row["payload_seed"] = kf.payload_seed;
        out += row.dump();
        out += '\n';
    }
    return out;
}

std::string serialize_index(const ZoneIndex& index) {
    ordered_json kf_to_zone = ordered_json::object();
    for (const auto& [kf, zone] : index.kf_to_zone) kf_to_zone[std::to_string(kf.value)] = zone.value;
    ordered_json counts = ordered_json::object();
    for (const auto& [zone, n] : index.zone_counts) counts[std::to_string(zone.value)] = n;
    ordered_json doc;
    doc["kf_to_zone"] = std::move(kf_to_zone);
    doc["zone_counts"] = std::move(counts);
    return doc.dump() + "\n";
}

void write_map(const Map& map, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(dir.string() + ": cannot create directory: " + ec.message());
    write_file(dir / kZonesFile, serialize_zones(map.zones()));
    write_file(dir / kKeyframesFile, serialize_keyframes(map.keyframes()));
    write_file(dir / kIndexFile, serialize_index(map.index()));
}

Map read_map(const std::filesystem::path& dir) {
    const auto zones_path = dir / kZonesFile;
    const auto kf_path = dir / kKeyframesFile;
    const auto index_path = dir / kIndexFile;
    ZoneSet zones = parse_zones(read_file(zones_path), zones_path.string());
    std::vector<Keyframe> keyframes = parse_keyframes(read_file(kf_path), kf_path.string());
    const std::string index_text = read_file(index_path);
    Map map = [&] {
        try {
            return Map(std::move(zones), std::move(keyframes));
        } catch (const ValidationError& e) {
            throw FormatError(kf_path.string() + ": " + e.what());
        }
    }();
    verify_index(index_text, map.index(), index_path.string());
    return map;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xf];
    }
    return out;
}

std::string map_hash(const Map& map) {
    return sha256_hex(serialize_zones(map.zones()) + serialize_keyframes(map.keyframes()) +
                      serialize_index(map.index()));
}

}  // namespace zonemem
