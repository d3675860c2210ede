#include "arq/json.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace arq {

namespace {

Json fold(const Json& value) {
    switch (value.type()) {
    case Json::value_t::object: {
        Json out = Json::object();
        for (auto it = value.begin(); it != value.end(); ++it) {
            out[it.key()] = fold(it.value());
        }
        return out;
    }
    case Json::value_t::array: {
        Json out = Json::array();
        for (const auto& item : value) out.push_back(fold(item));
        return out;
    }
    case Json::value_t::number_float: {
        const double d = value.get<double>();
        if (!std::isfinite(d)) {
            throw CanonicalJsonError("canonical_json: non-finite number");
        }
        // 2^63 is exactly representable; anything below it fits in int64.
        constexpr double kLimit = 9223372036854775808.0;
        if (std::trunc(d) == d && d > -kLimit && d < kLimit) {
            return Json(static_cast<std::int64_t>(d));
        }
        return value;
    }
    default:
        return value;
    }
}

}  // namespace

Json canonicalize(const Json& value) { return fold(value); }

std::string canonical_json(const Json& value) {
    // nlohmann::json objects are std::map backed, so keys come out sorted.
    return fold(value).dump(-1, ' ', false, Json::error_handler_t::strict);
}

Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(what + ": " + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json load_json_file(const std::string& path) {
    return parse_json(read_text_file(path), path);
}

void write_file_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace arq
