#pragma once

#include "arq/json.hpp"

#include <string>

namespace arq::detail {

/// "https://host:8443/prefix" -> {"https://host:8443", "/prefix"}.
struct ParsedUrl {
    std::string scheme_host_port;
    std::string path_prefix;
};

inline ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("invalid URL '" + url + "': missing scheme");
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.scheme_host_port = url;
    } else {
        out.scheme_host_port = url.substr(0, path_start);
        out.path_prefix = url.substr(path_start);
    }
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    return out;
}

}  // namespace arq::detail
