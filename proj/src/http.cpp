#include "salience/http.hpp"

#include <fmt/format.h>

#include "httplib.h"
#include "salience/errors.hpp"

namespace salience::http {

namespace {

httplib::Headers to_httplib(const Headers& headers) {
    return httplib::Headers(headers.begin(), headers.end());
}

void configure(httplib::Client& client) {
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    client.set_follow_location(true);
}

Response convert(const httplib::Result& result, const std::string& origin, const std::string& path) {
    if (!result)
        throw TransportError(fmt::format("request to {}{} failed: {}", origin, path,
                                         httplib::to_string(result.error())));
    return Response{result->status, result->body};
}

}  // namespace

std::pair<std::string, std::string> split_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos)
        throw ConfigError(fmt::format("URL '{}' has no scheme", url));
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

std::string url_encode(std::string_view text) {
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out += fmt::format("%{:02X}", c);
        }
    }
    return out;
}

Response get(const std::string& origin, const std::string& path_and_query, const Headers& headers) {
    httplib::Client client(origin);
    configure(client);
    return convert(client.Get(path_and_query, to_httplib(headers)), origin, path_and_query);
}

Response post(const std::string& origin, const std::string& path, const std::string& body,
              const std::string& content_type, const Headers& headers) {
    httplib::Client client(origin);
    configure(client);
    return convert(client.Post(path, to_httplib(headers), body, content_type), origin, path);
}

}  // namespace salience::http
