#pragma once

// Thin blocking HTTP helpers shared by the YouTube, embedding, and chat clients.

#include <map>
#include <string>
#include <string_view>

namespace salience::http {

struct Response {
    int status = 0;
    std::string body;
};

using Headers = std::multimap<std::string, std::string>;

/// Splits "https://host:port/base/path" into origin ("https://host:port") and path ("/base/path").
std::pair<std::string, std::string> split_url(std::string_view url);

/// Percent-encodes everything outside the RFC 3986 unreserved set.
std::string url_encode(std::string_view text);

/// Throws TransportError when no response arrives (DNS, connect, TLS, timeout).
Response get(const std::string& origin, const std::string& path_and_query, const Headers& headers = {});
Response post(const std::string& origin, const std::string& path, const std::string& body,
              const std::string& content_type, const Headers& headers = {});

}  // namespace salience::http
