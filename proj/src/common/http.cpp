#include "curator/common/http.hpp"

#include <httplib.h>

namespace curator {

HttpEndpoint HttpEndpoint::parse(const std::string& url) {
  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw std::invalid_argument("endpoint must start with http://: " + url);
  }
  HttpEndpoint ep;
  std::string rest = url.substr(scheme.size());
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  ep.path = slash == std::string::npos ? "/" : rest.substr(slash);
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    ep.host = authority.substr(0, colon);
    try {
      ep.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad port in endpoint: " + url);
    }
  } else {
    ep.host = authority;
  }
  if (ep.host.empty()) throw std::invalid_argument("empty host in endpoint: " + url);
  return ep;
}

std::string HttpEndpoint::to_string() const {
  return "http://" + host + ":" + std::to_string(port) + path;
}

nlohmann::json post_json(const HttpEndpoint& endpoint, const nlohmann::json& body,
                         std::chrono::milliseconds timeout) {
  httplib::Client client(endpoint.host, endpoint.port);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(endpoint.path, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw ServiceError(ServiceError::Kind::Timeout,
                         endpoint.to_string() + ": " + httplib::to_string(err));
    }
    throw ServiceError(ServiceError::Kind::Unavailable,
                       endpoint.to_string() + ": " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw ServiceError(ServiceError::Kind::Unavailable,
                       endpoint.to_string() + ": HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ServiceError(ServiceError::Kind::Malformed,
                       endpoint.to_string() + ": response is not JSON: " + e.what());
  }
}

std::string base64_encode(const unsigned char* data, std::size_t size) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((size + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < size; i += 3) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i < size) {
    std::uint32_t v = data[i] << 16;
    if (i + 1 < size) v |= data[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += i + 1 < size ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

}  // namespace curator
