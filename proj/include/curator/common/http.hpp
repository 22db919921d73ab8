#pragma once

#include <chrono>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace curator {

/// Raised by service clients. `unavailable` covers connection failures and
/// non-2xx statuses; `malformed` covers bodies that do not match the contract.
class ServiceError : public std::runtime_error {
 public:
  enum class Kind { Unavailable, Timeout, Malformed };

  ServiceError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// "http://host:port/path" split into its parts.
struct HttpEndpoint {
  std::string host;
  int port = 80;
  std::string path = "/";

  static HttpEndpoint parse(const std::string& url);
  std::string to_string() const;
};

/// POST a JSON body and parse the JSON response. Throws ServiceError.
nlohmann::json post_json(const HttpEndpoint& endpoint, const nlohmann::json& body,
                         std::chrono::milliseconds timeout = std::chrono::seconds(30));

std::string base64_encode(const unsigned char* data, std::size_t size);

}  // namespace curator
