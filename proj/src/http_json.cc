#include "http_json.h"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "spo/victim.h"

namespace spo::internal {

namespace {

constexpr auto kConnectTimeout = std::chrono::seconds(10);
constexpr auto kTimeout = std::chrono::seconds(60);

nlohmann::json parse_body(const std::string& base_url, const std::string& path,
                          const httplib::Result& res) {
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(base_url + path + ": response is not JSON: " +
                        e.what());
  }
}

std::string error_message(const httplib::Result& res) {
  try {
    const auto j = nlohmann::json::parse(res->body);
    if (j.is_object() && j.contains("error") && j["error"].is_string()) {
      return j["error"].get<std::string>();
    }
  } catch (const nlohmann::json::parse_error&) {
  }
  return res->body;
}

template <typename Call>
nlohmann::json with_retries(const std::string& base_url,
                            const std::string& path, int max_retries,
                            Call&& call) {
  std::string last_error;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
    httplib::Client client(base_url);
    client.set_connection_timeout(kConnectTimeout);
    client.set_read_timeout(kTimeout);
    client.set_write_timeout(kTimeout);
    httplib::Result res = call(client);
    if (!res) {
      last_error = base_url + path + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = base_url + path + ": HTTP " + std::to_string(res->status) +
                   ": " + error_message(res);
      continue;
    }
    return parse_body(base_url, path, res);
  }
  throw TransportError(last_error);
}

}  // namespace

nlohmann::json http_get_json(const std::string& base_url,
                             const std::string& path, int max_retries) {
  return with_retries(base_url, path, max_retries,
                      [&](httplib::Client& client) { return client.Get(path); });
}

nlohmann::json http_post_json(const std::string& base_url,
                              const std::string& path,
                              const nlohmann::json& body, int max_retries) {
  const std::string payload = body.dump();
  return with_retries(base_url, path, max_retries,
                      [&](httplib::Client& client) {
                        return client.Post(path, payload, "application/json");
                      });
}

}  // namespace spo::internal
