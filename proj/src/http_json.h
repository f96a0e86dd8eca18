#ifndef SPO_SRC_HTTP_JSON_H_
#define SPO_SRC_HTTP_JSON_H_

#include <string>

#include "json.hpp"

namespace spo::internal {

// JSON-over-HTTP calls with the error mapping used by every remote backend:
// connection failures and non-2xx statuses raise TransportError (after
// `max_retries` extra attempts), unparseable bodies raise ProtocolError.
nlohmann::json http_get_json(const std::string& base_url,
                             const std::string& path, int max_retries);
nlohmann::json http_post_json(const std::string& base_url,
                              const std::string& path,
                              const nlohmann::json& body, int max_retries);

}  // namespace spo::internal

#endif  // SPO_SRC_HTTP_JSON_H_
