#include "layerlab/util/http.hpp"

#include <httplib.h>

#include "layerlab/error.hpp"

namespace layerlab::http {

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || scheme_end == 0)
    throw Error("invalid-url", "URL must start with http:// or https://: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error("invalid-url", "unsupported URL scheme: " + scheme);
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  Url out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (out.origin.size() <= host_start) throw Error("invalid-url", "URL has no host: " + url);
  return out;
}

std::unique_ptr<httplib::Client> make_client(const std::string& origin, double timeout_s) {
  auto client = std::make_unique<httplib::Client>(origin);
  if (!client->is_valid()) throw Error("invalid-url", "cannot create HTTP client for " + origin);
  const auto sec = static_cast<time_t>(timeout_s);
  const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
  client->set_connection_timeout(sec, usec);
  client->set_read_timeout(sec, usec);
  client->set_write_timeout(sec, usec);
  return client;
}

std::string join_path(const std::string& base, const std::string& suffix) {
  std::string b = base;
  while (!b.empty() && b.back() == '/') b.pop_back();
  std::string s = suffix;
  if (s.empty() || s.front() != '/') s.insert(s.begin(), '/');
  return b + s;
}

}  // namespace layerlab::http
