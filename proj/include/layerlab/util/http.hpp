#pragma once

#include <memory>
#include <string>

namespace httplib {
class Client;
}

namespace layerlab::http {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/', may be just "/"
};

// Errors: invalid-url.
Url split_url(const std::string& url);

// Client for `origin` with connect/read/write timeouts in seconds.
std::unique_ptr<httplib::Client> make_client(const std::string& origin, double timeout_s);

// `base` path joined with `suffix`, collapsing the slash between them.
std::string join_path(const std::string& base, const std::string& suffix);

}  // namespace layerlab::http
