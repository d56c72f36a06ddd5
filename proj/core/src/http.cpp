#include <httplib.h>

#include "ttk/backend.hpp"
#include "ttk/error.hpp"

namespace ttk::backend {
namespace {

class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(const BackendConfig& config) : timeout_(config.timeout), api_key_(config.api_key) {
    std::string url = config.base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ValidationError("base URL needs a scheme: " + config.base_url);
    const auto path_start = url.find('/', scheme + 3);
    if (path_start == std::string::npos) {
      origin_ = url;
    } else {
      origin_ = url.substr(0, path_start);
      prefix_ = url.substr(path_start);
    }
    // "/v1" prefixes are common in base URLs; request paths already carry it.
    if (prefix_.size() >= 3 && prefix_.compare(prefix_.size() - 3, 3, "/v1") == 0)
      prefix_.resize(prefix_.size() - 3);
  }

  HttpResponse post_json(const std::string& path, const std::string& body) override {
    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post(prefix_ + path, headers, body, "application/json");
    HttpResponse out;
    if (!res) {
      out.error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  }

 private:
  std::string origin_;
  std::string prefix_;
  std::chrono::milliseconds timeout_;
  std::string api_key_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport(const BackendConfig& config) {
  return std::make_shared<HttplibTransport>(config);
}

}  // namespace ttk::backend
