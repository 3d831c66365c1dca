#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lexpath/error.hpp"
#include "lexpath/extraction.hpp"

namespace lexpath {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

std::optional<SplitUrl> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") return std::nullopt;
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (out.origin.size() <= scheme_end + 3) return std::nullopt;
  return out;
}

}  // namespace

HttpModelEndpoint::HttpModelEndpoint(EndpointDescriptor descriptor) : descriptor_(std::move(descriptor)) {}

std::string HttpModelEndpoint::complete(std::string_view prompt) {
  const auto url = split_url(descriptor_.url);
  if (!url) throw Error(ErrorCode::EndpointUnavailable, "model endpoint URL '" + descriptor_.url + "' is not http(s)");

  httplib::Client client(url->origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(descriptor_.timeout);
  const auto secs = static_cast<time_t>(timeout.count() / 1'000'000);
  const auto usecs = static_cast<time_t>(timeout.count() % 1'000'000);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!descriptor_.token_env.empty()) {
    if (const char* token = std::getenv(descriptor_.token_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const std::string body = nlohmann::json{{"prompt", prompt}}.dump();
  auto res = client.Post(url->path, headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw Error(ErrorCode::Timeout, "model endpoint " + descriptor_.url + " did not answer in time (" +
                                          httplib::to_string(err) + ")");
    }
    throw Error(ErrorCode::EndpointUnavailable, "model endpoint " + descriptor_.url + ": " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::EndpointUnavailable,
                "model endpoint " + descriptor_.url + " answered HTTP " + std::to_string(res->status));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("text").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::EndpointUnavailable, "model endpoint reply has no string field 'text'");
  }
}

}  // namespace lexpath
