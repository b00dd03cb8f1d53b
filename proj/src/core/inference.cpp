#include "glt/inference.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <regex>
#include <thread>

#include "glt/digest.hpp"
#include "glt/error.hpp"

namespace glt::inference {
using nlohmann::json;
using nlohmann::ordered_json;

void DecodingConfig::validate() const {
  if (!(temperature >= 0.0)) throw Error(ErrorKind::ConfigError, "decoding.temperature must be >= 0");
  if (min_new_tokens < 1) throw Error(ErrorKind::ConfigError, "decoding.min_new_tokens must be >= 1");
  if (max_new_tokens < min_new_tokens) {
    throw Error(ErrorKind::ConfigError, "decoding.max_new_tokens must be >= min_new_tokens");
  }
}

ordered_json DecodingConfig::to_json() const {
  ordered_json j{{"temperature", temperature}, {"min_new_tokens", min_new_tokens}, {"max_new_tokens", max_new_tokens}};
  j["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
  return j;
}

DecodingConfig DecodingConfig::from_json(const json& j, DecodingConfig d) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "decoding: expected an object");
  try {
    if (j.contains("temperature")) d.temperature = j.at("temperature").get<double>();
    if (j.contains("min_new_tokens")) d.min_new_tokens = j.at("min_new_tokens").get<int>();
    if (j.contains("max_new_tokens")) d.max_new_tokens = j.at("max_new_tokens").get<int>();
    if (j.contains("seed")) {
      d.seed = j.at("seed").is_null() ? std::nullopt : std::optional<std::int64_t>(j.at("seed").get<std::int64_t>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("decoding: ") + e.what());
  }
  d.validate();
  return d;
}

namespace {

ordered_json base_request(const ChatRequest& r) {
  ordered_json body;
  body["model"] = r.model_id;
  body["messages"] = ordered_json::array();
  if (r.system) body["messages"].push_back({{"role", "system"}, {"content", *r.system}});
  body["temperature"] = r.decoding.temperature;
  body["max_tokens"] = r.decoding.max_new_tokens;
  body["min_tokens"] = r.decoding.min_new_tokens;
  if (r.decoding.seed) body["seed"] = *r.decoding.seed;
  body["stream"] = false;
  return body;
}

void require_user_text(const ChatRequest& r) {
  if (r.user.empty()) throw Error(ErrorKind::InvalidRequest, "empty user message");
}

}  // namespace

ordered_json to_wire(const ChatRequest& request) {
  require_user_text(request);
  auto body = base_request(request);
  body["messages"].push_back({{"role", "user"}, {"content", request.user}});
  return body;
}

ordered_json to_wire(const VisionChatRequest& request) {
  require_user_text(request);
  auto body = base_request(request);
  const auto& bytes = request.image.bytes;
  const auto data_uri = "data:" + request.image.mime + ";base64," +
                        base64_encode({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
  ordered_json content = ordered_json::array();
  content.push_back({{"type", "text"}, {"text", request.user}});
  content.push_back({{"type", "image_url"}, {"image_url", {{"url", data_uri}}}});
  body["messages"].push_back({{"role", "user"}, {"content", std::move(content)}});
  return body;
}

ChatResponse parse_wire_response(std::string_view body) {
  const auto j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::MalformedResponse, "response is not JSON");
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    ChatResponse out;
    out.text = content.get<std::string>();
    if (out.text.empty()) throw Error(ErrorKind::MalformedResponse, "empty completion");
    if (j.contains("usage") && j["usage"].contains("completion_tokens")) {
      out.token_count = j["usage"]["completion_tokens"].get<std::int64_t>();
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, e.what());
  }
}

HttpChatClient::HttpChatClient(EndpointConfig config) : config_(std::move(config)) {
  const auto& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorKind::ConfigError, "endpoint url must start with http://, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/v1/chat/completions";
  if (config_.retries < 0) throw Error(ErrorKind::ConfigError, "retries must be >= 0");
}

ChatResponse HttpChatClient::send(const ChatRequest& request) const { return post(to_wire(request).dump()); }

ChatResponse HttpChatClient::send(const VisionChatRequest& request) const {
  return post(to_wire(request).dump());
}

ChatResponse HttpChatClient::post(const std::string& body) const {
  auto delay = config_.backoff_initial;
  for (int attempt = 0;; ++attempt) {
    try {
      return post_once(body);
    } catch (const Error& e) {
      const bool transient = e.kind() == ErrorKind::EndpointUnreachable || e.kind() == ErrorKind::Timeout ||
                             (e.kind() == ErrorKind::HttpError && (e.http_status() >= 500 || e.http_status() == 429));
      if (!transient || attempt >= config_.retries) throw;
    }
    std::this_thread::sleep_for(delay);
    delay = std::min(delay * 2, config_.backoff_max);
  }
}

ChatResponse HttpChatClient::post_once(const std::string& body) const {
  httplib::Client cli(scheme_host_port_);
  const auto secs = config_.timeout.count() / 1000;
  const auto usecs = (config_.timeout.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto start = std::chrono::steady_clock::now();
  auto res = cli.Post(path_, headers, body, "application/json");
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

  if (!res) {
    const auto err = res.error();
    const auto where = scheme_host_port_ + path_;
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed + std::chrono::milliseconds(50) >= config_.timeout)) {
      throw Error(ErrorKind::Timeout, where + " after " + std::to_string(elapsed.count()) + " ms");
    }
    throw Error(ErrorKind::EndpointUnreachable, where + ": " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::HttpError, "HTTP " + std::to_string(res->status) + " from " + scheme_host_port_ + path_,
                res->status);
  }
  auto out = parse_wire_response(res->body);
  out.latency_ms = elapsed.count();
  return out;
}

std::string HttpTextModel::complete(const PromptPair& prompts, const DecodingConfig& decoding) const {
  ChatRequest request{prompts.system, prompts.user, decoding, client_.config().model_id};
  return client_.send(request).text;
}

namespace {

bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

// `key` occurs in `text` with no key characters directly around it
bool contains_token(std::string_view text, std::string_view key) {
  for (auto pos = text.find(key); pos != std::string_view::npos; pos = text.find(key, pos + 1)) {
    const bool left_ok = pos == 0 || !is_key_char(text[pos - 1]);
    const bool right_ok = pos + key.size() == text.size() || !is_key_char(text[pos + key.size()]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace

std::string mock_llm(const PromptPair& prompts) {
  static const std::regex keyed(R"(GOLD\[([^\]\s]+)\]=([A-E]))");
  static const std::regex plain(R"(GOLD=([A-E]))");
  const std::string haystack = prompts.system.value_or("") + "\n" + prompts.user;

  for (std::sregex_iterator it(haystack.begin(), haystack.end(), keyed), end; it != end; ++it) {
    if (contains_token(prompts.user, (*it)[1].str())) {
      return "answer [" + (*it)[2].str() + "] answer";
    }
  }
  std::smatch m;
  if (std::regex_search(haystack, m, plain)) return "answer [" + m[1].str() + "] answer";
  return std::string(kMockLlmDistractor);
}

std::string MockLlm::complete(const PromptPair& prompts, const DecodingConfig& decoding) const {
  if (prompts.user.empty()) throw Error(ErrorKind::InvalidRequest, "empty user message");
  decoding.validate();
  calls_.fetch_add(1);
  return mock_llm(prompts);
}

}  // namespace glt::inference
