#include "glt/config.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>

#include "glt/digest.hpp"
#include "glt/error.hpp"
#include "glt/prompting.hpp"

namespace glt {
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::Global: return "global";
    case Mode::Local: return "local";
    case Mode::LocalGlobal: return "local+global";
  }
  return "local+global";
}

Mode parse_mode(std::string_view text) {
  if (text == "global") return Mode::Global;
  if (text == "local") return Mode::Local;
  if (text == "local+global" || text == "global+local") return Mode::LocalGlobal;
  throw Error(ErrorKind::ConfigError, "mode: expected global, local or local+global, got '" + std::string(text) + "'");
}

void RunConfig::validate() const {
  if (wants_local(mode)) grid.validate();
  vlm.decoding.validate();
  llm.decoding.validate();
  if (parallelism < 1) throw Error(ErrorKind::ConfigError, "parallelism must be >= 1");
  if (workers < 1) throw Error(ErrorKind::ConfigError, "workers must be >= 1");
  if (timeout_s < 1) throw Error(ErrorKind::ConfigError, "timeout_s must be >= 1");
  if (retries < 0) throw Error(ErrorKind::ConfigError, "retries must be >= 0");
  if (!mock) {
    if (vlm.url.empty()) throw Error(ErrorKind::ConfigError, "vlm.url must be set");
    if (llm.url.empty()) throw Error(ErrorKind::ConfigError, "llm.url must be set");
  }
}

namespace {

ordered_json grid_json(const GridSpec& g) {
  return {{"rows", g.rows},
          {"cols", g.cols},
          {"line_color", {g.line_color[0], g.line_color[1], g.line_color[2]}},
          {"line_thickness_px", g.line_thickness_px}};
}

ordered_json endpoint_json(const ModelEndpoint& e, const std::string& effective_model) {
  return {{"url", e.url},
          {"model", effective_model},
          {"api_key", e.api_key.empty() ? "" : "***"},
          {"decoding", e.decoding.to_json()}};
}

int parse_int_env(const char* value, const char* name) {
  int out = 0;
  const std::string_view s(value);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ConfigError, std::string(name) + ": not an integer: '" + value + "'");
  }
  return out;
}

bool parse_bool(std::string_view v, const char* name) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
  throw Error(ErrorKind::ConfigError, std::string(name) + ": not a boolean: '" + std::string(v) + "'");
}

void merge_endpoint(ModelEndpoint& e, const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, where + ": expected an object");
  if (j.contains("url")) e.url = j.at("url").get<std::string>();
  if (j.contains("model")) e.model = j.at("model").get<std::string>();
  if (j.contains("api_key")) e.api_key = j.at("api_key").get<std::string>();
  if (j.contains("decoding")) e.decoding = inference::DecodingConfig::from_json(j.at("decoding"), e.decoding);
}

}  // namespace

std::string RunConfig::fingerprint() const {
  ordered_json j;
  j["mode"] = to_string(mode);
  j["grid"] = wants_local(mode) ? grid_json(grid) : ordered_json(nullptr);
  j["fps"] = fps.to_string();
  j["vlm"] = {{"model", effective_vlm_model()}, {"decoding", vlm.decoding.to_json()}};
  j["llm"] = {{"model", effective_llm_model()}, {"decoding", llm.decoding.to_json()}};
  j["prompts"] = prompting::templates_digest();
  j["answer_fallback"] = answer_fallback;
  return content_digest(j.dump());
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["mode"] = to_string(mode);
  j["grid"] = grid_json(grid);
  j["fps"] = fps.to_string();
  j["vlm"] = endpoint_json(vlm, effective_vlm_model());
  j["llm"] = endpoint_json(llm, effective_llm_model());
  j["parallelism"] = parallelism;
  j["workers"] = workers;
  j["timeout_s"] = timeout_s;
  j["retries"] = retries;
  j["cache_dir"] = cache_dir.string();
  j["mock"] = mock;
  j["answer_fallback"] = answer_fallback;
  j["decoder_command"] = decoder_command;
  return j;
}

void RunConfig::merge_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "config: expected a JSON object");
  try {
    if (j.contains("mode")) mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.is_string()) {
        const auto keep_color = grid.line_color;
        const auto keep_thickness = grid.line_thickness_px;
        grid = GridSpec::parse(g.get<std::string>());
        grid.line_color = keep_color;
        grid.line_thickness_px = keep_thickness;
      } else {
        if (g.contains("rows")) grid.rows = g.at("rows").get<int>();
        if (g.contains("cols")) grid.cols = g.at("cols").get<int>();
        if (g.contains("line_color")) grid.line_color = g.at("line_color").get<Rgb>();
        if (g.contains("line_thickness_px")) grid.line_thickness_px = g.at("line_thickness_px").get<int>();
      }
    }
    if (j.contains("fps")) {
      const auto& f = j.at("fps");
      fps = f.is_string() ? Rational::parse(f.get<std::string>()) : Rational::parse(f.dump());
    }
    if (j.contains("vlm")) merge_endpoint(vlm, j.at("vlm"), "vlm");
    if (j.contains("llm")) merge_endpoint(llm, j.at("llm"), "llm");
    if (j.contains("parallelism")) parallelism = j.at("parallelism").get<int>();
    if (j.contains("workers")) workers = j.at("workers").get<int>();
    if (j.contains("timeout_s")) timeout_s = j.at("timeout_s").get<int>();
    if (j.contains("retries")) retries = j.at("retries").get<int>();
    if (j.contains("cache_dir")) cache_dir = j.at("cache_dir").get<std::string>();
    if (j.contains("mock")) mock = j.at("mock").get<bool>();
    if (j.contains("answer_fallback")) answer_fallback = j.at("answer_fallback").get<bool>();
    if (j.contains("decoder_command")) decoder_command = j.at("decoder_command").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("config: ") + e.what());
  }
}

void RunConfig::merge_env(const std::function<const char*(const char*)>& getenv) {
  const auto env = [&](const char* name) -> const char* {
    const char* v = getenv(name);
    return (v != nullptr && *v != '\0') ? v : nullptr;
  };
  if (auto v = env("GLT_MODE")) mode = parse_mode(v);
  if (auto v = env("GLT_GRID")) {
    const auto parsed = GridSpec::parse(v);
    grid.rows = parsed.rows;
    grid.cols = parsed.cols;
  }
  if (auto v = env("GLT_FPS")) fps = Rational::parse(v);
  if (auto v = env("GLT_VLM_URL")) vlm.url = v;
  if (auto v = env("GLT_VLM_MODEL")) vlm.model = v;
  if (auto v = env("GLT_LLM_URL")) llm.url = v;
  if (auto v = env("GLT_LLM_MODEL")) llm.model = v;
  if (auto v = env("GLT_API_KEY")) vlm.api_key = llm.api_key = v;
  if (auto v = env("GLT_VLM_API_KEY")) vlm.api_key = v;
  if (auto v = env("GLT_LLM_API_KEY")) llm.api_key = v;
  if (auto v = env("GLT_PARALLELISM")) parallelism = parse_int_env(v, "GLT_PARALLELISM");
  if (auto v = env("GLT_WORKERS")) workers = parse_int_env(v, "GLT_WORKERS");
  if (auto v = env("GLT_TIMEOUT_S")) timeout_s = parse_int_env(v, "GLT_TIMEOUT_S");
  if (auto v = env("GLT_RETRIES")) retries = parse_int_env(v, "GLT_RETRIES");
  if (auto v = env("GLT_CACHE_DIR")) cache_dir = v;
  if (auto v = env("GLT_MOCK")) mock = parse_bool(v, "GLT_MOCK");
  if (auto v = env("GLT_DECODER_COMMAND")) decoder_command = v;
}

inference::EndpointConfig RunConfig::vlm_endpoint() const {
  inference::EndpointConfig e;
  e.base_url = vlm.url;
  e.model_id = vlm.model;
  e.api_key = vlm.api_key;
  e.timeout = std::chrono::seconds(timeout_s);
  e.retries = retries;
  return e;
}

inference::EndpointConfig RunConfig::llm_endpoint() const {
  auto e = vlm_endpoint();
  e.base_url = llm.url;
  e.model_id = llm.model;
  e.api_key = llm.api_key;
  return e;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::function<const char*(const char*)>& getenv) {
  RunConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file " + file->string());
    const auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::ConfigError, file->string() + ": not valid JSON");
    cfg.merge_json(j);
  }
  cfg.merge_env(getenv);
  return cfg;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace glt
