// Cloud QA service. Links only the text-side library: no image codec is
// reachable from this binary (checked by tools/audit_cloud_deps.sh).

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "glt/config.hpp"
#include "glt/error.hpp"
#include "glt/gateway.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cloud question-answering service (text transcripts only)"};
  std::string config_file, llm_url, llm_model;
  bool mock = false;
  glt::gateway::ListenOptions listen_on{"127.0.0.1", 8090};
  glt::gateway::CloudServiceOptions options;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--host", listen_on.host);
  app.add_option("--port", listen_on.port);
  app.add_option("--edge-url", options.edge_url, "Edge base URL for transcript pulls");
  app.add_option("--edge-token", options.edge_token, "Bearer token presented to the edge");
  app.add_option("--token", options.auth_token, "Bearer token required from callers");
  app.add_option("--llm-url", llm_url, "Text model base URL");
  app.add_option("--llm-model", llm_model, "Text model id");
  app.add_flag("--mock", mock, "Use the deterministic mock text model");
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = glt::load_config(config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file),
                                [](const char* name) { return std::getenv(name); });
    if (mock) cfg.mock = true;
    if (!llm_url.empty()) cfg.llm.url = llm_url;
    if (!llm_model.empty()) cfg.llm.model = llm_model;
    options.log = &std::cerr;
    return glt::gateway::serve_cloud(cfg, options, listen_on, std::cout);
  } catch (const glt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
