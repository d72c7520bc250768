#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "behavior_codec/openai_backend.hpp"

#include <atomic>
#include <cstdlib>
#include <regex>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "behavior_codec/error.hpp"

namespace behavior_codec {

namespace {

using nlohmann::json;

struct Endpoint {
  std::string scheme_host_port;
  std::string path_prefix;
};

Endpoint split_base_url(const std::string& base_url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url, m, pattern)) {
    throw Error(ErrorKind::TransportError, fmt::format("malformed base URL '{}'", base_url));
  }
  std::string prefix = m[2].matched ? m[2].str() : std::string{};
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  if (prefix.ends_with("/v1")) prefix.resize(prefix.size() - 3);
  return {m[1].str(), prefix};
}

}  // namespace

struct OpenAiBackend::Impl {
  Endpoint endpoint;
  RateLimiter limiter;
  std::atomic<std::size_t> dimension{0};

  Impl(const OpenAiSettings& s, Clock& clock)
      : endpoint(split_base_url(s.base_url)),
        limiter(s.requests_per_window, s.window, clock),
        dimension(s.embedding_dimension) {}
};

OpenAiSettings OpenAiSettings::from_config(const Config& config) {
  OpenAiSettings s;
  const Config live = config.section("live");
  s.base_url = live.get_string("base_url", s.base_url);
  s.chat_model = live.get_string("chat_model", s.chat_model);
  s.embedding_model = live.get_string("embedding_model", s.embedding_model);
  s.embedding_dimension = static_cast<std::size_t>(live.get_int("embedding_dimension", 0));
  s.max_attempts = static_cast<int>(live.get_int("max_attempts", s.max_attempts));
  s.initial_backoff = std::chrono::milliseconds(live.get_int("initial_backoff_ms", s.initial_backoff.count()));
  s.backoff_multiplier = live.get_double("backoff_multiplier", s.backoff_multiplier);
  s.timeout = std::chrono::seconds(live.get_int("timeout_s", s.timeout.count()));
  s.requests_per_window = static_cast<std::size_t>(
      live.get_int("rate_limit", static_cast<long long>(s.requests_per_window)));
  s.window = std::chrono::milliseconds(live.get_int("rate_window_ms", s.window.count()));
  s.api_key = live.get_string("api_key", "");
  if (s.max_attempts < 1) throw Error(ErrorKind::ParseError, "live.max_attempts must be >= 1");
  return s;
}

OpenAiBackend::OpenAiBackend(OpenAiSettings settings, Clock& clock)
    : settings_(std::move(settings)), clock_(clock), impl_(std::make_unique<Impl>(settings_, clock)) {}

OpenAiBackend::~OpenAiBackend() = default;

std::string OpenAiBackend::id() const { return "openai:" + settings_.chat_model; }

std::size_t OpenAiBackend::dimension() const { return impl_->dimension.load(); }

namespace {

// POSTs `body` with retries; returns the parsed 200 response.
json post_json(const Endpoint& endpoint, const std::string& path, const OpenAiSettings& s,
               RateLimiter& limiter, Clock& clock, const json& body) {
  if (s.api_key.empty()) {
    throw Error(ErrorKind::AuthError, "no API key (set BEHAVIOR_CODEC_API_KEY)");
  }
  const std::string payload = body.dump();
  const httplib::Headers headers{{"Authorization", "Bearer " + s.api_key}};
  auto backoff = std::chrono::duration<double, std::milli>(s.initial_backoff);
  std::optional<Error> last;

  for (int attempt = 1; attempt <= s.max_attempts; ++attempt) {
    if (attempt > 1) {
      clock.sleep_for(std::chrono::duration_cast<Clock::duration>(backoff));
      backoff *= s.backoff_multiplier;
    }
    limiter.acquire();
    httplib::Client client(endpoint.scheme_host_port);
    client.set_connection_timeout(s.timeout);
    client.set_read_timeout(s.timeout);
    client.set_write_timeout(s.timeout);
    const auto result = client.Post(endpoint.path_prefix + path, headers, payload, "application/json");
    if (!result) {
      last = Error(ErrorKind::TransportError,
                   fmt::format("POST {} failed: {}", path, httplib::to_string(result.error())));
      continue;
    }
    const int status = result->status;
    if (status == 200) {
      try {
        return json::parse(result->body);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::BackendRefused, fmt::format("unparseable response body: {}", e.what()));
      }
    }
    const std::string snippet = result->body.substr(0, 300);
    if (status == 401 || status == 403) {
      throw Error(ErrorKind::AuthError, fmt::format("HTTP {}: {}", status, snippet));
    }
    if (status == 429) {
      last = Error(ErrorKind::RateLimited, fmt::format("HTTP 429: {}", snippet));
      if (result->has_header("Retry-After")) {
        const double seconds = std::atof(result->get_header_value("Retry-After").c_str());
        if (seconds > 0) backoff = std::max(backoff, std::chrono::duration<double, std::milli>(seconds * 1000.0));
      }
      continue;
    }
    if (status >= 500) {
      last = Error(ErrorKind::TransportError, fmt::format("HTTP {}: {}", status, snippet));
      continue;
    }
    throw Error(ErrorKind::BackendRefused, fmt::format("HTTP {}: {}", status, snippet));
  }
  throw *last;
}

}  // namespace

ChatResponse OpenAiBackend::complete(const ChatRequest& request) {
  request.validate();
  json messages = json::array();
  for (const ChatMessage& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  const json body{{"model", request.model_name.empty() ? settings_.chat_model : request.model_name},
                  {"temperature", request.temperature},
                  {"messages", std::move(messages)}};
  const auto started = clock_.now();
  const json reply = post_json(impl_->endpoint, "/v1/chat/completions", settings_, impl_->limiter,
                               clock_, body);
  std::string text;
  try {
    text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::BackendRefused, "chat response has no choices[0].message.content");
  }
  if (text.empty()) throw Error(ErrorKind::BackendRefused, "chat response content is empty");
  return {std::move(text), id(), clock_.now() - started};
}

EmbeddingVector OpenAiBackend::embed(std::string_view text) {
  if (text.empty()) throw Error(ErrorKind::EmptyInput, "cannot embed empty text");
  const json body{{"model", settings_.embedding_model}, {"input", std::string(text)}};
  const json reply =
      post_json(impl_->endpoint, "/v1/embeddings", settings_, impl_->limiter, clock_, body);
  std::vector<double> values;
  try {
    values = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::BackendRefused, "embedding response has no data[0].embedding");
  }
  if (values.empty()) throw Error(ErrorKind::BackendRefused, "embedding is empty");
  std::size_t expected = 0;
  if (!impl_->dimension.compare_exchange_strong(expected, values.size()) &&
      expected != values.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("embedding has {} entries, backend declared {}", values.size(), expected));
  }
  return {std::move(values), "openai:" + settings_.embedding_model};
}

}  // namespace behavior_codec
