#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shield/embed.hpp"

namespace shield {

enum class LabelSource { Llm, Fallback };

std::string_view to_string(LabelSource source);

inline constexpr std::size_t kMaxLabelChars = 60;

struct ClusterLabel {
  std::size_t cluster_id = 0;
  std::string label;  // single line, 1..60 characters
  LabelSource source = LabelSource::Fallback;
  std::vector<std::string> member_pts;
};

/// First line, trimmed, cut to at most `max_chars` UTF-8 code points.
std::string sanitize_label(std::string_view raw, std::size_t max_chars = kMaxLabelChars);

/// "≈ " + the member with the highest mean similarity to the other members
/// (lexicographically smallest PT on ties).
ClusterLabel label_cluster_fallback(std::span<const std::string> member_pts,
                                    const SimilarityMatrix& s, std::size_t cluster_id = 0);

/// Text sent to the model for one cluster.
std::string label_prompt(std::span<const std::string> member_pts);

/// Anything that turns a prompt into a completion. Implementations throw on
/// transport or protocol failure.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

struct LlmConfig {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string model;
  std::string api_key;   // from SHIELD_LLM_API_KEY
  std::chrono::milliseconds timeout{30000};
};

/// Chat-completions client: POSTs {model, messages:[{role:"user", content}],
/// temperature: 0} and reads choices[0].message.content. The constructor
/// validates the endpoint and throws ConfigError before any request.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(LlmConfig config);
  std::string complete(const std::string& prompt) override;

  const std::string& scheme_host_port() const noexcept { return origin_; }
  const std::string& path() const noexcept { return path_; }

 private:
  LlmConfig config_;
  std::string origin_;
  std::string path_;
};

/// Builds the JSON request body for a prompt.
std::string chat_request_body(const std::string& model, const std::string& prompt);
/// Extracts choices[0].message.content; throws on malformed responses.
std::string parse_chat_response(const std::string& body);

/// Two attempts in total by default: a cluster whose request fails twice
/// falls back to the offline label.
struct RetryPolicy {
  int max_attempts = 2;
  std::chrono::milliseconds initial_backoff{500};
};

/// One prompt per cluster, retried with exponential backoff; on final
/// failure the fallback label is used and marked as such. Throws
/// InvalidArgument for an empty member list.
ClusterLabel label_cluster_llm(std::span<const std::string> member_pts, LlmClient& client,
                               const SimilarityMatrix& s, std::size_t cluster_id = 0,
                               const RetryPolicy& retry = {});

/// Labels every cluster. With a client, at most `max_in_flight` requests run
/// concurrently; without one, every label comes from the fallback.
std::vector<ClusterLabel> label_clusters(const std::vector<std::vector<std::string>>& clusters,
                                         const SimilarityMatrix& s, LlmClient* client,
                                         std::size_t max_in_flight = 4,
                                         const RetryPolicy& retry = {});

}  // namespace shield
