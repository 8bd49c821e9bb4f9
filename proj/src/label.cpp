#include "shield/label.hpp"

#include <algorithm>
#include <atomic>
#include <regex>
#include <thread>
#include <unordered_map>

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "shield/error.hpp"

namespace shield {

std::string_view to_string(LabelSource source) {
  return source == LabelSource::Llm ? "llm" : "fallback";
}

std::string sanitize_label(std::string_view raw, std::size_t max_chars) {
  const auto newline = raw.find_first_of("\r\n");
  std::string_view line = csv::trim(raw.substr(0, newline));
  // Common chat-model decoration.
  while (line.size() >= 2 && (line.front() == '"' || line.front() == '*') && line.back() == line.front()) {
    line = csv::trim(line.substr(1, line.size() - 2));
  }
  std::size_t chars = 0;
  std::size_t cut = 0;
  while (cut < line.size() && chars < max_chars) {
    const auto lead = static_cast<unsigned char>(line[cut]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    cut = std::min(cut + len, line.size());
    ++chars;
  }
  return std::string(csv::trim(line.substr(0, cut)));
}

ClusterLabel label_cluster_fallback(std::span<const std::string> member_pts,
                                    const SimilarityMatrix& s, std::size_t cluster_id) {
  if (member_pts.empty()) throw Error(ErrorCode::InvalidArgument, "cannot label an empty cluster");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s.terms.size(); ++i) index.emplace(s.terms[i], i);

  std::vector<std::size_t> idx;
  for (const auto& pt : member_pts) {
    const auto it = index.find(pt);
    if (it == index.end()) {
      throw Error(ErrorCode::InvalidArgument, "cluster member '" + pt + "' is not in the similarity matrix");
    }
    idx.push_back(it->second);
  }

  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < idx.size(); ++a) {
    double score = 0.0;
    for (std::size_t b = 0; b < idx.size(); ++b) {
      if (a != b) score += s.values(idx[a], idx[b]);
    }
    if (idx.size() > 1) score /= static_cast<double>(idx.size() - 1);
    if (score > best_score || (score == best_score && member_pts[a] < member_pts[best])) {
      best = a;
      best_score = score;
    }
  }
  return {cluster_id, sanitize_label("≈ " + member_pts[best]), LabelSource::Fallback,
          std::vector<std::string>(member_pts.begin(), member_pts.end())};
}

std::string label_prompt(std::span<const std::string> member_pts) {
  std::string list;
  for (const auto& pt : member_pts) {
    if (!list.empty()) list += ", ";
    list += pt;
  }
  return "The following MedDRA Preferred Terms form one cluster of related adverse events: " + list +
         ". Reply with only a single unifying medical concept name (max 6 words).";
}

std::string chat_request_body(const std::string& model, const std::string& prompt) {
  nlohmann::json body = {
      {"model", model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
  };
  return body.dump();
}

std::string parse_chat_response(const std::string& body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::InternalError, "LLM response is not JSON");
  const auto* content = &doc;
  try {
    content = &doc.at("choices").at(0).at("message").at("content");
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InternalError, "LLM response lacks choices[0].message.content");
  }
  if (!content->is_string()) throw Error(ErrorCode::InternalError, "LLM content is not a string");
  return content->get<std::string>();
}

HttpLlmClient::HttpLlmClient(LlmConfig config) : config_(std::move(config)) {
  static const std::regex url(R"(^(https?)://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\])(:[0-9]{1,5})?(/[^\s]*)?$)");
  std::smatch match;
  if (!std::regex_match(config_.endpoint, match, url)) {
    throw Error(ErrorCode::ConfigError, "malformed LLM endpoint '" + config_.endpoint + "'");
  }
#if !defined(CPPHTTPLIB_OPENSSL_SUPPORT)
  if (match[1] == "https") {
    throw Error(ErrorCode::ConfigError, "https endpoints need a build with OpenSSL support");
  }
#endif
  if (config_.model.empty()) throw Error(ErrorCode::ConfigError, "LLM model name is empty");
  origin_ = match[1].str() + "://" + match[2].str() + match[3].str();
  path_ = match[4].matched && !match[4].str().empty() ? match[4].str() : "/v1/chat/completions";
}

std::string HttpLlmClient::complete(const std::string& prompt) {
  httplib::Client client(origin_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  const auto res = client.Post(path_, headers, chat_request_body(config_.model, prompt), "application/json");
  if (!res) {
    throw Error(ErrorCode::IoError, "LLM request failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::IoError, "LLM endpoint returned HTTP " + std::to_string(res->status));
  }
  return parse_chat_response(res->body);
}

ClusterLabel label_cluster_llm(std::span<const std::string> member_pts, LlmClient& client,
                               const SimilarityMatrix& s, std::size_t cluster_id,
                               const RetryPolicy& retry) {
  if (member_pts.empty()) throw Error(ErrorCode::InvalidArgument, "cannot label an empty cluster");
  const std::string prompt = label_prompt(member_pts);
  auto backoff = retry.initial_backoff;
  for (int attempt = 0; attempt < std::max(retry.max_attempts, 1); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    try {
      std::string label = sanitize_label(client.complete(prompt));
      if (!label.empty()) {
        return {cluster_id, std::move(label), LabelSource::Llm,
                std::vector<std::string>(member_pts.begin(), member_pts.end())};
      }
    } catch (const std::exception&) {
      // retried below, then the fallback takes over
    }
  }
  return label_cluster_fallback(member_pts, s, cluster_id);
}

std::vector<ClusterLabel> label_clusters(const std::vector<std::vector<std::string>>& clusters,
                                         const SimilarityMatrix& s, LlmClient* client,
                                         std::size_t max_in_flight, const RetryPolicy& retry) {
  std::vector<ClusterLabel> out(clusters.size());
  if (client == nullptr) {
    for (std::size_t c = 0; c < clusters.size(); ++c) out[c] = label_cluster_fallback(clusters[c], s, c);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    const std::size_t workers = std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(clusters.size(), 1));
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < clusters.size() && !failed; c = next++) {
          try {
            out[c] = label_cluster_llm(clusters[c], *client, s, c, retry);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace shield
