#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "geezmt/backend.hpp"

namespace geezmt {

// In-process HTTP server speaking the completion wire protocol. Reads the
// fuzzy-v1 prompt layout to decide what to answer.
class MockCompletionServer {
public:
  enum class Mode {
    kEchoLastExample,  // target line of the example nearest the query
    kCopyReference,    // looks the query up in the reference table
    kFixed,            // always returns fixed_text
    kFailWith,         // always answers with fail_status
  };

  explicit MockCompletionServer(Mode mode);
  ~MockCompletionServer();
  MockCompletionServer(const MockCompletionServer&) = delete;
  MockCompletionServer& operator=(const MockCompletionServer&) = delete;

  void set_references(std::map<std::string, std::string> query_to_reference);
  void set_fixed_text(std::string text);
  void set_fail_status(int status);
  // The first `count` requests fail with `status`, later ones succeed.
  void fail_first(int count, int status);

  // Binds to 127.0.0.1 on a free port and serves on a background thread.
  void start();
  void stop();
  int port() const noexcept { return port_; }
  std::string endpoint() const;

  std::vector<CompletionRequest> captured() const;
  std::size_t request_count() const;

  // The answer this server would give to `prompt` in its mode.
  std::string answer(const std::string& prompt) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Mode mode_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> references_;
  std::string fixed_text_;
  int fail_status_ = 500;
  int fail_remaining_ = 0;
  std::vector<CompletionRequest> captured_;
};

// Parts of a fuzzy-v1 prompt, recovered by line position.
struct ParsedPrompt {
  std::vector<std::pair<std::string, std::string>> examples;
  std::string query;
};

ParsedPrompt parse_prompt(const std::string& prompt);

}  // namespace geezmt
