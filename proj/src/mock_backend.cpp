#include "httplib.h"
#include "json.hpp"

#include "geezmt/mock_backend.hpp"

#include <stdexcept>
#include <thread>

#include "geezmt/corpus.hpp"
#include "geezmt/error.hpp"

namespace geezmt {

namespace {

std::string after_label(const std::string& line) {
  const auto sep = line.find(": ");
  return sep == std::string::npos ? std::string() : line.substr(sep + 2);
}

}  // namespace

ParsedPrompt parse_prompt(const std::string& prompt) {
  const auto lines = split_lines(prompt);
  ParsedPrompt out;
  if (lines.size() < 2) return out;
  out.query = after_label(lines[lines.size() - 2]);
  // Example lines come in pairs above the query line and the cue line.
  for (std::size_t i = 0; i + 1 < lines.size() - 2; i += 2) {
    out.examples.emplace_back(after_label(lines[i]), after_label(lines[i + 1]));
  }
  return out;
}

struct MockCompletionServer::Impl {
  httplib::Server server;
  std::thread thread;
};

MockCompletionServer::MockCompletionServer(Mode mode) : impl_(std::make_unique<Impl>()), mode_(mode) {}

MockCompletionServer::~MockCompletionServer() { stop(); }

void MockCompletionServer::set_references(std::map<std::string, std::string> query_to_reference) {
  std::lock_guard lock(mutex_);
  references_ = std::move(query_to_reference);
}

void MockCompletionServer::set_fixed_text(std::string text) {
  std::lock_guard lock(mutex_);
  fixed_text_ = std::move(text);
}

void MockCompletionServer::set_fail_status(int status) {
  std::lock_guard lock(mutex_);
  fail_status_ = status;
}

void MockCompletionServer::fail_first(int count, int status) {
  std::lock_guard lock(mutex_);
  fail_remaining_ = count;
  fail_status_ = status;
}

std::string MockCompletionServer::answer(const std::string& prompt) const {
  const ParsedPrompt parsed = parse_prompt(prompt);
  std::lock_guard lock(mutex_);
  switch (mode_) {
    case Mode::kEchoLastExample:
      return parsed.examples.empty() ? std::string() : parsed.examples.back().second;
    case Mode::kCopyReference: {
      const auto it = references_.find(parsed.query);
      return it == references_.end() ? std::string() : it->second;
    }
    case Mode::kFixed:
    case Mode::kFailWith:
      return fixed_text_;
  }
  return {};
}

void MockCompletionServer::start() {
  impl_->server.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    CompletionRequest request;
    try {
      request = CompletionRequest::from_json(req.body);
    } catch (const Error& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    {
      std::lock_guard lock(mutex_);
      captured_.push_back(request);
      if (mode_ == Mode::kFailWith || fail_remaining_ > 0) {
        if (fail_remaining_ > 0) --fail_remaining_;
        res.status = fail_status_;
        res.set_content(R"({"error":"injected failure"})", "application/json");
        return;
      }
    }
    // Completion APIs usually start with a space after the cue.
    const std::string text = " " + answer(request.prompt) + "\n";
    res.set_content(nlohmann::json{{"choices", {{{"text", text}, {"index", 0}}}}}.dump(), "application/json");
  });
  port_ = impl_->server.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw Error("backend", "mock backend could not bind a port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  while (!impl_->server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
}

void MockCompletionServer::stop() {
  if (impl_ && impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

std::string MockCompletionServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1/completions";
}

std::vector<CompletionRequest> MockCompletionServer::captured() const {
  std::lock_guard lock(mutex_);
  return captured_;
}

std::size_t MockCompletionServer::request_count() const {
  std::lock_guard lock(mutex_);
  return captured_.size();
}

}  // namespace geezmt
