/// @file error.hpp
/// @brief Exception hierarchy shared by all sage modules.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sage {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A domain value violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Configuration or input files are unusable. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// llm-gateway
// ---------------------------------------------------------------------------

class GatewayError : public Error {
 public:
  using Error::Error;
};

class TransportExhausted : public GatewayError {
 public:
  TransportExhausted(std::string detail, int attempts)
      : GatewayError("transport failed after " + std::to_string(attempts) +
                     " attempts: " + detail),
        attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class BackendRefusal : public GatewayError {
 public:
  BackendRefusal(int status, std::string detail)
      : GatewayError("backend refused request (HTTP " + std::to_string(status) +
                     "): " + detail),
        status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ScriptExhausted : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

// ---------------------------------------------------------------------------
// prompt-kit
// ---------------------------------------------------------------------------

class TemplateError : public Error {
 public:
  using Error::Error;
};

class MissingSlot : public TemplateError {
 public:
  explicit MissingSlot(std::string slot)
      : TemplateError("missing template slot '" + slot + "'"), slot_(std::move(slot)) {}
  const std::string& slot() const noexcept { return slot_; }

 private:
  std::string slot_;
};

class UnknownSlot : public TemplateError {
 public:
  explicit UnknownSlot(std::string slot)
      : TemplateError("unknown template slot '" + slot + "'"), slot_(std::move(slot)) {}
  const std::string& slot() const noexcept { return slot_; }

 private:
  std::string slot_;
};

/// Base for every structured-output parse failure. Judge calls retry on it.
class ParseError : public Error {
 public:
  using Error::Error;
};

class MalformedEstimate : public ParseError {
 public:
  explicit MalformedEstimate(std::vector<std::string> missing)
      : ParseError("malformed emotion estimate; missing or empty: " + join(missing)),
        missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  static std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
      if (!out.empty()) out += ", ";
      out += p;
    }
    return out;
  }
  std::vector<std::string> missing_;
};

class MalformedReply : public ParseError {
 public:
  using ParseError::ParseError;
};

class MalformedPersona : public ParseError {
 public:
  using ParseError::ParseError;
};

class MalformedScene : public ParseError {
 public:
  using ParseError::ParseError;
};

class WrongItemCount : public ParseError {
 public:
  WrongItemCount(std::size_t expected, std::size_t actual, std::string detail = {})
      : ParseError("expected " + std::to_string(expected) + " items, found " +
                   std::to_string(actual) + (detail.empty() ? "" : " (" + detail + ")")),
        expected_(expected),
        actual_(actual) {}
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class UnknownLabel : public ParseError {
 public:
  using ParseError::ParseError;
};

class OutOfRange : public ParseError {
 public:
  using ParseError::ParseError;
};

class NoStrategyTags : public ParseError {
 public:
  NoStrategyTags() : ParseError("no <Strategy></Strategy> tags found") {}
};

class UnknownStrategyCode : public ParseError {
 public:
  explicit UnknownStrategyCode(std::string code)
      : ParseError("unknown strategy code '" + code + "'"), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class NoCoordinatesFound : public ParseError {
 public:
  explicit NoCoordinatesFound(std::string model)
      : ParseError("no coordinates found for model '" + model + "'"), model_(std::move(model)) {}
  const std::string& model() const noexcept { return model_; }

 private:
  std::string model_;
};

// ---------------------------------------------------------------------------
// scenario-factory, judges, analytics
// ---------------------------------------------------------------------------

class PoolTooSmall : public Error {
 public:
  using Error::Error;
};

class JudgeFailed : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class NoEligibleDialogues : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class ItemSetMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace sage
