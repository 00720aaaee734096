#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tough {

// Root of every error the library throws. The CLI maps ProviderError
// (and subclasses) to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (embeddings, lexicon, dataset, CSV, snapshot).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class OovError : public Error {
 public:
  explicit OovError(std::string word)
      : Error("out of vocabulary: '" + word + "'"), word_(std::move(word)) {}
  const std::string& word() const { return word_; }

 private:
  std::string word_;
};

class UndefinedSimilarityError : public Error {
 public:
  using Error::Error;
};

class NotExplainableError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Model provider failures: network, HTTP status, response schema.
class ProviderError : public Error {
 public:
  using Error::Error;
};

class TransportError : public ProviderError {
 public:
  TransportError(const std::string& what, int attempts = 1)
      : ProviderError(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

class HttpStatusError : public ProviderError {
 public:
  HttpStatusError(int status, const std::string& excerpt, int attempts = 1)
      : ProviderError("model endpoint returned HTTP " + std::to_string(status) +
                      ": " + excerpt),
        status_(status),
        excerpt_(excerpt),
        attempts_(attempts) {}
  int status() const { return status_; }
  const std::string& excerpt() const { return excerpt_; }
  int attempts() const { return attempts_; }

 private:
  int status_;
  std::string excerpt_;
  int attempts_;
};

class SchemaError : public ProviderError {
 public:
  SchemaError(const std::string& what, const std::string& excerpt)
      : ProviderError(what + "; payload: " + excerpt), excerpt_(excerpt) {}
  const std::string& excerpt() const { return excerpt_; }

 private:
  std::string excerpt_;
};

}  // namespace tough
