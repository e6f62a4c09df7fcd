#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fcm {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorKind {
  usage,      // bad arguments or configuration
  data,       // input data violates a contract
  numerical,  // a numerical kernel failed
  state,      // run-directory bookkeeping (missing or stale stages, locks)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Stable machine-readable name, e.g. "DuplicateId".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

// corpus

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line_no, const std::string& reason)
      : Error(ErrorKind::data, "MalformedRow",
              "line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no) {}
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error(ErrorKind::data, "DuplicateId", "duplicate record_id '" + id + "'") {}
};

class EmptyFile : public Error {
 public:
  explicit EmptyFile(const std::string& path)
      : Error(ErrorKind::data, "EmptyFile", "no records in '" + path + "'") {}
};

class EmptySegment : public Error {
 public:
  explicit EmptySegment(const std::string& tag)
      : Error(ErrorKind::data, "EmptySegment", "no records with component '" + tag + "'") {}
};

// lexicon

class PhraseArity : public Error {
 public:
  PhraseArity(std::size_t line_no, const std::string& phrase)
      : Error(ErrorKind::data, "PhraseArity",
              "line " + std::to_string(line_no) + ": phrase '" + phrase +
                  "' must have 2 or 3 words") {}
};

class SynonymCycle : public Error {
 public:
  explicit SynonymCycle(const std::string& token)
      : Error(ErrorKind::data, "SynonymCycle",
              "synonym '" + token + "' is both a variant and a canonical target") {}
};

class DuplicateKey : public Error {
 public:
  DuplicateKey(const std::string& token, const std::string& file)
      : Error(ErrorKind::data, "DuplicateKey", "duplicate key '" + token + "' in " + file) {}
};

// preprocess

class EmptyAfterPreprocessing : public Error {
 public:
  explicit EmptyAfterPreprocessing(const std::string& record_id)
      : Error(ErrorKind::data, "EmptyAfterPreprocessing",
              "record '" + record_id + "' has no tokens after preprocessing") {}
};

// vectorize

class EmptyVocabulary : public Error {
 public:
  EmptyVocabulary()
      : Error(ErrorKind::data, "EmptyVocabulary", "no term meets the document-frequency threshold") {}
};

// svd

class NoConvergence : public Error {
 public:
  explicit NoConvergence(int iterations)
      : Error(ErrorKind::numerical, "NoConvergence",
              "no convergence after " + std::to_string(iterations) + " iterations") {}
};

// concepts

class KTooLarge : public Error {
 public:
  KTooLarge(std::size_t k, std::size_t available)
      : Error(ErrorKind::usage, "KTooLarge",
              "k=" + std::to_string(k) + " exceeds available rank " + std::to_string(available)) {}
};

class TooFewValues : public Error {
 public:
  explicit TooFewValues(std::size_t n)
      : Error(ErrorKind::data, "TooFewValues",
              "elbow detection needs at least 3 values, got " + std::to_string(n)) {}
};

class UnknownLabeledTerm : public Error {
 public:
  explicit UnknownLabeledTerm(const std::string& term)
      : Error(ErrorKind::data, "UnknownLabeledTerm", "labeled term '" + term + "' is not a top term") {}
};

// synthgen

class SpecInfeasible : public Error {
 public:
  explicit SpecInfeasible(const std::string& reason)
      : Error(ErrorKind::usage, "SpecInfeasible", reason) {}
};

class MoreTopicsThanConcepts : public Error {
 public:
  MoreTopicsThanConcepts(std::size_t topics, std::size_t concepts)
      : Error(ErrorKind::data, "MoreTopicsThanConcepts",
              std::to_string(topics) + " topics but only " + std::to_string(concepts) + " concepts") {}
};

// pipeline / server

class MissingPrerequisite : public Error {
 public:
  explicit MissingPrerequisite(const std::string& stage)
      : Error(ErrorKind::state, "MissingPrerequisite", "stage '" + stage + "' has not been run") {}
};

class StaleArtifact : public Error {
 public:
  explicit StaleArtifact(const std::string& stage)
      : Error(ErrorKind::state, "StaleArtifact",
              "inputs of stage '" + stage + "' changed since it ran; rerun it") {}
};

class RunNotFound : public Error {
 public:
  explicit RunNotFound(const std::string& dir)
      : Error(ErrorKind::state, "RunNotFound", "no completed run in '" + dir + "'") {}
};

class PortInUse : public Error {
 public:
  explicit PortInUse(int port)
      : Error(ErrorKind::usage, "PortInUse", "cannot bind port " + std::to_string(port)) {}
};

}  // namespace fcm
