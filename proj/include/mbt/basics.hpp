#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace mbt {

// Model integers are arbitrary precision; small in practice, but guard and
// assignment arithmetic must never silently wrap.
using BigInt = boost::multiprecision::cpp_int;

struct SourceLocation {
  std::string file;
  int line = 1;    // 1-based
  int column = 1;  // 1-based

  std::string str() const {
    return file + ":" + std::to_string(line) + ":" + std::to_string(column);
  }
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceLocation loc;
  std::string message;

  std::string str() const {
    return loc.str() + ": " + (severity == Severity::Error ? "error: " : "warning: ") + message;
  }
};

// ---------------------------------------------------------------------------
// Errors

struct MbtError : std::runtime_error {
  explicit MbtError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : MbtError {
  SourceLocation location;
  std::string expected;
  std::string found;

  ParseError(SourceLocation loc, std::string expected_desc, std::string found_lexeme)
      : MbtError(loc.str() + ": expected " + expected_desc + ", found '" + found_lexeme + "'"),
        location(std::move(loc)),
        expected(std::move(expected_desc)),
        found(std::move(found_lexeme)) {}
};

struct EvalError : MbtError {
  using MbtError::MbtError;
};

struct FuelExhausted : EvalError {
  FuelExhausted() : EvalError("evaluation fuel exhausted (nonterminating recursion?)") {}
  explicit FuelExhausted(const std::string& what) : EvalError(what) {}
};

struct MatchFailure : EvalError {
  explicit MatchFailure(const std::string& where)
      : EvalError("no case arm matches (" + where + ")") {}
};

struct NondeterminismError : EvalError {
  explicit NondeterminismError(const std::string& detail)
      : EvalError("multiple transitions enabled in strict mode: " + detail) {}
};

struct SchemaError : MbtError {
  std::string pointer;  // JSON pointer into the offending document
  SchemaError(std::string json_pointer, const std::string& message)
      : MbtError(json_pointer + ": " + message), pointer(std::move(json_pointer)) {}
};

// ---------------------------------------------------------------------------
// Deterministic RNG. std::uniform_int_distribution is implementation-defined,
// so draws go through our own rejection sampler to keep emitted artifacts
// byte-identical across toolchains.

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  uint64_t next() {
    // xorshift* — small, fast, reproducible everywhere.
    uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  // Uniform in [0, n). n must be > 0.
  uint64_t below(uint64_t n) {
    uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Derive an independent stream; used to give every (spec, seed, case) its
  // own reproducible generator.
  Rng fork(uint64_t salt) {
    uint64_t s = next() ^ (salt * 0xff51afd7ed558ccdULL + 0x2d358dccaa6c78a5ULL);
    return Rng(s ? s : 1);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  uint64_t state_;
};

// ---------------------------------------------------------------------------
// FNV-1a, used for model/universe hashes and structural dedupe keys.

inline uint64_t fnv1a(std::string_view data, uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v);

}  // namespace mbt
