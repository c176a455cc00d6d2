#ifndef MOBISYNTH_ERRORS_HPP
#define MOBISYNTH_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace mobisynth {

// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input document (OSM XML, polyline string, trajectory file).
class ParseError : public Error {
  public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column = 0)
        : Error(msg + " (line " + std::to_string(line) +
                (column ? ", col " + std::to_string(column) : "") + ")"),
          line_(line), column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

// Invalid argument or violated precondition.
class DomainError : public Error {
  public:
    using Error::Error;
};

// No route between two points on the road graph.
class RoutingError : public Error {
  public:
    using Error::Error;
};

// The schedule LP (or a day as a whole) has no feasible solution.
class InfeasibleError : public Error {
  public:
    explicit InfeasibleError(const std::string& msg,
                             std::vector<std::string> violated = {})
        : Error(msg), violated_(std::move(violated)) {}

    const std::vector<std::string>& violated_constraints() const { return violated_; }

  private:
    std::vector<std::string> violated_;
};

// Traffic provider failures (transport, quota, empty result).
class ProviderError : public Error {
  public:
    enum class Kind { transport, quota, zero_results, bad_response };

    ProviderError(Kind kind, const std::string& msg, double retry_after_s = 0.0)
        : Error(msg), kind_(kind), retry_after_s_(retry_after_s) {}

    Kind kind() const { return kind_; }
    double retry_after_s() const { return retry_after_s_; }

  private:
    Kind kind_;
    double retry_after_s_;
};

// Step-profile synthesis could not reach an acceptable solution.
class SynthesisError : public Error {
  public:
    SynthesisError(const std::string& msg, double best_residual)
        : Error(msg), best_residual_(best_residual) {}

    double best_residual() const { return best_residual_; }

  private:
    double best_residual_;
};

// Caller violated an API contract (misaligned inputs, internal inconsistency).
class ContractError : public Error {
  public:
    using Error::Error;
};

}  // namespace mobisynth

#endif
