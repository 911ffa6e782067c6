#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace mtcagg {

/// Malformed or invalid scenario configuration. `field()` names the
/// offending key (dotted path) when one can be identified.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A simulator invariant was violated. Always a defect, never a result.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Argument outside the mathematical domain of a model function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace detail {
[[noreturn]] inline void invariant_failed(const char* expr, const char* file, int line,
                                          const std::string& msg) {
    std::ostringstream os;
    os << file << ':' << line << ": invariant `" << expr << "` violated";
    if (!msg.empty()) os << ": " << msg;
    throw InvariantViolation(os.str());
}
}  // namespace detail

}  // namespace mtcagg

#define MTCAGG_CHECK(cond, msg)                                                      \
    do {                                                                             \
        if (!(cond)) {                                                               \
            std::ostringstream mtcagg_check_os_;                                     \
            mtcagg_check_os_ << msg;                                                 \
            ::mtcagg::detail::invariant_failed(#cond, __FILE__, __LINE__,            \
                                               mtcagg_check_os_.str());              \
        }                                                                            \
    } while (false)
