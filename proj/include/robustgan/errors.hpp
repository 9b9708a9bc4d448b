#ifndef ROBUSTGAN_ERRORS_HPP
#define ROBUSTGAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace robustgan {

struct InvalidInput : std::invalid_argument {
    explicit InvalidInput(const std::string& msg) : std::invalid_argument(msg) {}
};

struct InvalidData : std::invalid_argument {
    explicit InvalidData(const std::string& msg) : std::invalid_argument(msg) {}
};

struct UnsupportedForLogitF : std::invalid_argument {
    explicit UnsupportedForLogitF(const std::string& msg) : std::invalid_argument(msg) {}
};

struct MissingDefault : std::invalid_argument {
    explicit MissingDefault(const std::string& msg) : std::invalid_argument(msg) {}
};

struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFiniteObjective : std::runtime_error {
    explicit NonFiniteObjective(const std::string& msg) : std::runtime_error(msg) {}
};

// Derivative-free minimization ran out of budget; carries the best iterate seen.
struct OptFailure : std::runtime_error {
    OptFailure(const std::string& msg, double mu, double sigma, double value)
        : std::runtime_error(msg), best_mu(mu), best_sigma(sigma), best_value(value) {}
    double best_mu;
    double best_sigma;
    double best_value;
};

}  // namespace robustgan

#endif
