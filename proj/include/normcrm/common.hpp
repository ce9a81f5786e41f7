#ifndef NORMCRM_COMMON_HPP_
#define NORMCRM_COMMON_HPP_

#include <stdexcept>
#include <string>

namespace normcrm {

/// Truncation policy for power/hypergeometric series: stop once a term drops
/// below rel_tol times the running sum, give up past max_terms.
struct SeriesControl {
    int max_terms = 10000;
    double rel_tol = 1e-14;
};

/// Raised when an adaptive scheme exhausts its budget before reaching the
/// requested tolerance. Carries the best estimate and an error bound so
/// callers can decide whether the result is still usable.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& msg, double estimate, double error_bound)
        : std::runtime_error(msg), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const { return estimate_; }
    double error_bound() const { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

}  // namespace normcrm

#endif  // NORMCRM_COMMON_HPP_
