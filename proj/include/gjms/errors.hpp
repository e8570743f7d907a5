#pragma once

#include <stdexcept>
#include <string>

namespace gjms {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PoleError : Error { using Error::Error; };
struct ParameterPole : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct UnsupportedOrder : Error { using Error::Error; };
struct SupportError : Error { using Error::Error; };
struct TailError : Error { using Error::Error; };
struct DegenerateData : Error { using Error::Error; };
struct ZeroTrial : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };

}  // namespace gjms
