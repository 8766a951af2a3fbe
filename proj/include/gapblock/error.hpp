#pragma once

#include <stdexcept>
#include <string>

namespace gapblock {

/// Numerical or input failure. Carries the name of the module that raised
/// it and the invariant (or precondition) that was violated so front ends
/// can report both.
class Error : public std::runtime_error
{
 public:
    Error(std::string module, std::string invariant, const std::string& message)
        : std::runtime_error(module + ": " + invariant + ": " + message),
          module_(std::move(module)),
          invariant_(std::move(invariant))
    {
    }

    const std::string& module() const noexcept { return module_; }
    const std::string& invariant() const noexcept { return invariant_; }

 private:
    std::string module_;
    std::string invariant_;
};

}  // namespace gapblock
