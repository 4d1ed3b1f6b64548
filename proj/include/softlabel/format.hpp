#pragma once

#include <string>

namespace softlabel {

// CSV cell rendering: %.12g, locale-independent, with inf/-inf/nan spelled
// exactly that way. Integral values up to 2^53 print without an exponent.
std::string format_number(double v);

}  // namespace softlabel
