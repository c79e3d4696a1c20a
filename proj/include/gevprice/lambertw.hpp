#pragma once

namespace gevprice {

/// Principal branch W0 of the Lambert W function, w e^w = x, for x >= -1/e.
/// Throws DomainError below the branch point.
double lambert_w0(double x);

/// W0(exp(log_x)); stays accurate when exp(log_x) would overflow.
double lambert_w0_exp(double log_x);

}  // namespace gevprice
