#pragma once

#include <boost/math/policies/policy.hpp>

namespace tcopula::detail {

// Double-precision evaluation without promotion to long double. Underflow silently
// returns zero; overflow and evaluation failures set errno instead of throwing so
// that hot loops can handle extreme arguments themselves.
using MathPolicy = boost::math::policies::policy<
    boost::math::policies::promote_double<false>,
    boost::math::policies::underflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::overflow_error<boost::math::policies::errno_on_error>,
    boost::math::policies::evaluation_error<boost::math::policies::errno_on_error>,
    boost::math::policies::domain_error<boost::math::policies::errno_on_error>>;

}  // namespace tcopula::detail
