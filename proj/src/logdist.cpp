#include "docfuse/logdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace docfuse {

double logsumexp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v)
        if (x > m) m = x;
    if (!std::isfinite(m)) return m; // all -inf
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

void normalize(LogDist& d) {
    double z = logsumexp(d.logp);
    for (double& x : d.logp) x -= z;
}

void check_normalized(const LogDist& d, double tol) {
    double z = logsumexp(d.logp);
    if (std::isnan(z) || std::abs(z) > tol)
        throw Error("distribution not normalized: logsumexp = " + std::to_string(z));
    for (double x : d.logp)
        if (std::isnan(x)) throw Error("NaN entry in distribution");
}

SubwordId argmax(const LogDist& d) {
    return static_cast<SubwordId>(
        std::max_element(d.logp.begin(), d.logp.end()) - d.logp.begin());
}

} // namespace docfuse
