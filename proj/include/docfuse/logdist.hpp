#pragma once

#include <vector>

#include "docfuse/types.hpp"

namespace docfuse {

/// Dense natural-log distribution over the full vocabulary.
/// Invariant for every LogDist produced by the toolkit:
/// |logsumexp(logp)| <= 1e-9, entries finite or -inf.
struct LogDist {
    std::vector<double> logp;

    std::size_t size() const { return logp.size(); }
    double operator[](SubwordId id) const { return logp[static_cast<std::size_t>(id)]; }
};

double logsumexp(const std::vector<double>& v);

/// Renormalizes in place so that logsumexp(logp) == 0.
void normalize(LogDist& d);

/// Throws if the normalization invariant is violated or a NaN is present.
void check_normalized(const LogDist& d, double tol = 1e-9);

SubwordId argmax(const LogDist& d);

} // namespace docfuse
