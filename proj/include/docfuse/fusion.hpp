#pragma once

#include <string>
#include <vector>

#include "docfuse/logdist.hpp"
#include "docfuse/types.hpp"

namespace docfuse {

/// Scalar exponents of the log-linear model combination. All >= 0.
struct FusionScales {
    double l0 = 1.0; // translation model
    double l1 = 0.0; // document-level LM
    double l2 = 0.0; // internal LM (subtracted)

    bool operator==(const FusionScales& o) const = default;
};

bool lex_less(const FusionScales& a, const FusionScales& b);

/// Discrete search space for scale tuning and on-the-fly selection.
/// restricted means: lambda0 = 1 and lambda1 = lambda2, one triple per value.
struct ScaleGrid {
    std::vector<double> values; // per axis, sorted ascending
    bool restricted = true;

    /// Materialized triples in lexicographic order.
    std::vector<FusionScales> triples() const;
};

ScaleGrid restricted_grid(double step = 0.1);
ScaleGrid full_grid(double step = 0.1);

/// Log-linear fusion with internal LM subtraction:
///   log p(e) = l0*tm(e) + l1*lm(e) - l2*ilm(e) - logsumexp(...)
/// computed entirely in log space.
LogDist fuse_step(const LogDist& d_tm, const LogDist& d_lm, const LogDist& d_ilm,
                  const FusionScales& s);

/// Baseline variant: subtracts the document LM's own context-free
/// distribution instead of the internal LM. Same algebra.
LogDist fuse_step_context_delta(const LogDist& d_tm, const LogDist& d_lm_ctx,
                                const LogDist& d_lm_noctx, const FusionScales& s);

/// Per-token maxima of the fused probability over the grid. The returned
/// scores are NOT a normalized distribution: each token may be scored under
/// different scales. Ties prefer the lexicographically smallest triple.
struct OnTheFlyResult {
    std::vector<double> score;         // log of the per-token max
    std::vector<FusionScales> chosen;  // the maximizing triple per token
};

OnTheFlyResult on_the_fly_step(const LogDist& d_tm, const LogDist& d_lm,
                               const LogDist& d_ilm, const ScaleGrid& grid);

/// Static scales file: single line "lambda0 lambda1 lambda2" (6 d.p.).
void save_scales(const std::string& path, const FusionScales& s);
FusionScales load_scales(const std::string& path);

} // namespace docfuse
