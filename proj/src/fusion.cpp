#include "docfuse/fusion.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace docfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// scale * logp with the convention 0 * (-inf) == 0: a zero scale removes
/// the model from the combination entirely.
inline double scaled(double scale, double logp) {
    return scale == 0.0 ? 0.0 : scale * logp;
}

std::vector<double> grid_values(double step) {
    std::vector<double> v;
    int n = static_cast<int>(std::lround(1.0 / step));
    for (int i = 0; i <= n; ++i) v.push_back(static_cast<double>(i) * step);
    return v;
}

} // namespace

bool lex_less(const FusionScales& a, const FusionScales& b) {
    if (a.l0 != b.l0) return a.l0 < b.l0;
    if (a.l1 != b.l1) return a.l1 < b.l1;
    return a.l2 < b.l2;
}

std::vector<FusionScales> ScaleGrid::triples() const {
    if (values.empty()) throw Error("empty scale grid");
    std::vector<FusionScales> out;
    if (restricted) {
        for (double v : values) out.push_back({1.0, v, v});
    } else {
        for (double a : values)
            for (double b : values)
                for (double c : values) out.push_back({a, b, c});
    }
    return out;
}

ScaleGrid restricted_grid(double step) { return {grid_values(step), true}; }
ScaleGrid full_grid(double step) { return {grid_values(step), false}; }

LogDist fuse_step(const LogDist& d_tm, const LogDist& d_lm, const LogDist& d_ilm,
                  const FusionScales& s) {
    if (d_tm.size() != d_lm.size() || d_tm.size() != d_ilm.size())
        throw Error("fuse_step: distribution sizes differ");
    if (s.l0 < 0.0 || s.l1 < 0.0 || s.l2 < 0.0 || !std::isfinite(s.l0) ||
        !std::isfinite(s.l1) || !std::isfinite(s.l2))
        throw Error("fuse_step: scales must be finite and >= 0");

    LogDist out;
    out.logp.resize(d_tm.size());
    for (std::size_t i = 0; i < d_tm.size(); ++i) {
        double tm = d_tm.logp[i], lm = d_lm.logp[i], ilm = d_ilm.logp[i];
        if (std::isnan(tm) || std::isnan(lm) || std::isnan(ilm))
            throw Error("fuse_step: NaN in input distribution");
        if (std::isinf(ilm) && s.l2 > 0.0) {
            // a zero ILM probability blows up the subtraction; only allowed
            // when the numerator already excludes the token
            bool excluded = (s.l0 > 0.0 && std::isinf(tm)) || (s.l1 > 0.0 && std::isinf(lm));
            if (!excluded) throw Error("ILM zero under neutralization");
            out.logp[i] = kNegInf;
            continue;
        }
        // grouping the LM terms makes equal lm/ilm cancel exactly
        out.logp[i] = scaled(s.l0, tm) + (scaled(s.l1, lm) - scaled(s.l2, ilm));
    }
    normalize(out);
    return out;
}

LogDist fuse_step_context_delta(const LogDist& d_tm, const LogDist& d_lm_ctx,
                                const LogDist& d_lm_noctx, const FusionScales& s) {
    return fuse_step(d_tm, d_lm_ctx, d_lm_noctx, s);
}

OnTheFlyResult on_the_fly_step(const LogDist& d_tm, const LogDist& d_lm,
                               const LogDist& d_ilm, const ScaleGrid& grid) {
    std::vector<FusionScales> triples = grid.triples();
    OnTheFlyResult result;
    const std::size_t vsize = d_tm.size();
    result.score.assign(vsize, kNegInf);
    result.chosen.assign(vsize, triples.front());

    for (const FusionScales& s : triples) {
        LogDist fused = fuse_step(d_tm, d_lm, d_ilm, s);
        for (std::size_t i = 0; i < vsize; ++i) {
            // strict improvement only: grid order is lexicographic, so ties
            // keep the smallest triple
            if (fused.logp[i] > result.score[i]) {
                result.score[i] = fused.logp[i];
                result.chosen[i] = s;
            }
        }
    }
    return result;
}

void save_scales(const std::string& path, const FusionScales& s) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write scales file: " + path);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f", s.l0, s.l1, s.l2);
    f << buf << '\n';
}

FusionScales load_scales(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read scales file: " + path);
    std::string line;
    if (!std::getline(f, line)) throw ParseError(path, 1, "empty scales file");
    std::istringstream ss(line);
    FusionScales s;
    if (!(ss >> s.l0 >> s.l1 >> s.l2))
        throw ParseError(path, 1, "expected 'lambda0 lambda1 lambda2'");
    std::string rest;
    if (ss >> rest) throw ParseError(path, 1, "trailing content after scales");
    return s;
}

} // namespace docfuse
