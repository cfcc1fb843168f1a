#include "docfuse/scale_tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "docfuse/backtranslation.hpp"
#include "docfuse/rng.hpp"

namespace docfuse {

std::vector<TuneExample> tune_examples_from_docs(const std::vector<ParallelDocument>& docs,
                                                 int k) {
    std::vector<TuneExample> out;
    for (const auto& doc : docs) {
        for (std::size_t i = 0; i < doc.source.size(); ++i) {
            TuneExample ex;
            ex.source = doc.source[i];
            ex.reference = doc.target[i];
            std::size_t kk = static_cast<std::size_t>(std::max(0, k));
            std::size_t lo = i > kk ? i - kk : 0;
            ex.context.assign(doc.target.begin() + static_cast<std::ptrdiff_t>(lo),
                              doc.target.begin() + static_cast<std::ptrdiff_t>(i));
            out.push_back(std::move(ex));
        }
    }
    return out;
}

namespace {

/// Reference log-likelihood of one example under static-scale fusion.
double fused_reference_loglik(const TuneExample& ex, const FusionModels& models,
                              const DecodeConfig& config) {
    double total = 0.0;
    Sentence prefix;
    for (SubwordId tok : ex.reference) {
        LogDist d = fused_step_dist(models, config, ex.source, ex.context, prefix);
        total += d.logp[static_cast<std::size_t>(tok)];
        prefix.push_back(tok);
    }
    return total;
}

} // namespace

GridSearchResult grid_search_scales(const std::vector<TuneExample>& valid,
                                    const ScaleGrid& grid, TuneObjective objective,
                                    const FusionModels& models, const DecodeConfig& config) {
    if (valid.empty()) throw Error("empty validation set");
    std::vector<FusionScales> triples = grid.triples();

    GridSearchResult result;
    bool have_best = false;
    double best_score = 0.0;
    for (const FusionScales& s : triples) {
        DecodeConfig cfg = config;
        cfg.fusion = FusionMode::Static;
        cfg.scales = s;
        double score = 0.0;
        if (objective == TuneObjective::Bleu) {
            std::vector<Sentence> hyps, refs;
            hyps.reserve(valid.size());
            refs.reserve(valid.size());
            for (const auto& ex : valid) {
                hyps.push_back(beam_decode(models, cfg, ex.source, ex.context).tokens);
                refs.push_back(ex.reference);
            }
            score = corpus_bleu(hyps, refs);
        } else {
            for (const auto& ex : valid) score -= fused_reference_loglik(ex, models, cfg);
        }
        result.report.push_back({s, score});
        bool better = objective == TuneObjective::Bleu ? score > best_score : score < best_score;
        if (!have_best || better) {
            have_best = true;
            best_score = score;
            result.best = s;
        }
    }
    return result;
}

LossAndGrad scale_loss_and_grad(const std::vector<TuneExample>& batch,
                                const SubwordScaleTable& table, const FusionModels& models,
                                int context_k) {
    const std::size_t vsize = models.tm->vocab->size();
    if (table.size() != vsize) throw Error("scale table size does not match vocabulary");

    LossAndGrad out;
    out.grad.scales.assign(vsize, {0.0, 0.0, 0.0});

    DecodeConfig cfg;
    cfg.context_k = context_k;

    for (const auto& ex : batch) {
        Sentence prefix;
        for (SubwordId tok : ex.reference) {
            Sentence tm_hist = models.tm->context_k() > 0
                                   ? lm_history(ex.context)
                                   : lm_history({});
            tm_hist.insert(tm_hist.end(), prefix.begin(), prefix.end());
            LogDist d_tm = models.tm->step_dist(tm_hist, ex.source);

            Sentence lm_hist_full = lm_history(ex.context);
            lm_hist_full.insert(lm_hist_full.end(), prefix.begin(), prefix.end());
            LogDist d_lm = models.lm->cond_logdist(lm_hist_full);

            Sentence ilm_hist = lm_history({});
            ilm_hist.insert(ilm_hist.end(), prefix.begin(), prefix.end());
            LogDist d_ilm = models.ilm->cond_logdist(ilm_hist);

            // s(e) = l0(e) tm(e) + l1(e) lm(e) - l2(e) ilm(e); p = softmax(s)
            std::vector<double> s(vsize);
            for (std::size_t e = 0; e < vsize; ++e) {
                const auto& l = table.scales[e];
                double v = 0.0;
                v += l[0] == 0.0 ? 0.0 : l[0] * d_tm.logp[e];
                v += l[1] == 0.0 ? 0.0 : l[1] * d_lm.logp[e];
                v -= l[2] == 0.0 ? 0.0 : l[2] * d_ilm.logp[e];
                s[e] = v;
            }
            double lse = logsumexp(s);
            out.loss += lse - s[static_cast<std::size_t>(tok)];
            out.tokens += 1;

            for (std::size_t e = 0; e < vsize; ++e) {
                double p = std::exp(s[e] - lse);
                double coef = p - (e == static_cast<std::size_t>(tok) ? 1.0 : 0.0);
                if (coef == 0.0) continue;
                auto& g = out.grad.scales[e];
                g[0] += coef * d_tm.logp[e];
                g[1] += coef * d_lm.logp[e];
                g[2] += coef * -d_ilm.logp[e];
            }
            prefix.push_back(tok);
        }
    }
    return out;
}

LearnResult learn_subword_scales(const std::vector<TuneExample>& train,
                                 const FusionModels& models, const LearnOptions& opts) {
    if (train.empty()) throw Error("empty tuning data");
    if (opts.lr <= 0.0) throw Error("learning rate must be > 0");
    if (opts.epochs < 0) throw Error("epochs must be >= 0");
    const std::size_t vsize = models.tm->vocab->size();

    Rng rng(opts.seed);
    SubwordScaleTable table;
    table.scales.assign(vsize, {0.0, 0.0, 0.0});
    if (opts.tied) {
        double l1 = rng.normal(0.0, opts.init_std);
        double l0 = opts.restricted ? 1.0 : rng.normal(0.0, opts.init_std);
        double l2 = opts.restricted ? l1 : rng.normal(0.0, opts.init_std);
        for (auto& s : table.scales) s = {l0, l1, l2};
    } else {
        for (auto& s : table.scales) {
            s[1] = rng.normal(0.0, opts.init_std);
            if (opts.restricted) {
                s[0] = 1.0;
                s[2] = s[1];
            } else {
                s[0] = rng.normal(0.0, opts.init_std);
                s[2] = rng.normal(0.0, opts.init_std);
            }
        }
    }

    auto mean_loss = [&]() {
        LossAndGrad lg = scale_loss_and_grad(train, table, models, opts.context_k);
        return lg.loss / static_cast<double>(std::max<std::size_t>(lg.tokens, 1));
    };

    LearnResult result;
    double initial = mean_loss();
    result.loss_trace.push_back(initial);

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            LossAndGrad lg =
                scale_loss_and_grad({train[idx]}, table, models, opts.context_k);
            double inv = 1.0 / static_cast<double>(std::max<std::size_t>(lg.tokens, 1));
            if (opts.tied) {
                // accumulate over the vocabulary, apply the same step to all
                double g0 = 0.0, g1 = 0.0, g2 = 0.0;
                for (const auto& g : lg.grad.scales) {
                    g0 += g[0];
                    g1 += g[1];
                    g2 += g[2];
                }
                double step0 = opts.restricted ? 0.0 : opts.lr * inv * g0;
                double step1 = opts.lr * inv * (opts.restricted ? g1 + g2 : g1);
                double step2 = opts.restricted ? step1 : opts.lr * inv * g2;
                for (auto& s : table.scales) {
                    s[0] -= step0;
                    s[1] -= step1;
                    s[2] -= step2;
                }
            } else {
                for (std::size_t e = 0; e < vsize; ++e) {
                    auto& s = table.scales[e];
                    const auto& g = lg.grad.scales[e];
                    if (opts.restricted) {
                        double step = opts.lr * inv * (g[1] + g[2]);
                        s[1] -= step;
                        s[2] = s[1];
                    } else {
                        s[0] -= opts.lr * inv * g[0];
                        s[1] -= opts.lr * inv * g[1];
                        s[2] -= opts.lr * inv * g[2];
                    }
                }
            }
        }
        double epoch_loss = mean_loss();
        result.loss_trace.push_back(epoch_loss);
        if (epoch_loss > initial * 10.0)
            throw Error("scale learning diverged: loss " + std::to_string(epoch_loss) +
                        " exceeds 10x initial " + std::to_string(initial));
    }
    result.table = std::move(table);
    return result;
}

std::vector<TuneExample> make_tuning_data(const std::vector<Document>& mono_docs,
                                          const TranslationModel& reverse_tm, int k,
                                          int beam_size) {
    std::vector<ParallelDocument> synthetic =
        back_translate_docs(reverse_tm, mono_docs, beam_size);
    return tune_examples_from_docs(synthetic, k);
}

} // namespace docfuse
