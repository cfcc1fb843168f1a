#include "docfuse/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace docfuse {

FusionMode fusion_mode_from_string(const std::string& name) {
    if (name == "none") return FusionMode::None;
    if (name == "static") return FusionMode::Static;
    if (name == "context_delta") return FusionMode::ContextDelta;
    if (name == "on_the_fly") return FusionMode::OnTheFly;
    if (name == "learned") return FusionMode::Learned;
    throw Error("unknown fusion mode: " + name);
}

std::string to_string(FusionMode mode) {
    switch (mode) {
        case FusionMode::None: return "none";
        case FusionMode::Static: return "static";
        case FusionMode::ContextDelta: return "context_delta";
        case FusionMode::OnTheFly: return "on_the_fly";
        case FusionMode::Learned: return "learned";
    }
    return "?";
}

namespace {

std::vector<Sentence> truncated(const std::vector<Sentence>& context, int k) {
    if (k <= 0) return {};
    std::size_t kk = static_cast<std::size_t>(k);
    if (context.size() <= kk) return context;
    return {context.end() - static_cast<std::ptrdiff_t>(kk), context.end()};
}

Sentence with_prefix(const Sentence& head, const Sentence& prefix) {
    Sentence out = head;
    out.insert(out.end(), prefix.begin(), prefix.end());
    return out;
}

/// Learned-scale fusion: softmax over per-subword weighted log scores.
LogDist fuse_learned(const LogDist& d_tm, const LogDist& d_lm, const LogDist& d_ilm,
                     const SubwordScaleTable& table) {
    if (table.size() != d_tm.size())
        throw Error("scale table size does not match distribution");
    LogDist out;
    out.logp.resize(d_tm.size());
    for (std::size_t i = 0; i < d_tm.size(); ++i) {
        const auto& s = table.scales[i];
        double tm = s[0] == 0.0 ? 0.0 : s[0] * d_tm.logp[i];
        double lm = s[1] == 0.0 ? 0.0 : s[1] * d_lm.logp[i];
        double ilm = s[2] == 0.0 ? 0.0 : s[2] * d_ilm.logp[i];
        out.logp[i] = tm + (lm - ilm);
    }
    normalize(out);
    return out;
}

} // namespace

LogDist fused_step_dist(const FusionModels& models, const DecodeConfig& config,
                        const Sentence& source, const std::vector<Sentence>& context,
                        const Sentence& prefix) {
    const TranslationModel& tm = *models.tm;
    Sentence tm_hist = tm.context_k() > 0
                           ? with_prefix(lm_history(truncated(context, tm.context_k())), prefix)
                           : with_prefix(lm_history({}), prefix);
    LogDist d_tm = tm.step_dist(tm_hist, source);
    if (config.fusion == FusionMode::None) return d_tm;

    Sentence ilm_hist = with_prefix(lm_history({}), prefix);
    switch (config.fusion) {
        case FusionMode::Static: {
            LogDist d_lm = models.lm->cond_logdist(
                with_prefix(lm_history(truncated(context, config.context_k)), prefix));
            LogDist d_ilm = models.ilm->cond_logdist(ilm_hist);
            return fuse_step(d_tm, d_lm, d_ilm, config.scales);
        }
        case FusionMode::ContextDelta: {
            LogDist d_lm = models.lm->cond_logdist(
                with_prefix(lm_history(truncated(context, config.context_k)), prefix));
            LogDist d_noctx = models.lm->cond_logdist(ilm_hist);
            return fuse_step_context_delta(d_tm, d_lm, d_noctx, config.scales);
        }
        case FusionMode::OnTheFly: {
            LogDist d_lm = models.lm->cond_logdist(
                with_prefix(lm_history(truncated(context, config.context_k)), prefix));
            LogDist d_ilm = models.ilm->cond_logdist(ilm_hist);
            OnTheFlyResult r = on_the_fly_step(d_tm, d_lm, d_ilm, config.grid);
            LogDist d;
            d.logp = std::move(r.score); // per-token maxima, deliberately unnormalized
            return d;
        }
        case FusionMode::Learned: {
            LogDist d_lm = models.lm->cond_logdist(
                with_prefix(lm_history(truncated(context, config.context_k)), prefix));
            LogDist d_ilm = models.ilm->cond_logdist(ilm_hist);
            return fuse_learned(d_tm, d_lm, d_ilm, config.table);
        }
        case FusionMode::None: break;
    }
    return d_tm;
}

namespace {

struct Candidate {
    Sentence tokens;
    double score;
    bool finished;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score; // higher first
    return a.tokens < b.tokens;
}

} // namespace

DecodeResult beam_decode(const FusionModels& models, const DecodeConfig& config,
                         const Sentence& source, const std::vector<Sentence>& context) {
    if (config.beam_size < 1) throw Error("beam size must be >= 1");
    const std::size_t vsize = models.tm->vocab->size();
    const std::size_t max_len = static_cast<std::size_t>(config.max_len_factor) * source.size() +
                                static_cast<std::size_t>(config.max_len_bias);

    auto norm_score = [&](double score, std::size_t length) {
        return score / std::pow(static_cast<double>(length), config.length_norm_alpha);
    };

    std::vector<Hypothesis> live{Hypothesis{}};
    std::optional<Hypothesis> best_finished;
    auto offer_finished = [&](Hypothesis&& h) {
        if (!best_finished) {
            best_finished = std::move(h);
            return;
        }
        double a = norm_score(h.score, h.length());
        double b = norm_score(best_finished->score, best_finished->length());
        if (a > b || (a == b && h.tokens < best_finished->tokens)) best_finished = std::move(h);
    };

    for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
        // every EOS expansion is recorded in the finished pool, whether or
        // not it survives pruning; pruning itself ranks all candidates, so
        // beam 1 follows the exact greedy argmax chain
        std::vector<Candidate> candidates;
        candidates.reserve(live.size() * vsize);
        for (const Hypothesis& hyp : live) {
            LogDist dist = fused_step_dist(models, config, source, context, hyp.tokens);
            for (std::size_t w = 0; w < vsize; ++w) {
                double lp = dist.logp[w];
                if (std::isinf(lp) && lp < 0) continue; // excluded from support
                Candidate c;
                c.tokens = hyp.tokens;
                c.tokens.push_back(static_cast<SubwordId>(w));
                c.score = hyp.score + lp;
                c.finished = static_cast<SubwordId>(w) == Vocabulary::kEos;
                if (c.finished)
                    offer_finished(Hypothesis{c.tokens, c.score, true});
                candidates.push_back(std::move(c));
            }
        }
        if (candidates.empty()) break;

        std::size_t keep = std::min<std::size_t>(candidates.size(),
                                                 static_cast<std::size_t>(config.beam_size));
        std::partial_sort(candidates.begin(),
                          candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                          candidates.end(), candidate_less);
        candidates.resize(keep);

        live.clear();
        for (Candidate& c : candidates) {
            if (!c.finished) live.push_back(Hypothesis{std::move(c.tokens), c.score, false});
        }
    }

    DecodeResult result;
    if (best_finished) {
        result.tokens.assign(best_finished->tokens.begin(), best_finished->tokens.end() - 1);
        result.score = best_finished->score;
        result.normalized_score = norm_score(best_finished->score, best_finished->length());
        return result;
    }
    // no finished hypothesis within the length budget: best unfinished
    result.reached_max_len = true;
    if (!live.empty()) {
        const Hypothesis* best = &live.front();
        double best_norm = norm_score(best->score, best->length());
        for (const Hypothesis& h : live) {
            double ns = norm_score(h.score, h.length());
            if (ns > best_norm || (ns == best_norm && h.tokens < best->tokens)) {
                best = &h;
                best_norm = ns;
            }
        }
        result.tokens = best->tokens;
        result.score = best->score;
        result.normalized_score = best_norm;
    }
    return result;
}

Document decode_document(const FusionModels& models, const DecodeConfig& config,
                         const Document& source_doc) {
    Document out;
    out.id = source_doc.id;
    std::vector<Sentence> context;
    for (const Sentence& src : source_doc.sentences) {
        Sentence hyp;
        try {
            hyp = beam_decode(models, config, src, context).tokens;
        } catch (const Error&) {
            hyp.clear(); // failed sentence: empty output, no context contribution
        }
        out.sentences.push_back(hyp);
        if (!hyp.empty()) {
            context.push_back(hyp);
            if (config.context_k >= 0 &&
                context.size() > static_cast<std::size_t>(config.context_k))
                context.erase(context.begin());
        }
    }
    return out;
}

std::vector<Document> decode_corpus(const FusionModels& models, const DecodeConfig& config,
                                    const std::vector<Document>& source_docs) {
    std::vector<Document> out;
    out.reserve(source_docs.size());
    for (const auto& doc : source_docs) out.push_back(decode_document(models, config, doc));
    return out;
}

Sentence rerank_pronouns(const Sentence& hyp, const NGramLM& doc_lm,
                         const std::vector<Sentence>& context,
                         const std::vector<SubwordId>& pronoun_set, std::size_t cap) {
    if (pronoun_set.empty()) throw Error("empty pronoun set");
    for (SubwordId p : pronoun_set)
        if (p == Vocabulary::kEos) throw Error("EOS cannot be a pronoun alternative");

    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < hyp.size(); ++i)
        if (std::find(pronoun_set.begin(), pronoun_set.end(), hyp[i]) != pronoun_set.end())
            positions.push_back(i);
    if (positions.empty()) return hyp;

    std::vector<Sentence> ctx = truncated(context, doc_lm.context_k);

    double n_combos = std::pow(static_cast<double>(pronoun_set.size()),
                               static_cast<double>(positions.size()));
    if (n_combos > static_cast<double>(cap)) {
        // too many combinations: decide each position independently, left to
        // right, keeping earlier decisions in place
        Sentence best = hyp;
        for (std::size_t pos : positions) {
            Sentence cand = best;
            double best_score = doc_lm.score_sequence(best, ctx);
            for (SubwordId alt : pronoun_set) {
                if (alt == best[pos]) continue;
                cand[pos] = alt;
                double s = doc_lm.score_sequence(cand, ctx);
                if (s > best_score) {
                    best_score = s;
                    best[pos] = alt;
                }
                cand[pos] = best[pos];
            }
        }
        return best;
    }

    // exhaustive: original first so that ties keep the original tokens
    Sentence best = hyp;
    double best_score = doc_lm.score_sequence(hyp, ctx);
    std::vector<std::size_t> idx(positions.size(), 0);
    Sentence cand = hyp;
    while (true) {
        for (std::size_t i = 0; i < positions.size(); ++i)
            cand[positions[i]] = pronoun_set[idx[i]];
        if (cand != hyp) {
            double s = doc_lm.score_sequence(cand, ctx);
            if (s > best_score) {
                best_score = s;
                best = cand;
            }
        }
        std::size_t carry = 0;
        while (carry < idx.size()) {
            if (++idx[carry] < pronoun_set.size()) break;
            idx[carry] = 0;
            ++carry;
        }
        if (carry == idx.size()) break;
    }
    return best;
}

} // namespace docfuse
